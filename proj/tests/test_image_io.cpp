#include "osmosis/image_io.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

using namespace osmosis;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "osmosis_io_test";
    fs::create_directories(dir);
    return dir / name;
}

Raster random_raster(std::size_t channels, int depth, std::uint64_t seed) {
    Raster r;
    r.bit_depth = depth;
    SplitMix64 rng(seed);
    for (std::size_t c = 0; c < channels; ++c) {
        Image img(make_grid(7, 9));
        for (double& x : img.values()) x = std::floor(rng.uniform(0.0, r.max_value() + 1.0));
        r.channels.push_back(img);
    }
    return r;
}

}  // namespace

TEST_CASE("raster round trips", "[io]") {
    for (const char* ext : {".png", ".pgm", ".ppm"}) {
        for (int depth : {8, 16}) {
            const std::size_t channels = std::string(ext) == ".pgm" ? 1 : 3;
            for (std::size_t ch : {std::size_t{1}, std::size_t{3}}) {
                if (std::string(ext) != ".png" && ch != channels) continue;
                const Raster r = random_raster(ch, depth, 11 + ch + static_cast<std::uint64_t>(depth));
                const fs::path path = scratch("rt" + std::to_string(depth) + "_" + std::to_string(ch) + ext);
                write_raster(path, r);
                const Raster back = read_raster(path);
                REQUIRE(back.channels.size() == ch);
                CHECK(back.bit_depth == depth);
                for (std::size_t c = 0; c < ch; ++c) CHECK(back.channels[c] == r.channels[c]);
            }
        }
    }
}

TEST_CASE("raster writer rounds and clamps", "[io]") {
    Raster r;
    r.channels.emplace_back(make_grid(2, 2), std::vector<double>{-3.0, 12.4, 12.6, 400.0});
    const fs::path path = scratch("clamp.pgm");
    write_raster(path, r);
    const Raster back = read_raster(path);
    CHECK(back.channels[0].vector() == std::vector<double>{0.0, 12.0, 13.0, 255.0});
}

TEST_CASE("raster errors", "[io]") {
    CHECK_THROWS_AS(read_raster(scratch("nothing.png")), DataError);
    CHECK_THROWS_AS(read_raster(scratch("x.tif")), DataError);
    {
        std::ofstream(scratch("bad.png")) << "not a png";
        std::ofstream(scratch("bad.pgm")) << "P5\n4 4\n255\nab";
    }
    CHECK_THROWS_AS(read_raster(scratch("bad.png")), DataError);
    CHECK_THROWS_AS(read_raster(scratch("bad.pgm")), DataError);
    Raster rgb = random_raster(3, 8, 1);
    CHECK_THROWS_AS(write_raster(scratch("rgb.pgm"), rgb), ArgumentError);
}

TEST_CASE("mask convention", "[io]") {
    const auto g = make_grid(3, 3);
    Mask m(g);
    m.set(0, 0, true);
    m.set(2, 1, true);
    const Raster r = mask_to_raster(m);
    CHECK(r.channels[0].at(0, 0) == 0.0);
    CHECK(r.channels[0].at(1, 1) == 255.0);
    const fs::path path = scratch("mask.png");
    write_raster(path, r);
    CHECK(mask_from_raster(read_raster(path)) == m);
}

TEST_CASE("positivity mapping", "[io]") {
    const Image samples(make_grid(2, 2), std::vector<double>{0, 1, 128, 255});
    const Image off = to_positive(samples, PositivityMode::Offset, 255.0);
    CHECK(off.vector() == std::vector<double>{1, 2, 129, 256});
    CHECK(from_positive(off, PositivityMode::Offset) == samples);
    const Image fl = to_positive(samples, PositivityMode::Floor, 255.0);
    CHECK(fl.vector() == std::vector<double>{1, 1, 128, 255});
}
