#pragma once

// PNG (8/16-bit, via libpng) and binary PGM/PPM (P5/P6) raster I/O.

#include "osmosis/grid.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

namespace osmosis {

/// Interleaved-free raster: one Image per channel (1 = grey, 3 = RGB), integer sample scale.
struct Raster {
    std::vector<Image> channels;
    int bit_depth = 8;

    std::size_t rows() const { return channels.empty() ? 0 : channels.front().grid().rows; }
    std::size_t cols() const { return channels.empty() ? 0 : channels.front().grid().cols; }
    double max_value() const { return bit_depth == 16 ? 65535.0 : 255.0; }
};

namespace detail {

inline std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return ext;
}

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline std::vector<Image> empty_channels(std::size_t count, std::size_t rows, std::size_t cols) {
    std::vector<Image> ch;
    for (std::size_t c = 0; c < count; ++c) ch.emplace_back(GridSpec{rows, cols, 1.0});
    return ch;
}

[[noreturn]] inline void png_fail(png_structp, png_const_charp msg) {
    throw DataError(std::string("png: ") + msg);
}
inline void png_warn(png_structp, png_const_charp) {}

inline Raster read_png(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp) throw DataError("cannot open " + path.string());
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) throw DataError("png: cannot allocate reader");
    struct Guard {
        png_structp* p;
        png_infop* i;
        ~Guard() { png_destroy_read_struct(p, i, nullptr); }
    } guard{&png, &info};

    png_init_io(png, fp.get());
    png_read_info(png, info);
    const int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
    if (depth == 16) png_set_swap(png);  // host little-endian samples
    png_read_update_info(png, info);

    const std::size_t rows = png_get_image_height(png, info);
    const std::size_t cols = png_get_image_width(png, info);
    const std::size_t channels = png_get_channels(png, info);
    depth = png_get_bit_depth(png, info);
    if (rows < 2 || cols < 2) throw DataError("image must be at least 2x2");
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    std::vector<unsigned char> data(rowbytes * rows);
    std::vector<png_bytep> ptrs(rows);
    for (std::size_t i = 0; i < rows; ++i) ptrs[i] = data.data() + i * rowbytes;
    png_read_image(png, ptrs.data());
    png_read_end(png, nullptr);

    Raster r;
    r.bit_depth = depth == 16 ? 16 : 8;
    r.channels = empty_channels(channels == 1 ? 1 : 3, rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            for (std::size_t c = 0; c < r.channels.size(); ++c) {
                const std::size_t k = j * channels + c;
                double x;
                if (depth == 16) {
                    std::uint16_t s;
                    std::memcpy(&s, ptrs[i] + 2 * k, 2);
                    x = s;
                } else {
                    x = ptrs[i][k];
                }
                r.channels[c].at(i, j) = x;
            }
    return r;
}

inline void write_png(const std::filesystem::path& path, const Raster& r) {
    FilePtr fp(std::fopen(path.string().c_str(), "wb"));
    if (!fp) throw DataError("cannot create " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) throw DataError("png: cannot allocate writer");
    struct Guard {
        png_structp* p;
        png_infop* i;
        ~Guard() { png_destroy_write_struct(p, i); }
    } guard{&png, &info};

    const std::size_t rows = r.rows(), cols = r.cols(), channels = r.channels.size();
    const int depth = r.bit_depth == 16 ? 16 : 8;
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(cols), static_cast<png_uint_32>(rows), depth,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (depth == 16) png_set_swap(png);
    const double maxv = r.max_value();
    const std::size_t bps = depth == 16 ? 2 : 1;
    std::vector<unsigned char> row(cols * channels * bps);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j)
            for (std::size_t c = 0; c < channels; ++c) {
                const double x = std::clamp(std::round(r.channels[c].at(i, j)), 0.0, maxv);
                const std::size_t k = (j * channels + c) * bps;
                if (depth == 16) {
                    const auto s = static_cast<std::uint16_t>(x);
                    std::memcpy(row.data() + k, &s, 2);
                } else {
                    row[k] = static_cast<unsigned char>(x);
                }
            }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
}

inline std::string next_pnm_token(std::istream& in) {
    std::string tok;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    return tok;
}

inline Raster read_pnm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    const std::string magic = next_pnm_token(in);
    if (magic != "P5" && magic != "P6") throw DataError("unsupported PNM type '" + magic + "'");
    std::size_t cols = 0, rows = 0;
    long maxval = 0;
    try {
        cols = std::stoul(next_pnm_token(in));
        rows = std::stoul(next_pnm_token(in));
        maxval = std::stol(next_pnm_token(in));
    } catch (const std::exception&) {
        throw DataError("malformed PNM header in " + path.string());
    }
    if (rows < 2 || cols < 2 || maxval <= 0 || maxval > 65535)
        throw DataError("invalid PNM dimensions or maxval");
    const std::size_t channels = magic == "P5" ? 1 : 3;
    const std::size_t bps = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> data(rows * cols * channels * bps);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (in.gcount() != static_cast<std::streamsize>(data.size()))
        throw DataError("truncated PNM data in " + path.string());
    Raster r;
    r.bit_depth = bps == 2 ? 16 : 8;
    r.channels = empty_channels(channels, rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            for (std::size_t c = 0; c < channels; ++c) {
                const std::size_t k = ((i * cols + j) * channels + c) * bps;
                const double x = bps == 2 ? (data[k] << 8) | data[k + 1] : data[k];  // big-endian
                r.channels[c].at(i, j) = x;
            }
    return r;
}

inline void write_pnm(const std::filesystem::path& path, const Raster& r) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot create " + path.string());
    const std::size_t channels = r.channels.size();
    const int maxv = r.bit_depth == 16 ? 65535 : 255;
    out << (channels == 1 ? "P5" : "P6") << '\n' << r.cols() << ' ' << r.rows() << '\n' << maxv << '\n';
    const std::size_t bps = r.bit_depth == 16 ? 2 : 1;
    std::vector<unsigned char> data(r.rows() * r.cols() * channels * bps);
    for (std::size_t i = 0; i < r.rows(); ++i)
        for (std::size_t j = 0; j < r.cols(); ++j)
            for (std::size_t c = 0; c < channels; ++c) {
                const auto x = static_cast<unsigned>(
                    std::clamp(std::round(r.channels[c].at(i, j)), 0.0, static_cast<double>(maxv)));
                const std::size_t k = ((i * r.cols() + j) * channels + c) * bps;
                if (bps == 2) {
                    data[k] = static_cast<unsigned char>(x >> 8);
                    data[k + 1] = static_cast<unsigned char>(x & 0xff);
                } else {
                    data[k] = static_cast<unsigned char>(x);
                }
            }
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

}  // namespace detail

/// Reads .png, .pgm, .ppm or .pnm by extension.
inline Raster read_raster(const std::filesystem::path& path) {
    const std::string ext = detail::lower_extension(path);
    if (ext == ".png") return detail::read_png(path);
    if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return detail::read_pnm(path);
    throw DataError("unsupported image format '" + ext + "'");
}

inline void write_raster(const std::filesystem::path& path, const Raster& r) {
    if (r.channels.empty()) throw ArgumentError("raster has no channels");
    const std::string ext = detail::lower_extension(path);
    if (ext == ".png") return detail::write_png(path, r);
    if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
        if ((ext == ".pgm") != (r.channels.size() == 1))
            throw ArgumentError("PGM holds one channel, PPM three");
        return detail::write_pnm(path, r);
    }
    throw DataError("unsupported image format '" + ext + "'");
}

/// Mask from a raster's first channel: 0 marks Omega_b, anything else is outside the band.
inline Mask mask_from_raster(const Raster& r) {
    const Image& c = r.channels.at(0);
    Mask m(c.grid());
    for (std::size_t p = 0; p < c.size(); ++p) m.set(p, c[p] == 0.0);
    return m;
}

inline Raster mask_to_raster(const Mask& m) {
    Raster r;
    r.channels.emplace_back(m.grid());
    for (std::size_t p = 0; p < m.size(); ++p) r.channels[0][p] = m[p] ? 0.0 : 255.0;
    return r;
}

enum class PositivityMode { Offset, Floor };

/// Maps integer samples into a strictly positive filtering range: +1 offset (default) or a
/// floor of 1/255 of full scale.
inline Image to_positive(const Image& samples, PositivityMode mode, double max_value) {
    if (mode == PositivityMode::Offset) {
        Image out(samples.grid());
        for (std::size_t p = 0; p < samples.size(); ++p) out[p] = samples[p] + 1.0;
        return out;
    }
    return validate_positive(samples, max_value / 255.0).image;
}

inline Image from_positive(const Image& values, PositivityMode mode) {
    if (mode == PositivityMode::Floor) return values;
    Image out(values.grid());
    for (std::size_t p = 0; p < values.size(); ++p) out[p] = values[p] - 1.0;
    return out;
}

}  // namespace osmosis
