#pragma once

#include "osmosis/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

namespace osmosis {

/// Axis-aligned pixel rectangle [row0, row1) x [col0, col1).
struct Rect {
    std::size_t row0 = 0, col0 = 0, row1 = 0, col1 = 0;

    bool contains(std::size_t i, std::size_t j) const noexcept {
        return i >= row0 && i < row1 && j >= col0 && j < col1;
    }
};

/// Polygon vertices in (row, col) pixel coordinates; pixel centers are tested for inclusion.
using Polygon = std::vector<std::array<double, 2>>;

struct ShadowSpec {
    std::optional<Rect> rect;
    Polygon polygon;
    double c = 0.5;      // attenuation (< 1 shadow, > 1 light spot)
    double sigma = 0.0;  // penumbra blur; 0 gives a hard edge
    std::size_t mask_width = 2;
};

/// Mask-width presets used for hard and soft boundaries.
inline constexpr std::size_t kThinMaskWidth = 2;
inline constexpr std::size_t kWideMaskWidth = 6;

inline bool point_in_polygon(const Polygon& poly, double y, double x) {
    bool inside = false;
    for (std::size_t a = 0, b = poly.size() - 1; a < poly.size(); b = a++) {
        const double ya = poly[a][0], xa = poly[a][1], yb = poly[b][0], xb = poly[b][1];
        if ((ya > y) != (yb > y) && x < (xb - xa) * (y - ya) / (yb - ya) + xa) inside = !inside;
    }
    return inside;
}

/// Pixel set S of the shadow/light region.
inline Mask region_mask(const GridSpec& grid, const ShadowSpec& spec) {
    Mask s(grid);
    if (spec.rect) {
        const Rect& r = *spec.rect;
        if (r.row1 > grid.rows || r.col1 > grid.cols || r.row0 >= r.row1 || r.col0 >= r.col1)
            throw ArgumentError("shadow rectangle exceeds the grid or is empty");
        for (std::size_t i = r.row0; i < r.row1; ++i)
            for (std::size_t j = r.col0; j < r.col1; ++j) s.set(i, j, true);
    } else if (spec.polygon.size() >= 3) {
        for (const auto& pt : spec.polygon)
            if (pt[0] < 0 || pt[1] < 0 || pt[0] > static_cast<double>(grid.rows) ||
                pt[1] > static_cast<double>(grid.cols))
                throw ArgumentError("shadow polygon exceeds the grid");
        for (std::size_t i = 0; i < grid.rows; ++i)
            for (std::size_t j = 0; j < grid.cols; ++j)
                s.set(i, j, point_in_polygon(spec.polygon, i + 0.5, j + 0.5));
    } else {
        throw ArgumentError("shadow spec needs a rectangle or a polygon with >= 3 vertices");
    }
    return s;
}

/// Chebyshev distance from every pixel to the nearest pixel where `target` is true
/// (brute-force two-pass chamfer; exact for the L-infinity metric).
inline std::vector<std::size_t> chebyshev_distance(const Mask& target) {
    const GridSpec& g = target.grid();
    constexpr std::size_t inf = std::numeric_limits<std::size_t>::max() / 2;
    std::vector<std::size_t> d(g.size(), inf);
    for (std::size_t p = 0; p < g.size(); ++p)
        if (target[p]) d[p] = 0;
    auto relax = [&](std::size_t p, long di, long dj) {
        const long i = static_cast<long>(g.row_of(p)) + di, j = static_cast<long>(g.col_of(p)) + dj;
        if (i < 0 || j < 0 || i >= static_cast<long>(g.rows) || j >= static_cast<long>(g.cols)) return;
        d[p] = std::min(d[p], d[g.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j))] + 1);
    };
    for (std::size_t p = 0; p < g.size(); ++p) {
        relax(p, -1, -1);
        relax(p, -1, 0);
        relax(p, -1, 1);
        relax(p, 0, -1);
    }
    for (std::size_t p = g.size(); p-- > 0;) {
        relax(p, 1, 1);
        relax(p, 1, 0);
        relax(p, 1, -1);
        relax(p, 0, 1);
    }
    return d;
}

/// Band of total width `width` straddling the boundary of `region`: ceil(width/2) pixels on
/// the inside and floor(width/2) on the outside.
inline Mask boundary_band(const Mask& region, std::size_t width) {
    const GridSpec& g = region.grid();
    Mask outside(g);
    for (std::size_t p = 0; p < g.size(); ++p) outside.set(p, !region[p]);
    const auto to_out = chebyshev_distance(outside);
    const auto to_in = chebyshev_distance(region);
    const std::size_t in_w = (width + 1) / 2, out_w = width / 2;
    Mask band(g);
    for (std::size_t p = 0; p < g.size(); ++p)
        band.set(p, region[p] ? to_out[p] <= in_w : to_in[p] <= out_w);
    return band;
}

/// Half-sample symmetric reflection of an index into [0, n).
inline std::size_t reflect_index(long k, std::size_t n) {
    const long period = 2 * static_cast<long>(n);
    long m = k % period;
    if (m < 0) m += period;
    return static_cast<std::size_t>(m < static_cast<long>(n) ? m : period - 1 - m);
}

inline std::vector<double> gaussian_kernel(double sigma) {
    const auto radius = static_cast<long>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (long t = -radius; t <= radius; ++t) {
        const double w = std::exp(-0.5 * static_cast<double>(t * t) / (sigma * sigma));
        k[static_cast<std::size_t>(t + radius)] = w;
        sum += w;
    }
    for (double& w : k) w /= sum;
    return k;
}

/// Separable Gaussian blur, kernel radius ceil(3 sigma), renormalised, mirrored boundary.
inline Image gaussian_convolve(const Image& img, double sigma) {
    if (!(sigma >= 0.0)) throw ArgumentError("sigma must be >= 0");
    if (sigma == 0.0) return img;
    const GridSpec& g = img.grid();
    const auto k = gaussian_kernel(sigma);
    const long r = static_cast<long>(k.size() / 2);
    Image tmp(g), out(g);
    for (std::size_t i = 0; i < g.rows; ++i)
        for (std::size_t j = 0; j < g.cols; ++j) {
            double acc = 0.0;
            for (long t = -r; t <= r; ++t)
                acc += k[static_cast<std::size_t>(t + r)] *
                       img.at(i, reflect_index(static_cast<long>(j) + t, g.cols));
            tmp.at(i, j) = acc;
        }
    for (std::size_t i = 0; i < g.rows; ++i)
        for (std::size_t j = 0; j < g.cols; ++j) {
            double acc = 0.0;
            for (long t = -r; t <= r; ++t)
                acc += k[static_cast<std::size_t>(t + r)] *
                       tmp.at(reflect_index(static_cast<long>(i) + t, g.rows), j);
            out.at(i, j) = acc;
        }
    return out;
}

struct ShadowedImage {
    Image image;
    Mask mask;     // boundary band, true = Omega_b
    Image factor;  // multiplicative shadow/light field s (or G_sigma * s)
    Mask region;
};

/// f = f* . s for a hard edge, f* . (G_sigma * s) for a soft one, with s = c on S, 1 elsewhere.
inline ShadowedImage make_shadowed(const Image& f_star, const ShadowSpec& spec) {
    require_positive(f_star, "ground-truth image");
    if (!(spec.c > 0.0)) throw ArgumentError("attenuation c must be > 0");
    if (!(spec.sigma >= 0.0)) throw ArgumentError("sigma must be >= 0");
    const GridSpec& g = f_star.grid();
    const Mask region = region_mask(g, spec);
    Image s(g, 1.0);
    for (std::size_t p = 0; p < g.size(); ++p)
        if (region[p]) s[p] = spec.c;
    s = gaussian_convolve(s, spec.sigma);
    Image f(g);
    for (std::size_t p = 0; p < g.size(); ++p) f[p] = f_star[p] * s[p];
    return {std::move(f), boundary_band(region, spec.mask_width), std::move(s), region};
}

/// Pixels whose central-difference gradient magnitude exceeds threshold * (max - min),
/// optionally dilated (4-neighborhood) `dilate` times.
inline Mask edge_mask(const Image& v, double threshold, std::size_t dilate = 0) {
    if (!(threshold > 0.0)) throw ArgumentError("edge threshold must be > 0");
    const GridSpec& g = v.grid();
    const auto [lo, hi] = std::minmax_element(v.values().begin(), v.values().end());
    const double range = *hi - *lo;
    Mask m(g);
    if (range <= 0.0) return m;
    const double limit = threshold * range;
    for (std::size_t p = 0; p < g.size(); ++p) {
        const double gy = 0.5 * (v[neighbor(g, p, Direction::North).index] -
                                 v[neighbor(g, p, Direction::South).index]) / g.h;
        const double gx = 0.5 * (v[neighbor(g, p, Direction::East).index] -
                                 v[neighbor(g, p, Direction::West).index]) / g.h;
        m.set(p, std::sqrt(gx * gx + gy * gy) > limit);
    }
    for (std::size_t it = 0; it < dilate; ++it) {
        Mask grown = m;
        for (std::size_t p = 0; p < g.size(); ++p) {
            if (!m[p]) continue;
            for (Direction d : kDirections) grown.set(neighbor(g, p, d).index, true);
        }
        m = std::move(grown);
    }
    return m;
}

/// SplitMix64; fixed, platform-independent stream for reproducible synthetic data.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    /// Uniform in [0, 1).
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

private:
    std::uint64_t state_;
};

inline Image random_positive_image(const GridSpec& g, SplitMix64& rng, double lo, double hi) {
    Image img(g);
    for (double& x : img.values()) x = rng.uniform(lo, hi);
    return img;
}

/// Smooth textured test image on an 8-bit-like scale (values within [30, 230]): two wave
/// patterns plus blurred noise normalised to RMS `noise_amplitude`.
inline Image textured_image(const GridSpec& g, std::uint64_t seed, double noise_amplitude = 15.0,
                            double noise_sigma = 3.0) {
    SplitMix64 rng(seed);
    Image noise(g);
    for (double& x : noise.values()) x = rng.uniform(-1.0, 1.0);
    noise = gaussian_convolve(noise, noise_sigma);
    double rms = 0.0;
    for (double x : noise.values()) rms += x * x;
    rms = std::sqrt(rms / static_cast<double>(g.size()));
    const double gain = rms > 0.0 ? noise_amplitude / rms : 0.0;
    const double phase_a = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double phase_b = rng.uniform(0.0, 2.0 * std::numbers::pi);
    Image img(g);
    for (std::size_t i = 0; i < g.rows; ++i)
        for (std::size_t j = 0; j < g.cols; ++j) {
            const double y = static_cast<double>(i), x = static_cast<double>(j);
            const double waves = 35.0 * std::sin(2.0 * std::numbers::pi * x / 29.0 + phase_a) *
                                     std::cos(2.0 * std::numbers::pi * y / 37.0 + phase_b) +
                                 15.0 * std::sin(2.0 * std::numbers::pi * (x + y) / 19.0);
            img.at(i, j) = std::clamp(130.0 + waves + gain * noise.at(i, j), 30.0, 230.0);
        }
    return img;
}

/// Piecewise-constant cartoon: background with two nested rectangles.
inline Image cartoon_image(const GridSpec& g, double background = 60.0, double outer = 140.0,
                           double inner = 220.0) {
    Image img(g, background);
    const std::size_t r0 = g.rows / 5, r1 = g.rows - g.rows / 5;
    const std::size_t c0 = g.cols / 6, c1 = g.cols - g.cols / 4;
    const std::size_t ri0 = g.rows * 2 / 5, ri1 = g.rows * 3 / 5;
    const std::size_t ci0 = g.cols * 2 / 6, ci1 = g.cols * 3 / 6 + 1;
    for (std::size_t i = 0; i < g.rows; ++i)
        for (std::size_t j = 0; j < g.cols; ++j) {
            if (i >= ri0 && i < ri1 && j >= ci0 && j < ci1)
                img.at(i, j) = inner;
            else if (i >= r0 && i < r1 && j >= c0 && j < c1)
                img.at(i, j) = outer;
        }
    return img;
}

}  // namespace osmosis
