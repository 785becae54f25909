#pragma once

#include "osmosis/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

namespace osmosis {

inline double mass(const Image& u) { return std::accumulate(u.values().begin(), u.values().end(), 0.0); }

inline double mean_grey(const Image& u) { return mass(u) / static_cast<double>(u.size()); }

/// Discrete E_p(u) = sum_h h^2 v^{1-p} / (2-p) |grad(u/v)|^{2-p}, with forward differences
/// of u/v and mirrored (zero) differences on the last row/column. p = 1 gives E(u).
inline double energy(const Image& u, const Image& v, double p = 1.0) {
    if (!(p >= 1.0 && p < 2.0)) throw ArgumentError("energy exponent p must lie in [1, 2)");
    require_same_grid(u.grid(), v.grid(), "energy");
    require_positive(v, "reference image v");
    const GridSpec& g = u.grid();
    const double q = 2.0 - p;
    double total = 0.0;
    for (std::size_t i = 0; i < g.rows; ++i) {
        for (std::size_t j = 0; j < g.cols; ++j) {
            const std::size_t k = g.index(i, j);
            const double w = u[k] / v[k];
            const double dy = i + 1 < g.rows ? (u[k + g.cols] / v[k + g.cols] - w) / g.h : 0.0;
            const double dx = j + 1 < g.cols ? (u[k + 1] / v[k + 1] - w) / g.h : 0.0;
            const double mag = std::sqrt(dx * dx + dy * dy);
            if (mag == 0.0) continue;
            const double weight = p == 1.0 ? 1.0 : std::pow(v[k], 1.0 - p) / q;
            total += weight * (p == 1.0 ? mag : std::pow(mag, q));
        }
    }
    return total * g.h * g.h;
}

struct SsimOptions {
    double dynamic_range = 255.0;
    std::size_t window = 8;
    double k1 = 0.01;
    double k2 = 0.03;
};

/// Mean SSIM over all uniform window positions (stride 1) fully inside the grid. Windows
/// larger than the grid are clipped to the grid dimensions.
inline double ssim(const Image& a, const Image& b, const SsimOptions& opt = {}) {
    require_same_grid(a.grid(), b.grid(), "ssim");
    if (!(opt.dynamic_range > 0.0)) throw ArgumentError("ssim dynamic range must be > 0");
    const GridSpec& g = a.grid();
    const std::size_t wr = std::min(opt.window, g.rows);
    const std::size_t wc = std::min(opt.window, g.cols);
    const double c1 = (opt.k1 * opt.dynamic_range) * (opt.k1 * opt.dynamic_range);
    const double c2 = (opt.k2 * opt.dynamic_range) * (opt.k2 * opt.dynamic_range);
    const double n = static_cast<double>(wr * wc);
    double acc = 0.0;
    std::size_t windows = 0;
    for (std::size_t i0 = 0; i0 + wr <= g.rows; ++i0) {
        for (std::size_t j0 = 0; j0 + wc <= g.cols; ++j0) {
            double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
            for (std::size_t i = i0; i < i0 + wr; ++i) {
                for (std::size_t j = j0; j < j0 + wc; ++j) {
                    const double x = a.at(i, j), y = b.at(i, j);
                    sa += x;
                    sb += y;
                    saa += x * x;
                    sbb += y * y;
                    sab += x * y;
                }
            }
            const double ma = sa / n, mb = sb / n;
            // sample (n - 1) normalisation, as in the reference implementation
            const double norm = n > 1 ? n / (n - 1) : 1.0;
            const double va = (saa / n - ma * ma) * norm;
            const double vb = (sbb / n - mb * mb) * norm;
            const double cov = (sab / n - ma * mb) * norm;
            acc += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            ++windows;
        }
    }
    return acc / static_cast<double>(windows);
}

struct MetricReport {
    double mean = 0.0;
    double mass = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::optional<double> ssim;
    std::optional<double> energy;
};

inline MetricReport metrics(const Image& u, const Image* reference = nullptr,
                            const Image* drift_reference = nullptr, const SsimOptions& opt = {}) {
    MetricReport r;
    r.mass = mass(u);
    r.mean = r.mass / static_cast<double>(u.size());
    const auto [lo, hi] = std::minmax_element(u.values().begin(), u.values().end());
    r.min = *lo;
    r.max = *hi;
    if (reference) r.ssim = ssim(u, *reference, opt);
    if (drift_reference) r.energy = energy(u, *drift_reference, 1.0);
    return r;
}

}  // namespace osmosis
