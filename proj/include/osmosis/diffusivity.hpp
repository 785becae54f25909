#pragma once

#include "osmosis/drift.hpp"
#include "osmosis/grid.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace osmosis {

enum class DiffusivityMode { Nonlinear, LinearBaseline };

struct DiffusivityParams {
    double epsilon = 1e-7;
    double p = 1.0;
    DiffusivityMode mode = DiffusivityMode::Nonlinear;

    void validate() const {
        if (!(epsilon > 0.0)) throw ArgumentError("epsilon must be > 0");
        if (!(p >= 1.0 && p < 2.0)) throw ArgumentError("diffusivity exponent p must lie in [1, 2)");
    }
    /// Upper bound of g, reached where the flux vanishes.
    double max_value() const {
        return mode == DiffusivityMode::LinearBaseline ? 1.0 : std::pow(epsilon, -0.5 * p);
    }
};

/// Pixel diffusivity g and its edge averages (g_p + g_q) / 2. Mirrored boundary edges
/// carry the pixel's own value.
class DiffusivityField {
public:
    DiffusivityField() = default;
    explicit DiffusivityField(GridSpec grid) : grid_(grid), g_(grid.size(), 1.0) {
        for (auto& e : edge_) e.assign(grid.size(), 1.0);
    }

    const GridSpec& grid() const noexcept { return grid_; }
    double pixel(std::size_t p) const noexcept { return g_[p]; }
    std::span<const double> pixels() const noexcept { return g_; }

    double edge(std::size_t p, Direction d) const noexcept {
        return edge_[static_cast<std::size_t>(d)][p];
    }

    /// Overwrites pixel values and rebuilds all edge averages.
    void set_pixels(std::vector<double> values) {
        if (values.size() != grid_.size()) throw ArgumentError("diffusivity size mismatch");
        g_ = std::move(values);
        for (std::size_t p = 0; p < grid_.size(); ++p) {
            for (Direction d : kDirections) {
                const auto q = neighbor(grid_, p, d);
                edge_[static_cast<std::size_t>(d)][p] = 0.5 * (g_[q.index] + g_[p]);
            }
        }
    }

private:
    GridSpec grid_{};
    std::vector<double> g_;
    std::array<std::vector<double>, 4> edge_;
};

/// Flux vector s = grad u - (grad v / v) u at a pixel, from central differences with mirroring.
/// When `with_drift` is false only grad u is kept.
inline std::array<double, 2> flux_vector(const Image& u, const Image& v, std::size_t p,
                                         bool with_drift) {
    const GridSpec& g = u.grid();
    const std::size_t n = neighbor(g, p, Direction::North).index;
    const std::size_t s = neighbor(g, p, Direction::South).index;
    const std::size_t e = neighbor(g, p, Direction::East).index;
    const std::size_t w = neighbor(g, p, Direction::West).index;
    const double inv2h = 0.5 / g.h;
    double sy = (u[n] - u[s]) * inv2h;
    double sx = (u[e] - u[w]) * inv2h;
    if (with_drift) {
        const double ratio = u[p] / v[p];
        sy -= (v[n] - v[s]) * inv2h * ratio;
        sx -= (v[e] - v[w]) * inv2h * ratio;
    }
    return {sx, sy};
}

/// g = (|s|^2 + eps)^(-p/2) per pixel. `drift` selects, per pixel, whether the transport
/// part enters s; pass nullptr to use the canonical drift everywhere.
inline DiffusivityField pointwise_g(const Image& u, const Image& v, const DiffusivityParams& params,
                                    const DriftField* drift = nullptr) {
    params.validate();
    require_same_grid(u.grid(), v.grid(), "pointwise_g state vs reference");
    if (drift) require_same_grid(u.grid(), drift->grid(), "pointwise_g state vs drift");
    const GridSpec& grid = u.grid();
    DiffusivityField field(grid);
    std::vector<double> g(grid.size(), 1.0);
    if (params.mode == DiffusivityMode::Nonlinear) {
        const double half_p = 0.5 * params.p;
        for (std::size_t p = 0; p < grid.size(); ++p) {
            const bool with_drift = drift ? drift->pixel_active(p) : true;
            const auto s = flux_vector(u, v, p, with_drift);
            const double q = s[0] * s[0] + s[1] * s[1] + params.epsilon;
            g[p] = params.p == 1.0 ? 1.0 / std::sqrt(q) : std::pow(q, -half_p);
        }
    }
    field.set_pixels(std::move(g));
    return field;
}

inline double edge_g(const DiffusivityField& field, std::size_t pixel, Direction dir) {
    if (pixel >= field.grid().size()) throw ArgumentError("pixel index out of range");
    return field.edge(pixel, dir);
}

}  // namespace osmosis
