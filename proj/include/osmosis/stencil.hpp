#pragma once

#include "osmosis/diffusivity.hpp"
#include "osmosis/drift.hpp"
#include "osmosis/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

namespace osmosis {

/// Pentadiagonal space-discretisation matrix A(u). Row p reads
///   (A x)_p = c_p x_p + n_p x_{p+cols} + s_p x_{p-cols} + e_p x_{p+1} + w_p x_{p-1},
/// with coefficients on mirrored boundary edges stored as 0.
class StencilOperator {
public:
    /// Band slot: the four neighbor directions followed by the diagonal.
    enum class Band : std::uint8_t { North = 0, South = 1, East = 2, West = 3, Center = 4 };

    StencilOperator() = default;
    explicit StencilOperator(GridSpec grid) : grid_(grid) {
        for (auto& b : bands_) b.assign(grid.size(), 0.0);
    }

    const GridSpec& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return grid_.size(); }

    double center(std::size_t p) const noexcept { return bands_[4][p]; }
    double coefficient(std::size_t p, Direction d) const noexcept {
        return bands_[static_cast<std::size_t>(d)][p];
    }
    std::span<const double> band(Band b) const noexcept {
        return bands_[static_cast<std::size_t>(b)];
    }

    /// Entry a_{row,col}; zero outside the five bands.
    double entry(std::size_t row, std::size_t col) const noexcept {
        if (row == col) return center(row);
        for (Direction d : kDirections) {
            const auto q = neighbor(grid_, row, d);
            if (!q.boundary && q.index == col) return coefficient(row, d);
        }
        return 0.0;
    }

    /// Direct band write; used by assembly and by fault-injection checks.
    void set(std::size_t p, Band b, double value) noexcept {
        bands_[static_cast<std::size_t>(b)][p] = value;
    }

    double max_abs_entry() const noexcept {
        double m = 0.0;
        for (const auto& b : bands_)
            for (double x : b) m = std::max(m, std::abs(x));
        return m;
    }

    friend bool operator==(const StencilOperator&, const StencilOperator&) = default;

private:
    GridSpec grid_{};
    std::array<std::vector<double>, 5> bands_;
};

namespace detail {
constexpr StencilOperator::Band band_of(Direction d) noexcept {
    return static_cast<StencilOperator::Band>(static_cast<std::uint8_t>(d));
}
}  // namespace detail

/// Builds A(u) from edge diffusivities and edge drift. Neighbor coefficient for edge D:
///   g_D / h * (1/h - d_D / 2)   ( = (g_p+g_q)/2h^2 * (1 - (v_q-v_p)/(v_q+v_p)) )
/// and the matching diagonal contribution g_D / h * (-1/h - d_D / 2).
inline StencilOperator assemble(const DiffusivityField& g, const DriftField& drift,
                                const GridSpec& grid) {
    require_same_grid(g.grid(), grid, "assemble diffusivity");
    require_same_grid(drift.grid(), grid, "assemble drift");
    StencilOperator op(grid);
    const double inv_h = 1.0 / grid.h;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        double diag = 0.0;
        for (Direction d : kDirections) {
            const auto q = neighbor(grid, p, d);
            if (q.boundary) continue;
            const double gd = g.edge(p, d) * inv_h;
            const double half_drift = 0.5 * drift.component(p, d);
            op.set(p, detail::band_of(d), gd * (inv_h - half_drift));
            diag += gd * (-inv_h - half_drift);
        }
        op.set(p, StencilOperator::Band::Center, diag);
    }
    return op;
}

/// y = A x from the stored bands.
inline void apply(const StencilOperator& op, std::span<const double> x, std::span<double> y) {
    const GridSpec& g = op.grid();
    if (x.size() != g.size() || y.size() != g.size()) throw ArgumentError("apply size mismatch");
    const std::size_t rows = g.rows, cols = g.cols;
    const auto c = op.band(StencilOperator::Band::Center);
    const auto n = op.band(StencilOperator::Band::North);
    const auto s = op.band(StencilOperator::Band::South);
    const auto e = op.band(StencilOperator::Band::East);
    const auto w = op.band(StencilOperator::Band::West);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const std::size_t p = i * cols + j;
            double acc = c[p] * x[p];
            if (i + 1 < rows) acc += n[p] * x[p + cols];
            if (i > 0) acc += s[p] * x[p - cols];
            if (j + 1 < cols) acc += e[p] * x[p + 1];
            if (j > 0) acc += w[p] * x[p - 1];
            y[p] = acc;
        }
    }
}

inline Image apply(const StencilOperator& op, const Image& x) {
    require_same_grid(op.grid(), x.grid(), "apply operand");
    Image y(x.grid());
    apply(op, x.values(), y.values());
    return y;
}

/// Largest tau keeping I + tau A non-negative: 1 / max |a_ii|.
inline double explicit_stability_bound(const StencilOperator& op) {
    double m = 0.0;
    for (double c : op.band(StencilOperator::Band::Center)) m = std::max(m, std::abs(c));
    return m > 0.0 ? 1.0 / m : std::numeric_limits<double>::infinity();
}

/// Column sum of A at column `col`.
inline double column_sum(const StencilOperator& op, std::size_t col) {
    const GridSpec& g = op.grid();
    double sum = op.center(col);
    for (Direction d : kDirections) {
        const auto q = neighbor(g, col, d);
        if (!q.boundary) sum += op.coefficient(q.index, opposite(d));
    }
    return sum;
}

struct StructureReport {
    bool nonnegative_offdiagonal = true;
    bool zero_column_sums = true;
    bool negative_diagonal = true;
    bool irreducible = true;

    double worst_offdiagonal = 0.0;  // most negative off-diagonal seen (0 if none)
    std::size_t worst_offdiagonal_row = 0;
    std::size_t worst_offdiagonal_col = 0;
    double worst_column_sum = 0.0;  // largest |column sum|
    std::size_t worst_column = 0;
    double max_diagonal = 0.0;  // largest (least negative) diagonal entry
    std::size_t max_diagonal_row = 0;
    double scale = 0.0;  // max |a_ij|
    double column_tolerance = 0.0;

    bool ok() const noexcept {
        return nonnegative_offdiagonal && zero_column_sums && negative_diagonal && irreducible;
    }
};

/// Numerical check of non-negative off-diagonals and zero column sums, plus the structural
/// irreducibility certificate: every grid adjacency carries a strictly positive entry.
inline StructureReport verify_structure(const StencilOperator& op, double column_rel_tol = 1e-12) {
    const GridSpec& g = op.grid();
    StructureReport r;
    r.scale = op.max_abs_entry();
    r.column_tolerance = column_rel_tol * r.scale;
    r.max_diagonal = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < g.size(); ++p) {
        for (Direction d : kDirections) {
            const auto q = neighbor(g, p, d);
            if (q.boundary) continue;
            const double a = op.coefficient(p, d);
            if (a < r.worst_offdiagonal) {
                r.worst_offdiagonal = a;
                r.worst_offdiagonal_row = p;
                r.worst_offdiagonal_col = q.index;
            }
            if (!(a > 0.0)) r.irreducible = false;
        }
        const double cs = std::abs(column_sum(op, p));
        if (cs > r.worst_column_sum || std::isnan(cs)) {
            r.worst_column_sum = cs;
            r.worst_column = p;
        }
        if (op.center(p) > r.max_diagonal) {
            r.max_diagonal = op.center(p);
            r.max_diagonal_row = p;
        }
    }
    r.nonnegative_offdiagonal = r.worst_offdiagonal >= 0.0;
    r.zero_column_sums = r.worst_column_sum <= r.column_tolerance;
    r.negative_diagonal = r.max_diagonal < 0.0;
    return r;
}

/// Coordinate-format text export: one "row col value" line per stored nonzero.
inline void export_coo(std::ostream& os, const StencilOperator& op) {
    const GridSpec& g = op.grid();
    os.precision(17);
    for (std::size_t p = 0; p < g.size(); ++p) {
        os << p << ' ' << p << ' ' << op.center(p) << '\n';
        for (Direction d : kDirections) {
            const auto q = neighbor(g, p, d);
            if (!q.boundary) os << p << ' ' << q.index << ' ' << op.coefficient(p, d) << '\n';
        }
    }
}

}  // namespace osmosis
