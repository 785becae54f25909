#pragma once

#include "osmosis/grid.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <ostream>
#include <vector>

namespace osmosis {

/// Edge-located drift. For each pixel p and direction D the stored component is
///   d_D(p) = 2 (v_q - v_p) / (h (v_q + v_p)),  q the D-neighbor of p,
/// so the value stored on one side of an edge is the exact negation of the other side.
/// Suppressed and boundary edges carry 0 and are flagged inactive.
class DriftField {
public:
    DriftField() = default;
    explicit DriftField(GridSpec grid) : grid_(grid), pixel_active_(grid.size(), 1) {
        for (auto& c : comp_) c.assign(grid.size(), 0.0);
        for (auto& a : active_) a.assign(grid.size(), 0);
    }

    const GridSpec& grid() const noexcept { return grid_; }

    double component(std::size_t p, Direction d) const noexcept {
        return comp_[static_cast<std::size_t>(d)][p];
    }
    bool edge_active(std::size_t p, Direction d) const noexcept {
        return active_[static_cast<std::size_t>(d)][p] != 0;
    }
    /// Whether the transport term enters the local flux magnitude |grad u - d u| at pixel p.
    bool pixel_active(std::size_t p) const noexcept { return pixel_active_[p] != 0; }

    std::span<const double> north() const noexcept { return comp_[0]; }
    std::span<const double> south() const noexcept { return comp_[1]; }
    std::span<const double> east() const noexcept { return comp_[2]; }
    std::span<const double> west() const noexcept { return comp_[3]; }

    std::size_t active_edge_count() const noexcept {
        std::size_t n = 0;
        for (const auto& a : active_)
            for (auto x : a) n += x;
        return n / 2;
    }

    /// Zeroes the edge (p, d) on both sides.
    void suppress_edge(std::size_t p, Direction d) noexcept {
        const auto q = neighbor(grid_, p, d);
        set(p, d, 0.0, false);
        if (!q.boundary) set(q.index, opposite(d), 0.0, false);
    }
    void set_pixel_active(std::size_t p, bool on) noexcept { pixel_active_[p] = on ? 1 : 0; }

    void set(std::size_t p, Direction d, double value, bool active) noexcept {
        comp_[static_cast<std::size_t>(d)][p] = value;
        active_[static_cast<std::size_t>(d)][p] = active ? 1 : 0;
    }

    friend bool operator==(const DriftField&, const DriftField&) = default;

private:
    GridSpec grid_{};
    std::array<std::vector<double>, 4> comp_;
    std::array<std::vector<std::uint8_t>, 4> active_;
    std::vector<std::uint8_t> pixel_active_;
};

/// Discrete d = grad log v on edges.
inline DriftField canonical_drift(const Image& v) {
    require_positive(v, "reference image v");
    const GridSpec& g = v.grid();
    DriftField field(g);
    for (std::size_t p = 0; p < g.size(); ++p) {
        for (Direction d : kDirections) {
            const auto q = neighbor(g, p, d);
            if (q.boundary) {
                field.set(p, d, 0.0, false);
                continue;
            }
            const double vp = v[p];
            const double vq = v[q.index];
            field.set(p, d, 2.0 * (vq - vp) / (g.h * (vq + vp)), true);
        }
    }
    return field;
}

/// Canonical drift with every edge touching a masked pixel suppressed.
inline DriftField shadow_drift(const Image& v, const Mask& mask) {
    require_same_grid(v.grid(), mask.grid(), "shadow_drift mask vs reference");
    DriftField field = canonical_drift(v);
    const GridSpec& g = v.grid();
    for (std::size_t p = 0; p < g.size(); ++p) {
        if (!mask[p]) continue;
        field.set_pixel_active(p, false);
        for (Direction d : kDirections) field.suppress_edge(p, d);
    }
    return field;
}

/// Canonical drift kept only on edges whose two endpoints are both masked.
inline DriftField cdr_drift(const Image& v, const Mask& edge_mask) {
    require_same_grid(v.grid(), edge_mask.grid(), "cdr_drift mask vs reference");
    DriftField field = canonical_drift(v);
    const GridSpec& g = v.grid();
    for (std::size_t p = 0; p < g.size(); ++p) {
        field.set_pixel_active(p, edge_mask[p]);
        for (Direction d : kDirections) {
            const auto q = neighbor(g, p, d);
            if (q.boundary) continue;
            if (!(edge_mask[p] && edge_mask[q.index])) field.set(p, d, 0.0, false);
        }
    }
    return field;
}

namespace detail {

inline void write_le_u64(std::ostream& os, std::uint64_t x) {
    unsigned char buf[8];
    for (int k = 0; k < 8; ++k) buf[k] = static_cast<unsigned char>((x >> (8 * k)) & 0xffu);
    os.write(reinterpret_cast<const char*>(buf), 8);
}

inline void write_le_f64(std::ostream& os, double x) {
    write_le_u64(os, std::bit_cast<std::uint64_t>(x));
}

}  // namespace detail

/// Binary dump: header {rows, cols} as little-endian u64, then the N, S, E, W grids as
/// little-endian f64 in row-major order.
inline void dump_drift(std::ostream& os, const DriftField& field) {
    detail::write_le_u64(os, field.grid().rows);
    detail::write_le_u64(os, field.grid().cols);
    for (auto comp : {field.north(), field.south(), field.east(), field.west()})
        for (double x : comp) detail::write_le_f64(os, x);
}

}  // namespace osmosis
