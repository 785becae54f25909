#pragma once

#include "osmosis/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace osmosis {

/// Regular pixel grid. Pixels are flattened row-major: index = i * cols + j.
struct GridSpec {
    std::size_t rows = 0;
    std::size_t cols = 0;
    double h = 1.0;

    std::size_t size() const noexcept { return rows * cols; }
    std::size_t index(std::size_t i, std::size_t j) const noexcept { return i * cols + j; }
    std::size_t row_of(std::size_t p) const noexcept { return p / cols; }
    std::size_t col_of(std::size_t p) const noexcept { return p % cols; }

    void validate() const {
        if (rows < 2 || cols < 2)
            throw ArgumentError("grid must be at least 2x2, got " + std::to_string(rows) + "x" +
                                std::to_string(cols));
        if (!(h > 0.0) || !std::isfinite(h)) throw ArgumentError("grid spacing h must be positive");
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

inline GridSpec make_grid(std::size_t rows, std::size_t cols, double h = 1.0) {
    GridSpec g{rows, cols, h};
    g.validate();
    return g;
}

inline void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
    if (a.rows != b.rows || a.cols != b.cols || a.h != b.h)
        throw ArgumentError(std::string("grid mismatch: ") + what);
}

/// Stencil directions. North/South step along the row index (i+1 / i-1),
/// East/West along the column index (j+1 / j-1).
enum class Direction : std::uint8_t { North = 0, South = 1, East = 2, West = 3 };

inline constexpr std::array<Direction, 4> kDirections{Direction::North, Direction::South,
                                                      Direction::East, Direction::West};

constexpr Direction opposite(Direction d) noexcept {
    switch (d) {
        case Direction::North: return Direction::South;
        case Direction::South: return Direction::North;
        case Direction::East: return Direction::West;
        case Direction::West: return Direction::East;
    }
    return d;
}

struct Neighbor {
    std::size_t index;
    bool boundary;  // out-of-range neighbor mirrored back onto the pixel itself

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Adjacent pixel with homogeneous-Neumann mirroring: off-grid neighbors map to the pixel itself.
inline Neighbor neighbor(const GridSpec& grid, std::size_t pixel, Direction dir) {
    if (pixel >= grid.size())
        throw ArgumentError("pixel index " + std::to_string(pixel) + " out of range");
    const std::size_t i = grid.row_of(pixel);
    const std::size_t j = grid.col_of(pixel);
    switch (dir) {
        case Direction::North:
            return i + 1 < grid.rows ? Neighbor{pixel + grid.cols, false} : Neighbor{pixel, true};
        case Direction::South:
            return i > 0 ? Neighbor{pixel - grid.cols, false} : Neighbor{pixel, true};
        case Direction::East:
            return j + 1 < grid.cols ? Neighbor{pixel + 1, false} : Neighbor{pixel, true};
        case Direction::West:
            return j > 0 ? Neighbor{pixel - 1, false} : Neighbor{pixel, true};
    }
    return {pixel, true};
}

/// Scalar field on a grid, one value per pixel.
class Image {
public:
    Image() = default;
    explicit Image(GridSpec grid, double fill = 0.0) : grid_(grid), values_(grid.size(), fill) {
        grid_.validate();
    }
    Image(GridSpec grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        grid_.validate();
        if (values_.size() != grid_.size())
            throw ArgumentError("image value count does not match grid size");
    }

    const GridSpec& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }

    double operator[](std::size_t p) const noexcept { return values_[p]; }
    double& operator[](std::size_t p) noexcept { return values_[p]; }
    double at(std::size_t i, std::size_t j) const noexcept { return values_[grid_.index(i, j)]; }
    double& at(std::size_t i, std::size_t j) noexcept { return values_[grid_.index(i, j)]; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    const std::vector<double>& vector() const noexcept { return values_; }

    friend bool operator==(const Image&, const Image&) = default;

private:
    GridSpec grid_{};
    std::vector<double> values_;
};

/// Binary pixel mask; true marks the drift-suppression band (Omega_b).
class Mask {
public:
    Mask() = default;
    explicit Mask(GridSpec grid, bool fill = false)
        : grid_(grid), bits_(grid.size(), fill ? 1 : 0) {
        grid_.validate();
    }
    Mask(GridSpec grid, std::vector<std::uint8_t> bits) : grid_(grid), bits_(std::move(bits)) {
        grid_.validate();
        if (bits_.size() != grid_.size())
            throw ArgumentError("mask size does not match grid size");
        for (auto& b : bits_) b = b ? 1 : 0;
    }

    const GridSpec& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return bits_.size(); }

    bool operator[](std::size_t p) const noexcept { return bits_[p] != 0; }
    bool at(std::size_t i, std::size_t j) const noexcept { return bits_[grid_.index(i, j)] != 0; }
    void set(std::size_t p, bool value) noexcept { bits_[p] = value ? 1 : 0; }
    void set(std::size_t i, std::size_t j, bool value) noexcept { set(grid_.index(i, j), value); }

    std::size_t count() const noexcept {
        return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
    }
    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    friend bool operator==(const Mask&, const Mask&) = default;

private:
    GridSpec grid_{};
    std::vector<std::uint8_t> bits_;
};

struct PositiveResult {
    Image image;
    std::size_t lifted = 0;
};

/// Raises every value below `floor` to `floor`. Non-finite values are rejected.
inline PositiveResult validate_positive(const Image& img, double floor = 1.0 / 255.0) {
    if (!(floor > 0.0)) throw ArgumentError("positivity floor must be > 0");
    PositiveResult out{img, 0};
    for (std::size_t p = 0; p < img.size(); ++p) {
        const double x = img[p];
        if (!std::isfinite(x))
            throw DataError("non-finite value at pixel " + std::to_string(p));
        if (x < floor) {
            out.image[p] = floor;
            ++out.lifted;
        }
    }
    return out;
}

inline bool all_positive(const Image& img) {
    return std::all_of(img.values().begin(), img.values().end(),
                       [](double x) { return x > 0.0 && std::isfinite(x); });
}

inline void require_positive(const Image& img, const char* what) {
    if (!all_positive(img)) throw ArgumentError(std::string(what) + " must be strictly positive");
}

}  // namespace osmosis
