#pragma once

// Structured node grids over axis-aligned boxes and the fields sampled on them.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace plap {

using Point = std::array<double, 3>;
using Index3 = std::array<int, 3>;

/// Axis-aligned box in n <= 3 dimensions with uniform spacing per axis.
/// Nodes are stored row-major: the last axis varies fastest.
class GridDomain {
public:
    GridDomain() = default;
    GridDomain(int n, Point origin, Point extent, Index3 cells);

    /// Box [lo, hi]^n with the same cell count on every axis.
    static GridDomain cube(int n, double lo, double hi, int cells);

    [[nodiscard]] int dim() const noexcept { return n_; }
    [[nodiscard]] const Point& origin() const noexcept { return origin_; }
    [[nodiscard]] const Point& extent() const noexcept { return extent_; }
    [[nodiscard]] const Index3& cells() const noexcept { return cells_; }
    [[nodiscard]] int cells(int axis) const noexcept { return cells_[axis]; }
    [[nodiscard]] int nodes(int axis) const noexcept { return axis < n_ ? cells_[axis] + 1 : 1; }
    [[nodiscard]] double h(int axis) const noexcept { return h_[axis]; }
    [[nodiscard]] double max_h() const noexcept;
    [[nodiscard]] double min_h() const noexcept;
    /// Product of spacings over the active axes (the volume of one cell).
    [[nodiscard]] double cell_volume() const noexcept;
    [[nodiscard]] std::size_t node_count() const noexcept { return count_; }
    [[nodiscard]] std::size_t stride(int axis) const noexcept { return stride_[axis]; }

    [[nodiscard]] Index3 index(std::size_t flat) const noexcept;
    [[nodiscard]] std::size_t flat(const Index3& idx) const noexcept;
    [[nodiscard]] Point coord(std::size_t flat) const noexcept;
    [[nodiscard]] Point coord(const Index3& idx) const noexcept;
    /// Distance in nodes to the nearest face of the box.
    [[nodiscard]] int boundary_distance(const Index3& idx) const noexcept;
    [[nodiscard]] bool on_boundary(std::size_t flat) const noexcept { return boundary_distance(index(flat)) == 0; }

    friend bool operator==(const GridDomain& a, const GridDomain& b) noexcept;

private:
    int n_ = 0;
    Point origin_{};
    Point extent_{};
    Index3 cells_{};
    Point h_{};
    std::array<std::size_t, 3> stride_{};
    std::size_t count_ = 0;
};

class ScalarField {
public:
    ScalarField() = default;
    ScalarField(GridDomain domain, std::vector<double> values);
    /// Constant field.
    ScalarField(GridDomain domain, double value);

    static ScalarField sample(const GridDomain& domain, const std::function<double(const Point&)>& fn);

    [[nodiscard]] const GridDomain& domain() const noexcept { return domain_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

private:
    GridDomain domain_;
    std::vector<double> values_;
};

/// n components per node, interleaved: values[node * n + component].
class VectorField {
public:
    VectorField() = default;
    VectorField(GridDomain domain, std::vector<double> values);

    [[nodiscard]] const GridDomain& domain() const noexcept { return domain_; }
    [[nodiscard]] int components() const noexcept { return domain_.dim(); }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] double at(std::size_t node, int c) const noexcept
    {
        return values_[node * static_cast<std::size_t>(domain_.dim()) + static_cast<std::size_t>(c)];
    }
    [[nodiscard]] ScalarField component(int c) const;

private:
    GridDomain domain_;
    std::vector<double> values_;
};

enum class MaskSource : unsigned {
    degenerate_gradient = 1u << 0,
    degenerate_hessian = 1u << 1,
    boundary_margin = 1u << 2,
    user = 1u << 3,
};

/// Per-node exclusion flags; a flagged node is left out of quadrature.
class CellMask {
public:
    CellMask() = default;
    CellMask(std::size_t size, MaskSource source);
    CellMask(std::vector<std::uint8_t> flags, MaskSource source);

    [[nodiscard]] std::size_t size() const noexcept { return flags_.size(); }
    [[nodiscard]] bool operator[](std::size_t i) const noexcept { return flags_[i] != 0; }
    void set(std::size_t i, bool v = true) noexcept { flags_[i] = v ? 1 : 0; }
    [[nodiscard]] std::size_t count() const noexcept;
    [[nodiscard]] bool has_source(MaskSource s) const noexcept { return (sources_ & static_cast<unsigned>(s)) != 0; }
    [[nodiscard]] unsigned sources() const noexcept { return sources_; }
    [[nodiscard]] std::span<const std::uint8_t> flags() const noexcept { return flags_; }

    /// Union in place.
    CellMask& operator|=(const CellMask& other);

private:
    std::vector<std::uint8_t> flags_;
    unsigned sources_ = 0;
};

CellMask operator|(CellMask a, const CellMask& b);

/// Flags every node within `margin` nodes of the box boundary.
CellMask boundary_margin_mask(const GridDomain& domain, int margin);

/// Flags every node outside the shell r0 <= |x - center| <= radius (a ball when r0 = 0).
CellMask outside_ball_mask(const GridDomain& domain, const Point& center, double radius, double r0 = 0.0);

} // namespace plap
