#include "plap/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "plap/error.hpp"

namespace plap {

GridDomain::GridDomain(int n, Point origin, Point extent, Index3 cells)
    : n_(n), origin_(origin), extent_(extent), cells_(cells)
{
    PLAP_REQUIRE(n >= 1 && n <= 3, "grid dimension must be 1, 2 or 3");
    count_ = 1;
    for (int a = 0; a < 3; ++a) {
        if (a < n) {
            if (cells_[a] < 4) {
                std::ostringstream os;
                os << "grid needs at least 4 cells per axis (axis " << a << " has " << cells_[a] << ")";
                throw DomainError(os.str());
            }
            PLAP_REQUIRE(extent_[a] > 0.0 && std::isfinite(extent_[a]), "grid extent must be positive");
            h_[a] = extent_[a] / cells_[a];
            count_ *= static_cast<std::size_t>(cells_[a] + 1);
        } else {
            origin_[a] = 0.0;
            extent_[a] = 0.0;
            cells_[a] = 0;
            h_[a] = 0.0;
        }
    }
    std::size_t s = 1;
    for (int a = 2; a >= 0; --a) {
        stride_[a] = s;
        s *= static_cast<std::size_t>(nodes(a));
    }
}

GridDomain GridDomain::cube(int n, double lo, double hi, int cells)
{
    return GridDomain(n, {lo, lo, lo}, {hi - lo, hi - lo, hi - lo}, {cells, cells, cells});
}

double GridDomain::max_h() const noexcept
{
    double m = 0.0;
    for (int a = 0; a < n_; ++a) m = std::max(m, h_[a]);
    return m;
}

double GridDomain::min_h() const noexcept
{
    double m = h_[0];
    for (int a = 1; a < n_; ++a) m = std::min(m, h_[a]);
    return m;
}

double GridDomain::cell_volume() const noexcept
{
    double v = 1.0;
    for (int a = 0; a < n_; ++a) v *= h_[a];
    return v;
}

Index3 GridDomain::index(std::size_t flat) const noexcept
{
    Index3 idx{0, 0, 0};
    for (int a = 0; a < n_; ++a) {
        idx[a] = static_cast<int>(flat / stride_[a]);
        flat -= static_cast<std::size_t>(idx[a]) * stride_[a];
    }
    return idx;
}

std::size_t GridDomain::flat(const Index3& idx) const noexcept
{
    std::size_t f = 0;
    for (int a = 0; a < n_; ++a) f += static_cast<std::size_t>(idx[a]) * stride_[a];
    return f;
}

Point GridDomain::coord(const Index3& idx) const noexcept
{
    Point x{0.0, 0.0, 0.0};
    for (int a = 0; a < n_; ++a) x[a] = origin_[a] + idx[a] * h_[a];
    return x;
}

Point GridDomain::coord(std::size_t flat) const noexcept { return coord(index(flat)); }

int GridDomain::boundary_distance(const Index3& idx) const noexcept
{
    int d = cells_[0];
    for (int a = 0; a < n_; ++a) d = std::min({d, idx[a], cells_[a] - idx[a]});
    return d;
}

bool operator==(const GridDomain& a, const GridDomain& b) noexcept
{
    return a.n_ == b.n_ && a.origin_ == b.origin_ && a.extent_ == b.extent_ && a.cells_ == b.cells_;
}

ScalarField::ScalarField(GridDomain domain, std::vector<double> values)
    : domain_(std::move(domain)), values_(std::move(values))
{
    PLAP_REQUIRE(values_.size() == domain_.node_count(), "field value count does not match node count");
    for (double v : values_) PLAP_REQUIRE(std::isfinite(v), "field values must be finite");
}

ScalarField::ScalarField(GridDomain domain, double value)
    : domain_(std::move(domain)), values_(domain_.node_count(), value)
{
    PLAP_REQUIRE(std::isfinite(value), "field values must be finite");
}

ScalarField ScalarField::sample(const GridDomain& domain, const std::function<double(const Point&)>& fn)
{
    std::vector<double> v(domain.node_count());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(domain.coord(i));
    return ScalarField(domain, std::move(v));
}

VectorField::VectorField(GridDomain domain, std::vector<double> values)
    : domain_(std::move(domain)), values_(std::move(values))
{
    PLAP_REQUIRE(values_.size() == domain_.node_count() * static_cast<std::size_t>(domain_.dim()),
                 "vector field size does not match node count");
}

ScalarField VectorField::component(int c) const
{
    std::vector<double> v(domain_.node_count());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = at(i, c);
    return ScalarField(domain_, std::move(v));
}

CellMask::CellMask(std::size_t size, MaskSource source)
    : flags_(size, 0), sources_(static_cast<unsigned>(source))
{
}

CellMask::CellMask(std::vector<std::uint8_t> flags, MaskSource source)
    : flags_(std::move(flags)), sources_(static_cast<unsigned>(source))
{
}

std::size_t CellMask::count() const noexcept
{
    return static_cast<std::size_t>(std::count_if(flags_.begin(), flags_.end(), [](auto f) { return f != 0; }));
}

CellMask& CellMask::operator|=(const CellMask& other)
{
    if (flags_.empty()) {
        *this = other;
        return *this;
    }
    PLAP_REQUIRE(other.size() == size(), "mask sizes differ");
    for (std::size_t i = 0; i < flags_.size(); ++i) flags_[i] = static_cast<std::uint8_t>(flags_[i] | other.flags_[i]);
    sources_ |= other.sources_;
    return *this;
}

CellMask operator|(CellMask a, const CellMask& b)
{
    a |= b;
    return a;
}

CellMask boundary_margin_mask(const GridDomain& domain, int margin)
{
    CellMask m(domain.node_count(), MaskSource::boundary_margin);
    for (std::size_t i = 0; i < m.size(); ++i)
        if (domain.boundary_distance(domain.index(i)) < margin) m.set(i);
    return m;
}

CellMask outside_ball_mask(const GridDomain& domain, const Point& center, double radius, double r0)
{
    CellMask m(domain.node_count(), MaskSource::user);
    for (std::size_t i = 0; i < m.size(); ++i) {
        const Point x = domain.coord(i);
        double r2 = 0.0;
        for (int a = 0; a < domain.dim(); ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
        const double r = std::sqrt(r2);
        if (r > radius || r < r0) m.set(i);
    }
    return m;
}

} // namespace plap
