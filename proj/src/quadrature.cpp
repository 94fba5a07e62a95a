#include "plap/quadrature.hpp"

#include <cmath>
#include <vector>

#include "plap/error.hpp"

namespace plap {

double node_weight(const GridDomain& d, std::size_t node, QuadratureRule rule) noexcept
{
    double w = d.cell_volume();
    if (rule == QuadratureRule::trapezoid) {
        const Index3 idx = d.index(node);
        for (int a = 0; a < d.dim(); ++a)
            if (idx[a] == 0 || idx[a] == d.cells(a)) w *= 0.5;
    }
    return w;
}

QuadratureResult integrate(const GridDomain& d, std::span<const double> values, const CellMask& mask,
                           QuadratureRule rule, Exec exec)
{
    PLAP_REQUIRE(values.size() == d.node_count(), "integrand size does not match node count");
    const bool masked = mask.size() != 0;
    PLAP_REQUIRE(!masked || mask.size() == d.node_count(), "mask size does not match node count");

    std::vector<double> terms(values.size(), 0.0);
    std::size_t live = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (masked && mask[i]) continue;
        PLAP_REQUIRE(std::isfinite(values[i]), "non-finite integrand at an unmasked node");
        terms[i] = node_weight(d, i, rule) * values[i];
        ++live;
    }
    QuadratureResult r;
    if (live == 0) {
        r.all_masked = true;
        return r;
    }
    r.value = block_sum(terms, exec);
    return r;
}

} // namespace plap
