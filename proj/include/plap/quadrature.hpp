#pragma once

#include <span>

#include "plap/exec.hpp"
#include "plap/grid.hpp"

namespace plap {

enum class QuadratureRule { midpoint, trapezoid };

struct QuadratureResult {
    double value = 0.0;
    /// Set when every node was masked; value is then 0.
    bool all_masked = false;
};

/// Sum of w_i v_i over unmasked nodes. Midpoint weights are the cell volume at
/// every node; trapezoid weights halve per axis on which the node lies on the
/// box boundary. Masked nodes are omitted without renormalizing the measure.
/// An empty mask means no node is masked.
QuadratureResult integrate(const GridDomain& domain, std::span<const double> values, const CellMask& mask,
                           QuadratureRule rule = QuadratureRule::trapezoid, Exec exec = Exec::parallel);

/// Quadrature weight of one node.
double node_weight(const GridDomain& domain, std::size_t node, QuadratureRule rule) noexcept;

} // namespace plap
