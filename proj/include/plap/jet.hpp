#pragma once

// Finite-difference jets (gradient, Hessian, third-derivative tensor) on a
// structured grid.
//
// Stencils, per index pattern:
//   grad_a       D0_a u                       (reach 1)
//   hess_aa      D+_a D-_a u                  (reach 1)
//   hess_ab      D0_a D0_b u                  (reach 1)
//   third_aaa    D0_a hess_aa                 (reach 2)
//   third_aab    D0_b hess_aa                 (reach 1 per axis)
//   third_abc    D0_c hess_ab                 (reach 1 per axis)
// The Hessian and third tensors are filled for one canonical index ordering
// and copied to every permutation, so both are exactly symmetric.

#include <cstddef>
#include <vector>

#include "plap/exec.hpp"
#include "plap/grid.hpp"

namespace plap {

struct JetField {
    GridDomain domain;
    int order = 0;
    /// Nodes closer than this to the boundary hold copies of the nearest interior value.
    int interior_margin = 0;

    std::vector<double> grad;   // node * n + a
    std::vector<double> hess;   // node * n^2 + a * n + b
    std::vector<double> third;  // node * n^3 + (a * n + b) * n + c
    std::vector<double> grad_norm;
    std::vector<double> hess_norm;   // Frobenius
    std::vector<double> third_norm;  // Frobenius over all n^3 entries
    CellMask boundary;

    [[nodiscard]] int dim() const noexcept { return domain.dim(); }
    [[nodiscard]] std::size_t node_count() const noexcept { return domain.node_count(); }
    [[nodiscard]] double g(std::size_t i, int a) const noexcept { return grad[i * dim() + a]; }
    [[nodiscard]] double H(std::size_t i, int a, int b) const noexcept
    {
        const auto n = static_cast<std::size_t>(dim());
        return hess[i * n * n + static_cast<std::size_t>(a) * n + static_cast<std::size_t>(b)];
    }
    [[nodiscard]] double T(std::size_t i, int a, int b, int c) const noexcept
    {
        const auto n = static_cast<std::size_t>(dim());
        return third[i * n * n * n + (static_cast<std::size_t>(a) * n + static_cast<std::size_t>(b)) * n +
                     static_cast<std::size_t>(c)];
    }
};

/// Jet up to `order` (1, 2 or 3). Requires cells >= 2 * order on every axis.
JetField jet(const ScalarField& u, int order, Exec exec = Exec::parallel);

enum class DegenerateKind { gradient, hessian };

/// Flags nodes whose gradient (or Hessian) norm is below delta.
CellMask degenerate_mask(const JetField& jet, DegenerateKind which, double delta);

/// max(h^2, 1e-10) times the median gradient norm over non-margin nodes
/// (times 1 when that median is zero). Shrinks under refinement.
double default_degenerate_delta(const JetField& jet);

} // namespace plap
