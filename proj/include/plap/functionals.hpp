#pragma once

// Weighted integrals over finite-difference jets.
//
// Masking rules shared by every functional:
//   * window.mask flags nodes outside the region of integration;
//   * with epsilon = 0 and mask policy exclude_Zu (or stronger) the degenerate
//     set {|grad u| < delta} is excluded; with epsilon > 0 nothing is excluded
//     on degeneracy grounds;
//   * nodes whose integrand is not finite are excluded and counted.
// masked_fraction = (excluded nodes inside the window) / (nodes inside the window).
// Quadrature uses trapezoid weights; margin nodes of the jet carry copies of
// the nearest interior derivatives.

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "plap/exec.hpp"
#include "plap/functional_spec.hpp"
#include "plap/grid.hpp"

namespace plap {

struct WindowOptions {
    /// Flagged nodes lie outside the window. Empty means the whole box.
    CellMask mask;
    /// Degeneracy threshold for |grad u| (and |D^2 u|); 0 selects default_degenerate_delta.
    double delta = 0.0;
    Exec exec = Exec::parallel;
};

struct FunctionalValue {
    double value = 0.0;
    double masked_fraction = 0.0;
    double grid_h = 0.0;
    double epsilon = 0.0;
    std::vector<std::string> warnings;
};

nlohmann::json to_json(const FunctionalValue& v);

FunctionalValue hessian_energy(const ScalarField& u, double p, double beta, double epsilon,
                               const WindowOptions& window = {});

/// Warns (does not refuse) when p > 2 and q_dual >= (p-1)/(p-2).
FunctionalValue inverse_weight_f(const ScalarField& u, const ScalarField& f, double p, double q_dual, double epsilon,
                                 const WindowOptions& window = {});

/// |grad u|^{-(p-1) r}; the degenerate set is always excluded. Warns when r >= 1.
FunctionalValue gradient_inverse(const ScalarField& u, double p, double r, const WindowOptions& window = {});

/// |grad u|^{p-2+alpha} |D^2 u|^{gamma-1} |D^3 u|^2 (epsilon = 0) or its
/// (eps + |grad u|^2)-weighted form. gamma < 1 at epsilon = 0 requires
/// MaskPolicy::exclude_Zu_and_degenerate_hessian.
FunctionalValue third_order_functional(const ScalarField& u, double p, double alpha, double gamma, double epsilon,
                                       MaskPolicy policy = MaskPolicy::exclude_Zu, const WindowOptions& window = {});

/// (eps + |grad u|^2)^{(p-2)/2} grad u node-wise; 0 where grad u = 0 and epsilon = 0.
VectorField stress_field(const ScalarField& u, double p, double epsilon, Exec exec = Exec::parallel);

struct StressSeminorm {
    /// int |D V|^alpha_tilde with D V by central differences of the stress field.
    FunctionalValue direct;
    /// Same norm with D V assembled pointwise from the jet of u by the chain rule.
    FunctionalValue expansion;
    /// int (eps + |grad u|^2)^{alpha_tilde (p-2)/2} |D^2 u|^2 sum_kl |u_kl|^{alpha_tilde - 2}.
    FunctionalValue entry_sum;
    /// |direct - expansion| / |expansion|.
    double discrepancy = 0.0;
    bool cross_check_ok = true;
};

inline constexpr double kStressCrossCheckTolerance = 0.05;

StressSeminorm stress_sobolev_seminorm(const ScalarField& u, double p, double alpha_tilde, double epsilon,
                                       const WindowOptions& window = {});

/// h_eps(|grad u|) |grad u|^{k-2} grad u node-wise; 0 where grad u = 0.
VectorField power_vector_field(const ScalarField& u, double k, double epsilon, Exec exec = Exec::parallel);

/// L^{r_exp} norm to the power r_exp of |D V| (order 1) or |D^2 V| (order 2),
/// Frobenius over components. Pass p > 1 to get the k > (p-1)/2 warning.
FunctionalValue power_field_seminorm(const ScalarField& u, double k, double r_exp, int order, double epsilon,
                                     double p = 0.0, const WindowOptions& window = {});

struct LinearizedResidual {
    /// The six left-hand integrals in order, then the right-hand side int f_ij phi.
    std::array<double, 6> terms{};
    double rhs = 0.0;
    double value = 0.0;  // sum(terms) - rhs
    double masked_fraction = 0.0;
};

/// Second linearized equation in direction (i, j) tested against phi; the
/// degenerate set inside supp(phi) is excluded. phi must vanish within the
/// jet margin of the boundary.
LinearizedResidual linearized_residual(const ScalarField& u, const ScalarField& f, const ScalarField& phi, int i,
                                       int j, double p, const WindowOptions& window = {});

/// Smooth compactly supported bump (1 - |x - c|^2 / rho^2)^4_+ used as a default test function.
ScalarField bump_function(const GridDomain& domain, const Point& center, double radius);

/// Dispatch on spec.kind. f is needed by inverse_weight_f and linearized_residual.
/// stress_seminorm reports variant 0 = direct (default), 1 = entry_sum, 2 = expansion.
/// linearized_residual uses params i, j (default 0, 0) and a bump centred in
/// the box with radius a quarter of the shortest side.
FunctionalValue evaluate(const FunctionalSpec& spec, const ScalarField& u, const ScalarField* f,
                         const WindowOptions& window = {});

} // namespace plap
