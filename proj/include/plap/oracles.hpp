#pragma once

// Reference solutions and oracles that never touch the finite-difference
// stencils: the radial power family, a 1-D radial quadrature for every
// functional on that family, the manufactured Poisson pair, and the
// Calderon-Zygmund constant (known value at q = 2, lower-bound estimation
// otherwise).

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "plap/functional_spec.hpp"
#include "plap/grid.hpp"

namespace plap::oracles {

/// u(x) = scale |x|^m with m = p/(p-1); the p-Laplace source is the constant
/// f = -sign(scale) n (|scale| m)^{p-1}.
struct RadialSolution {
    double p = 2.0;
    int n = 2;
    double m = 2.0;
    double scale = 1.0;
    double f_value = 0.0;
    int sign = 1;

    [[nodiscard]] double u(const Point& x) const;
    [[nodiscard]] std::array<double, 3> grad(const Point& x) const;
    /// Row-major n x n block inside a 3 x 3 array.
    [[nodiscard]] std::array<double, 9> hess(const Point& x) const;
    /// Entry (a,b,c) at (a*3 + b)*3 + c.
    [[nodiscard]] std::array<double, 27> third(const Point& x) const;

    // radial profiles of the pointwise norms
    [[nodiscard]] double grad_norm(double r) const;
    [[nodiscard]] double hess_norm(double r) const;
    [[nodiscard]] double third_norm(double r) const;

    [[nodiscard]] ScalarField sample_u(const GridDomain& d) const;
    [[nodiscard]] ScalarField sample_f(const GridDomain& d) const;
};

RadialSolution radial_solution(double p, int n, double scale = 1.0);

/// Leading power r^sigma of a functional's integrand near the origin.
struct RadialExponent {
    double sigma = 0.0;
    /// The integrand vanishes identically near the origin (always finite).
    bool vanishes = false;
};

RadialExponent leading_exponent(const FunctionalSpec& spec, const RadialSolution& sol);

/// Predicts divergence over a ball around the origin: sigma <= -n with a non-vanishing integrand.
bool predicts_divergence(const FunctionalSpec& spec, const RadialSolution& sol);

/// Integral of the exact integrand over the shell r0 <= |x| <= R, by adaptive
/// 1-D quadrature in r (and angular quadrature where the integrand is not
/// rotation invariant). Returns nullopt ("divergent") when r0 = 0 and the
/// exponent test predicts divergence. linearized_residual is not supported.
/// For stress_seminorm the parameter "variant" selects 0 = |D V|^alpha_tilde,
/// 1 = the summed Hessian-entry integrand.
std::optional<double> radial_functional_exact(const FunctionalSpec& spec, const RadialSolution& sol, double r0,
                                              double R);

struct Manufactured {
    ScalarField u;
    ScalarField f;
};

/// u = prod sin(pi x_a), f = n pi^2 u: -Laplace u = f with zero trace on [0,1]^n.
Manufactured manufactured_poisson(const GridDomain& d);

enum class CzKind { known, lower_bound };

struct CzEstimate {
    double value = 0.0;
    CzKind kind = CzKind::known;
    std::uint64_t seed = 0;
    int family_size = 0;
    int cells = 0;
    std::string family;
};

/// Known mode: exactly 1 at q = 2; throws DomainError for any other q.
CzEstimate cz_constant_known(int n, double q);

/// Lower bound: max over a seeded pseudo-random family of compactly supported
/// C^2 functions on [0,1]^n of ||D^2 w||_q / ||Laplace w||_q (Frobenius norm,
/// finite-difference jets, midpoint rule).
CzEstimate cz_constant_estimate(int n, double q, int cells, int family_size, std::uint64_t seed);

/// Discrete ratio ||D^2 w||_q / ||Laplace w||_q over unmasked nodes (midpoint weights).
double cz_ratio(const ScalarField& w, double q, const CellMask& exclude);

/// Every ratio of the estimate family, in generation order (for inspection and tests).
std::vector<double> cz_family_ratios(int n, double q, int cells, int family_size, std::uint64_t seed);

} // namespace plap::oracles
