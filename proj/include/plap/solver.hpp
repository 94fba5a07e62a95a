#pragma once

// Regularized p-Laplace Dirichlet problem
//   -div((eps + |grad u|^2)^{(p-2)/2} grad u) = f  in the box,  u = g on its boundary,
// solved by damped frozen-coefficient (Picard) iteration with warm-started
// eps-continuation.

#include <utility>
#include <vector>

#include <json.hpp>

#include "plap/exec.hpp"
#include "plap/grid.hpp"
#include "plap/linear.hpp"

namespace plap {

struct ProblemSpec {
    double p = 2.0;
    double epsilon = 0.0;
    ScalarField f;
    /// Boundary trace; only boundary nodes are read.
    ScalarField g;

    [[nodiscard]] const GridDomain& domain() const noexcept { return f.domain(); }
    /// p > 1, eps in [0, 1), f and g on the same grid.
    void validate() const;
};

struct CoefficientField {
    ScalarField a;
    /// Nodes where the coefficient is infinite (eps = 0, grad u = 0, p < 2); a holds 0 there.
    CellMask singular;
};

/// a = (eps + |grad u|^2)^{(p-2)/2} at every node, grad u by central differences
/// (second-order one-sided differences on boundary nodes).
CoefficientField coefficient(const ScalarField& u, double p, double epsilon, Exec exec = Exec::parallel);

/// Per-node scaled residual (div_h(a grad u) + f) * cell volume; zero on the boundary.
/// Nodes next to an infinite coefficient carry NaN.
std::vector<double> residual_field(const ScalarField& u, const ProblemSpec& spec, Exec exec = Exec::parallel);

/// Max over interior nodes of |residual_field| (non-finite nodes skipped).
double residual(const ScalarField& u, const ProblemSpec& spec, Exec exec = Exec::parallel);

/// Discrete energy (1/p) int (eps + |grad u|^2)^{p/2} - int f u (trapezoid, gradients as in coefficient).
double energy(const ScalarField& u, const ProblemSpec& spec, Exec exec = Exec::parallel);

struct SolverOptions {
    double tol = 1e-8;
    int max_iter = 200;
    double damping = 0.7;
    /// Set by continuation; cold solves below kMinColdEpsilon are refused.
    bool warm_start = false;
    linear::Preconditioner preconditioner = linear::Preconditioner::multigrid;
    Exec exec = Exec::parallel;
};

inline constexpr double kMinColdEpsilon = 1e-4;

struct SolveReport {
    int iterations = 0;
    std::vector<double> residual_history;  // entry 0 is the initial guess
    std::vector<int> linear_solve_iterations;
    bool converged = false;
    std::vector<double> epsilon_schedule;
    std::vector<double> energy_history;
    /// Energy non-increasing along the iterates (relative slack 1e-12).
    bool energy_monotone = true;
};

nlohmann::json to_json(const SolveReport& r);

/// u0 with its boundary nodes replaced by the trace g.
ScalarField with_boundary(const ScalarField& u0, const ScalarField& g);

std::pair<ScalarField, SolveReport> picard_solve(const ProblemSpec& spec, const ScalarField& u0,
                                                 const SolverOptions& opts = {});

struct ContinuationResult {
    std::vector<ScalarField> solutions;  // one per schedule entry
    std::vector<SolveReport> per_epsilon;
    SolveReport report;                  // concatenated histories
};

/// Solves at schedule[0] from u0 and warm-starts every later eps from the
/// previous solution. The schedule must be strictly decreasing and positive.
/// opts.warm_start marks u0 itself as a converged solution at a larger eps.
ContinuationResult continuation_solve(const ProblemSpec& spec, const std::vector<double>& schedule,
                                      const ScalarField& u0, const SolverOptions& opts = {});

} // namespace plap
