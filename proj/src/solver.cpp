#include "plap/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "plap/error.hpp"
#include "plap/quadrature.hpp"

namespace plap {

void ProblemSpec::validate() const
{
    PLAP_REQUIRE(p > 1.0, "p must exceed 1");
    PLAP_REQUIRE(epsilon >= 0.0 && epsilon < 1.0, "epsilon must lie in [0, 1)");
    PLAP_REQUIRE(f.domain() == g.domain(), "source and boundary trace live on different grids");
}

namespace {

// Squared gradient norm per node: central differences inside, second-order
// one-sided differences on boundary nodes.
std::vector<double> gradient_norm2(const ScalarField& u, Exec exec)
{
    const GridDomain& d = u.domain();
    std::vector<double> g2(u.size());
    for_each_node(u.size(), exec, [&](std::size_t i) {
        const Index3 idx = d.index(i);
        double s = 0.0;
        for (int a = 0; a < d.dim(); ++a) {
            const std::size_t st = d.stride(a);
            const double h2 = 2.0 * d.h(a);
            double g;
            if (idx[a] == 0)
                g = (-3.0 * u[i] + 4.0 * u[i + st] - u[i + 2 * st]) / h2;
            else if (idx[a] == d.cells(a))
                g = (3.0 * u[i] - 4.0 * u[i - st] + u[i - 2 * st]) / h2;
            else
                g = (u[i + st] - u[i - st]) / h2;
            s += g * g;
        }
        g2[i] = s;
    });
    return g2;
}

} // namespace

CoefficientField coefficient(const ScalarField& u, double p, double epsilon, Exec exec)
{
    PLAP_REQUIRE(p > 1.0, "p must exceed 1");
    PLAP_REQUIRE(epsilon >= 0.0, "epsilon must be nonnegative");
    const GridDomain& d = u.domain();
    for (int a = 0; a < d.dim(); ++a) PLAP_REQUIRE(d.cells(a) >= 2, "the coefficient needs at least 2 cells per axis");
    const auto g2 = gradient_norm2(u, exec);
    const std::size_t N = u.size();
    std::vector<double> a(N);
    CellMask singular(N, MaskSource::degenerate_gradient);
    const double e = 0.5 * (p - 2.0);
    for (std::size_t i = 0; i < N; ++i) {
        const double base = epsilon + g2[i];
        const double v = std::pow(base, e);
        if (std::isfinite(v)) {
            a[i] = v;
        } else {
            a[i] = 0.0;
            singular.set(i);
        }
    }
    return {ScalarField(u.domain(), std::move(a)), std::move(singular)};
}

namespace {

linear::FaceOperator frozen_operator(const ScalarField& u, double p, double epsilon, Exec exec)
{
    auto c = coefficient(u, p, epsilon, exec);
    if (c.singular.count() == 0) return linear::FaceOperator::from_node_coefficients(u.domain(), c.a.values());
    std::vector<double> a(c.a.values().begin(), c.a.values().end());
    for (std::size_t i = 0; i < a.size(); ++i)
        if (c.singular[i]) a[i] = std::numeric_limits<double>::infinity();
    return linear::FaceOperator::from_node_coefficients(u.domain(), a);
}

std::vector<double> scaled_source(const ProblemSpec& spec)
{
    const GridDomain& d = spec.domain();
    const double vol = d.cell_volume();
    std::vector<double> b(d.node_count(), 0.0);
    for (std::size_t i = 0; i < b.size(); ++i)
        if (!d.on_boundary(i)) b[i] = vol * spec.f[i];
    return b;
}

} // namespace

std::vector<double> residual_field(const ScalarField& u, const ProblemSpec& spec, Exec exec)
{
    spec.validate();
    PLAP_REQUIRE(u.domain() == spec.domain(), "field and problem live on different grids");
    const auto op = frozen_operator(u, spec.p, spec.epsilon, exec);
    std::vector<double> Au(u.size());
    op.apply(u.values(), Au, exec);
    std::vector<double> r = scaled_source(spec);
    for (std::size_t i : op.interior()) r[i] -= Au[i];
    return r;
}

double residual(const ScalarField& u, const ProblemSpec& spec, Exec exec)
{
    const auto r = residual_field(u, spec, exec);
    double m = 0.0;
    for (double v : r)
        if (std::isfinite(v)) m = std::max(m, std::abs(v));
    return m;
}

double energy(const ScalarField& u, const ProblemSpec& spec, Exec exec)
{
    const auto g2 = gradient_norm2(u, exec);
    std::vector<double> e(u.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        e[i] = std::pow(spec.epsilon + g2[i], 0.5 * spec.p) / spec.p - spec.f[i] * u[i];
    }
    return integrate(u.domain(), e, CellMask{}, QuadratureRule::trapezoid, exec).value;
}

ScalarField with_boundary(const ScalarField& u0, const ScalarField& g)
{
    PLAP_REQUIRE(u0.domain() == g.domain(), "initial guess and trace live on different grids");
    std::vector<double> v(u0.values().begin(), u0.values().end());
    const GridDomain& d = u0.domain();
    for (std::size_t i = 0; i < v.size(); ++i)
        if (d.on_boundary(i)) v[i] = g[i];
    return ScalarField(d, std::move(v));
}

nlohmann::json to_json(const SolveReport& r)
{
    return {{"iterations", r.iterations},
            {"residual_history", r.residual_history},
            {"linear_solve_iterations", r.linear_solve_iterations},
            {"converged", r.converged},
            {"epsilon_schedule", r.epsilon_schedule},
            {"energy_history", r.energy_history},
            {"energy_monotone", r.energy_monotone}};
}

std::pair<ScalarField, SolveReport> picard_solve(const ProblemSpec& spec, const ScalarField& u0,
                                                 const SolverOptions& opts)
{
    spec.validate();
    PLAP_REQUIRE(spec.epsilon > 0.0, "the solver needs epsilon > 0");
    if (spec.epsilon < kMinColdEpsilon && !opts.warm_start) {
        std::ostringstream os;
        os << "cold solve at epsilon = " << spec.epsilon << " refused; start continuation_solve at epsilon >= "
           << kMinColdEpsilon;
        throw DomainError(os.str());
    }
    PLAP_REQUIRE(opts.damping > 0.0 && opts.damping <= 1.0, "damping must lie in (0, 1]");
    PLAP_REQUIRE(opts.tol > 0.0, "tolerance must be positive");
    PLAP_REQUIRE(u0.domain() == spec.domain(), "initial guess lives on a different grid");

    const GridDomain& d = spec.domain();
    const Exec exec = opts.exec;
    const auto b = scaled_source(spec);
    const std::size_t N = d.node_count();

    ScalarField u = with_boundary(u0, spec.g);
    SolveReport rep;
    rep.epsilon_schedule = {spec.epsilon};
    double res = residual(u, spec, exec);
    rep.residual_history.push_back(res);
    rep.energy_history.push_back(energy(u, spec, exec));
    if (res <= opts.tol) {
        rep.converged = true;
        return {u, rep};
    }

    ScalarField best = u;
    double best_res = res;

    linear::CgOptions cg;
    cg.rtol = 0.01 * opts.tol;
    cg.preconditioner = opts.preconditioner;
    cg.exec = exec;

    for (int k = 1; k <= opts.max_iter; ++k) {
        const auto op = frozen_operator(u, spec.p, spec.epsilon, exec);
        std::vector<double> w(u.values().begin(), u.values().end());
        const auto lin = linear::pcg(op, b, w, cg);
        rep.linear_solve_iterations.push_back(lin.iterations);
        for (double v : w)
            if (!std::isfinite(v)) {
                std::ostringstream os;
                os << "non-finite value in the linear solve at Picard iteration " << k;
                throw SolverError(os.str());
            }

        ScalarField trial(d, w);
        const double res_w = residual(trial, spec, exec);
        if (res_w <= opts.tol) {
            // the undamped update already meets the tolerance
            u = std::move(trial);
            res = res_w;
        } else {
            std::vector<double> next(N);
            for (std::size_t i = 0; i < N; ++i) next[i] = (1.0 - opts.damping) * u[i] + opts.damping * w[i];
            u = ScalarField(d, std::move(next));
            res = residual(u, spec, exec);
        }
        if (!std::isfinite(res)) {
            std::ostringstream os;
            os << "non-finite residual at Picard iteration " << k;
            throw SolverError(os.str());
        }
        rep.iterations = k;
        rep.residual_history.push_back(res);
        const double e = energy(u, spec, exec);
        const double prev = rep.energy_history.back();
        if (e > prev + 1e-12 * std::max(1.0, std::abs(prev))) rep.energy_monotone = false;
        rep.energy_history.push_back(e);
        if (res < best_res) {
            best_res = res;
            best = u;
        }
        if (res <= opts.tol) {
            rep.converged = true;
            return {u, rep};
        }
    }
    return {best, rep};
}

ContinuationResult continuation_solve(const ProblemSpec& spec, const std::vector<double>& schedule,
                                      const ScalarField& u0, const SolverOptions& opts)
{
    PLAP_REQUIRE(!schedule.empty(), "epsilon schedule is empty");
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        PLAP_REQUIRE(schedule[k] > 0.0, "epsilon schedule entries must be positive");
        if (k > 0) PLAP_REQUIRE(schedule[k] < schedule[k - 1], "epsilon schedule must be strictly decreasing");
    }
    ContinuationResult out;
    out.report.converged = true;
    ScalarField start = u0;
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        ProblemSpec s = spec;
        s.epsilon = schedule[k];
        SolverOptions o = opts;
        o.warm_start = opts.warm_start || k > 0;
        auto [u, rep] = picard_solve(s, start, o);
        out.report.iterations += rep.iterations;
        out.report.residual_history.insert(out.report.residual_history.end(), rep.residual_history.begin(),
                                           rep.residual_history.end());
        out.report.linear_solve_iterations.insert(out.report.linear_solve_iterations.end(),
                                                  rep.linear_solve_iterations.begin(),
                                                  rep.linear_solve_iterations.end());
        out.report.energy_history.insert(out.report.energy_history.end(), rep.energy_history.begin(),
                                         rep.energy_history.end());
        out.report.energy_monotone = out.report.energy_monotone && rep.energy_monotone;
        out.report.converged = out.report.converged && rep.converged;
        out.report.epsilon_schedule.push_back(schedule[k]);
        out.per_epsilon.push_back(rep);
        out.solutions.push_back(u);
        start = std::move(u);
    }
    return out;
}

} // namespace plap
