// Acceptance suite: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include "plap/exponents.hpp"
#include "plap/functionals.hpp"
#include "plap/jet.hpp"
#include "plap/lab/config.hpp"
#include "plap/lab/report.hpp"
#include "plap/lab/sweep.hpp"
#include "plap/oracles.hpp"
#include "plap/quadrature.hpp"
#include "plap/solver.hpp"

#ifndef PLAP_ACCEPTANCE_CONFIG
#error "PLAP_ACCEPTANCE_CONFIG must name configs/acceptance.cfg"
#endif

using namespace plap;
namespace ex = plap::exponents;
namespace orc = plap::oracles;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += "failed: " + what;
        }
    }
    void note(const std::string& s)
    {
        if (!detail.empty()) detail += "; ";
        detail += s;
    }
};

std::string fmt(const char* f, double a)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

std::string fmt(const char* f, double a, double b, double c)
{
    char buf[192];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

double spread(const std::vector<double>& v)
{
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi / *lo;
}

double interior_error(const ScalarField& u, const ScalarField& exact)
{
    double e = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (!u.domain().on_boundary(i)) e = std::max(e, std::abs(u[i] - exact[i]));
    return e;
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-12; }

// 1. exponent golden table
Outcome exponent_table()
{
    Outcome o;
    auto params = [](double p, double q, double gamma, bool sign) {
        ex::ExponentParams e;
        e.p = p;
        e.q = q;
        e.gamma = gamma;
        e.f_has_sign = sign;
        return e;
    };
    const auto c1 = ex::q_chain(4, 8, ex::Bracket::strict);
    o.require(c1.N == 1 && c1.chain == std::vector<double>{4, 6, 10}, "q_chain(4, 8, strict)");
    const auto c2 = ex::q_chain(4, 4, ex::Bracket::nonstrict);
    o.require(c2.N == 0 && c2.chain == std::vector<double>{4, 6}, "q_chain(4, 4, nonstrict)");
    const auto c3 = ex::q_chain(5, 14, ex::Bracket::strict);
    o.require(c3.N == 1 && c3.chain == std::vector<double>{5, 8, 14}, "q_chain(5, 14, strict)");
    const auto c4 = ex::q_chain(4, 18, ex::Bracket::strict);
    o.require(c4.chain == std::vector<double>{4, 6, 10, 18}, "chain 4,6,10,18");

    const auto a1 = ex::alpha_threshold(params(2, 8, 1, true), 1);
    o.require(near(a1.value, 1.375) && a1.strict, "alpha threshold 1.375");
    const auto a2 = ex::alpha_threshold(params(2, 8, 1, false), 1);
    o.require(near(a2.value, 1.5) && a2.strict, "unsigned alpha threshold N=1");
    const auto a3 = ex::alpha_threshold(params(2, 8, 1, false), 0);
    o.require(near(a3.value, 2.0) && !a3.strict, "unsigned alpha threshold N=0");

    const auto w1 = ex::p_window(2, 1, ex::WindowMode::w2q).interval;
    o.require(near(w1.lower, 1) && near(w1.upper, 3), "p window (q=2, C=1)");
    const auto w2 = ex::p_window(4, 2, ex::WindowMode::third_order).interval;
    o.require(near(w2.lower, 1.5) && near(w2.upper, 7.0 / 3.0), "p window (q=4, C=2)");
    const auto w3 = ex::p_window(4, 1.25, ex::WindowMode::third_order).interval;
    o.require(near(w3.lower, 1.2) && near(w3.upper, 7.0 / 3.0), "p window (q=4, C=1.25)");

    o.require(near(ex::gamma_lower(2), 0) && near(ex::gamma_lower(1.5), 0.5) && near(ex::gamma_lower(3), 0.5),
              "gamma lower bound");

    const auto k1 = ex::k_threshold(2, 2, true);
    const auto k2 = ex::k_threshold(2, 2, false);
    const auto k3 = ex::k_threshold(1.9, 2.1, true);
    o.require(near(k1.value, 1.5) && k1.strict && near(k2.value, 2) && !k2.strict && near(k3.value, 1.55),
              "k thresholds");

    const auto s1 = ex::stress_window(3, 2, 1.25);
    o.require(near(s1.q, 4) && near(s1.p_interval.lower, 1.8) && near(s1.p_interval.upper, 2) &&
                  s1.p_interval.lower_open && !s1.p_interval.upper_open,
              "stress window (3, 1.25)");
    const auto s2 = ex::stress_window(3, 2, 10);
    o.require(near(s2.p_interval.lower, 1.9), "stress window (3, 10)");
    const auto s3 = ex::stress_window(4, 2, 1);
    o.require(near(s3.q, 6) && near(s3.p_interval.lower, 2 - 1.0 / 7), "stress window (4, 1)");
    if (o.pass) o.note("chain 4,6,10,18; alpha > 1.375; stress window (1.8, 2]");
    return o;
}

// 2. CZ identity at q = 2
Outcome cz_identity()
{
    Outcome o;
    const auto ratios = orc::cz_family_ratios(2, 2.0, 128, 64, 7);
    const double worst = *std::max_element(ratios.begin(), ratios.end());
    o.require(worst <= 1.005, fmt("family max %.6f > 1.005", worst));

    const int c = 128;
    const double h = 1.0 / c;
    const GridDomain d(2, {-4 * h, -4 * h, 0}, {1 + 8 * h, 1 + 8 * h, 0}, {c + 8, c + 8, 1});
    const auto w = ScalarField::sample(
        d, [](const Point& x) { return std::sin(std::numbers::pi * x[0]) * std::sin(std::numbers::pi * x[1]); });
    CellMask outside(d.node_count(), MaskSource::user);
    for (std::size_t i = 0; i < d.node_count(); ++i) {
        const auto x = d.coord(i);
        outside.set(i, !(x[0] > -1e-12 && x[0] < 1 - 1e-12 && x[1] > -1e-12 && x[1] < 1 - 1e-12));
    }
    const double trig = orc::cz_ratio(w, 2.0, outside);
    o.require(std::abs(trig - 1.0) <= 1e-3, fmt("sin*sin ratio %.6f", trig));
    o.note(fmt("family max %.6f over 64 members, sin*sin ratio %.9f", worst, trig));
    return o;
}

// 3. manufactured Poisson
Outcome manufactured()
{
    Outcome o;
    std::vector<double> err;
    for (int cells : {64, 128}) {
        const auto d = GridDomain::cube(2, 0, 1, cells);
        const auto mf = orc::manufactured_poisson(d);
        ProblemSpec s;
        s.p = 2;
        s.epsilon = 1e-2;
        s.f = mf.f;
        s.g = ScalarField(d, 0.0);
        const auto [u, rep] = picard_solve(s, s.g);
        o.require(rep.converged && rep.iterations == 1, fmt("%g cells: Picard took %g iterations", cells, rep.iterations));
        err.push_back(interior_error(u, mf.u));
    }
    const double order = std::log2(err[0] / err[1]);
    o.require(order >= 1.9, fmt("order %.3f", order));
    o.note(fmt("errors %.3e -> %.3e, order %.3f, 1 Picard iteration", err[0], err[1], order));
    return o;
}

struct RadialSolves {
    // solutions[cells index][epsilon index]
    std::vector<std::vector<ScalarField>> solutions;
    std::vector<int> cells;
    std::vector<double> schedule;
};

RadialSolves radial_solves(double p, const std::vector<int>& cells, const std::vector<double>& schedule, Outcome& o)
{
    RadialSolves out;
    out.cells = cells;
    out.schedule = schedule;
    const auto sol = orc::radial_solution(p, 2);
    for (int c : cells) {
        const auto d = GridDomain::cube(2, -1, 1, c);
        ProblemSpec s;
        s.p = p;
        s.epsilon = schedule.front();
        s.f = sol.sample_f(d);
        s.g = sol.sample_u(d);
        const auto r = continuation_solve(s, schedule, s.g);
        for (const auto& rep : r.per_epsilon)
            o.require(rep.converged, fmt("p=%g, %g cells did not converge", p, c));
        out.solutions.push_back(r.solutions);
    }
    return out;
}

// 4. radial solves
Outcome radial(std::map<double, RadialSolves>& cache)
{
    Outcome o;
    const std::vector<int> cells{64, 128, 256};
    const std::vector<double> schedule{1e-2, 1e-3, 1e-4};
    for (double p : {1.5, 2.5}) {
        cache[p] = radial_solves(p, cells, schedule, o);
        const auto sol = orc::radial_solution(p, 2);
        std::vector<double> err;
        for (std::size_t k = 0; k < cells.size(); ++k) {
            const auto& u = cache[p].solutions[k].back();
            err.push_back(interior_error(u, sol.sample_u(u.domain())));
        }
        for (std::size_t k = 1; k < err.size(); ++k)
            o.require(err[k - 1] / err[k] >= 1.5, fmt("p=%g halving ratio %.3f", p, err[k - 1] / err[k]));
        o.note(fmt("p=%g errors ", p) + fmt("%.2e, %.2e, ", err[0], err[1]) + fmt("%.2e", err[2]));

        // diagnostic only: continuing below the required eps separates the
        // regularization error u_eps - u_0 from the discretization error
        bool ratios_ok = true;
        for (std::size_t k = 1; k < err.size(); ++k) ratios_ok = ratios_ok && err[k - 1] / err[k] >= 1.5;
        if (!ratios_ok) {
            std::vector<double> deep;
            for (std::size_t k = 0; k < cells.size(); ++k) {
                const auto& u = cache[p].solutions[k].back();
                ProblemSpec s;
                s.p = p;
                s.epsilon = 1e-5;
                s.f = sol.sample_f(u.domain());
                s.g = sol.sample_u(u.domain());
                SolverOptions opts;
                opts.warm_start = true;
                const auto r = continuation_solve(s, {1e-5, 1e-6}, u, opts);
                deep.push_back(interior_error(r.solutions.back(), s.g));
            }
            o.note(fmt("p=%g continued to eps=1e-6 (diagnostic): ", p) + fmt("%.2e, %.2e, ", deep[0], deep[1]) +
                   fmt("%.2e", deep[2]));
        }
    }
    return o;
}

// 5. Hessian energy stability in h and epsilon
Outcome hessian_stability(const RadialSolves& s)
{
    Outcome o;
    // values[h][eps]
    std::vector<std::vector<double>> v(s.cells.size(), std::vector<double>(s.schedule.size()));
    for (std::size_t k = 0; k < s.cells.size(); ++k)
        for (std::size_t e = 0; e < s.schedule.size(); ++e)
            v[k][e] = hessian_energy(s.solutions[k][e], 1.5, 0.5, s.schedule[e]).value;
    double worst_h = 1, worst_e = 1;
    for (std::size_t e = 0; e < s.schedule.size(); ++e) {
        std::vector<double> col;
        for (std::size_t k = 0; k < s.cells.size(); ++k) col.push_back(v[k][e]);
        worst_h = std::max(worst_h, spread(col));
    }
    for (std::size_t k = 0; k < s.cells.size(); ++k) worst_e = std::max(worst_e, spread(v[k]));
    o.require(worst_h < 1.10, fmt("h spread %.4f", worst_h));
    o.require(worst_e < 1.10, fmt("epsilon spread %.4f", worst_e));
    o.note(fmt("max/min across h %.4f, across eps %.4f (value %.4f at h=1/128, eps=1e-4)", worst_h, worst_e, v[2][2]));
    return o;
}

// radial threshold alpha* where sigma = -n for the third-order functional
double alpha_star(double p, double gamma)
{
    const double m = p / (p - 1);
    return -(2 + (m - 2) * (gamma - 1) + 2 * (m - 3)) / (m - 1) - (p - 2);
}

using GroupKey = std::tuple<double, double, double>;

std::map<GroupKey, std::vector<const lab::Row*>> group(const lab::SweepReport& rep, const std::string& name)
{
    std::map<GroupKey, std::vector<const lab::Row*>> g;
    for (const auto& r : rep.rows)
        if (r.functional == name)
            g[{r.p.value_or(0), r.alpha.value_or(0), name == "third" ? r.gamma.value_or(0) : r.k.value_or(0)}].push_back(&r);
    for (auto& [key, rows] : g)
        std::sort(rows.begin(), rows.end(), [](const lab::Row* a, const lab::Row* b) { return a->h > b->h; });
    return g;
}

// 6. third-order dichotomy
Outcome dichotomy(const lab::SweepReport& rep)
{
    Outcome o;
    int points = 0, agree = 0, borderline = 0;
    double worst_bounded = 1, weakest_growth = 1e300;
    for (const auto& [key, rows] : group(rep, "third")) {
        const auto [p, alpha, gamma] = key;
        const auto sol = orc::radial_solution(p, 2);
        FunctionalSpec fs;
        fs.kind = FunctionalKind::third_order;
        fs.params = {{"p", p}, {"alpha", alpha}, {"gamma", gamma}, {"epsilon", 0}};
        const bool vanishes = orc::leading_exponent(fs, sol).vanishes;
        if (!vanishes && std::abs(alpha - alpha_star(p, gamma)) <= 0.2) {
            ++borderline;
            continue;
        }
        ++points;
        const std::string predicted = orc::predicts_divergence(fs, sol) ? "divergent" : "bounded";
        const std::string verdict = rows.front()->verdict;
        bool same = rows.size() == 3;
        for (const auto* r : rows) same = same && r->verdict == verdict && r->status == "ok";
        if (same && verdict == predicted) ++agree;
        else o.require(false, fmt("p=%g alpha=%g gamma=%g", p, alpha, gamma) + " verdict " + verdict + " vs " + predicted);

        std::vector<double> v;
        for (const auto* r : rows) v.push_back(r->value);
        if (predicted == "bounded" && !vanishes) {
            worst_bounded = std::max(worst_bounded, spread(v));
        } else if (predicted == "divergent") {
            for (std::size_t k = 1; k < v.size(); ++k) weakest_growth = std::min(weakest_growth, v[k] / v[k - 1]);
        }
    }
    o.require(points >= 12, fmt("only %g parameter points", points));
    o.require(worst_bounded < 1.25, fmt("bounded spread %.4f", worst_bounded));
    o.require(weakest_growth >= 2.0, fmt("divergent growth %.3f", weakest_growth));
    o.note(fmt("%g/%g non-borderline points agree", agree, points) + fmt(", %g borderline", borderline) +
           fmt(", bounded spread %.4f, weakest divergent growth %.3f", worst_bounded, weakest_growth));
    return o;
}

// 7. stress regularity
Outcome stress()
{
    Outcome o;
    const auto sol = orc::radial_solution(1.9, 2);
    std::vector<double> direct, expansion, entry;
    double discrepancy = 0;
    for (int cells : {64, 128, 256}) {
        const auto d = GridDomain::cube(2, -1, 1, cells);
        WindowOptions w;
        w.mask = outside_ball_mask(d, {0, 0, 0}, 0.9);
        const auto s = stress_sobolev_seminorm(sol.sample_u(d), 1.9, 3.0, 0.0, w);
        direct.push_back(s.direct.value);
        expansion.push_back(s.expansion.value);
        entry.push_back(s.entry_sum.value);
        if (cells == 256) discrepancy = s.discrepancy;
    }
    o.require(discrepancy <= 0.05, fmt("direct vs expansion %.4f at h=1/128", discrepancy));
    o.require(spread(direct) <= 1.10, fmt("direct spread %.4f", spread(direct)));
    o.require(spread(expansion) <= 1.10, fmt("expansion spread %.4f", spread(expansion)));
    o.require(spread(entry) <= 1.10, fmt("entry-sum spread %.4f", spread(entry)));

    // p = 2: stress = grad u on u = r^2, so |D V| = |D^2 u|
    const auto d = GridDomain::cube(2, -1, 1, 256);
    const auto u2 = orc::radial_solution(2.0, 2).sample_u(d);
    WindowOptions w;
    w.mask = outside_ball_mask(d, {0, 0, 0}, 0.9);
    const double lhs = stress_sobolev_seminorm(u2, 2.0, 3.0, 0.0, w).direct.value;
    const auto J = jet(u2, 2, Exec::serial);
    std::vector<double> h3(d.node_count());
    for (std::size_t i = 0; i < h3.size(); ++i) h3[i] = std::pow(J.hess_norm[i], 3.0);
    const double rhs = integrate(d, h3, w.mask).value;
    const double rel = std::abs(lhs - rhs) / std::abs(rhs);
    o.require(rel <= 1e-10, fmt("p=2 identity off by %.3e", rel));
    o.note(fmt("h=1/128: direct %.4f, expansion %.4f, discrepancy %.4f", direct[2], expansion[2], discrepancy) +
           fmt("; spreads %.4f / %.4f", spread(direct), spread(expansion)) + fmt("; p=2 identity %.1e", rel));
    return o;
}

// 8. power vector field
Outcome vector_field(const lab::SweepReport& rep)
{
    Outcome o;
    const auto bounded = group(rep, "vfield_bounded");
    const auto divergent = group(rep, "vfield_divergent");
    o.require(bounded.size() == 1 && divergent.size() == 1, "expected one bounded and one divergent group");
    if (!o.pass) return o;
    const auto& [bkey, brows] = *bounded.begin();
    const auto& [dkey, drows] = *divergent.begin();
    const double alpha = std::get<1>(bkey), kb = std::get<2>(bkey), kd = std::get<2>(dkey);
    o.require(near(kb, (alpha + 1) / 2 + 0.1), "bounded k is not 0.1 above (alpha+1)/2");
    // radial integrability threshold of |D^2 V| with V ~ r^{(m-1)k}: k > 0
    o.require(near(kd, -0.5), "divergent k is not 0.5 below the integrability threshold");
    std::vector<double> bv, dv;
    for (const auto* r : brows) bv.push_back(r->value);
    for (const auto* r : drows) dv.push_back(r->value);
    o.require(bv.size() == 3 && dv.size() == 3, "need three refinements");
    if (!o.pass) return o;
    o.require(spread(bv) <= 1.25, fmt("bounded spread %.4f", spread(bv)));
    o.require(dv[1] / dv[0] >= 2 && dv[2] / dv[1] >= 2, fmt("divergent growth %.3f, %.3f", dv[1] / dv[0], dv[2] / dv[1]));
    o.require(brows.back()->verdict == "bounded" && drows.back()->verdict == "divergent", "sweep verdicts");
    o.note(fmt("k=%.2f spread %.4f", kb, spread(bv)) + fmt("; k=%.2f growth %.3f, %.3f", kd, dv[1] / dv[0], dv[2] / dv[1]));
    return o;
}

// 9. linearized residual
Outcome linearized()
{
    Outcome o;
    std::vector<double> res;
    double linearity = 0;
    for (int cells : {32, 64, 128}) {
        const auto d = GridDomain::cube(2, 0, 1, cells);
        const auto mf = orc::manufactured_poisson(d);
        const auto phi = bump_function(d, {0.45, 0.55, 0}, 0.3);
        const auto r = linearized_residual(mf.u, mf.f, phi, 0, 1, 2.0);
        res.push_back(std::abs(r.value));
        if (cells == 64) {
            double scale = std::abs(r.rhs);
            for (double t : r.terms) scale += std::abs(t);
            for (double c : {2.0, 3.0, -0.7}) {
                std::vector<double> cphi(phi.size());
                for (std::size_t i = 0; i < cphi.size(); ++i) cphi[i] = c * phi[i];
                const auto rc = linearized_residual(mf.u, mf.f, ScalarField(d, cphi), 0, 1, 2.0);
                linearity = std::max(linearity, std::abs(rc.value - c * r.value) / (std::abs(c) * scale));
            }
        }
    }
    const double o1 = std::log2(res[0] / res[1]), o2 = std::log2(res[1] / res[2]);
    o.require(o1 >= 1.0 && o2 >= 1.0, fmt("orders %.3f, %.3f", o1, o2));
    o.require(linearity <= 1e-12, fmt("linearity error %.3e", linearity));
    o.note(fmt("residuals %.2e, %.2e, %.2e", res[0], res[1], res[2]) + fmt("; orders %.2f, %.2f", o1, o2) +
           fmt("; linearity error %.1e (relative to the assembled terms)", linearity));
    return o;
}

// 10. determinism
Outcome determinism(const lab::ExperimentConfig& cfg, const std::string& first)
{
    Outcome o;
    const auto second = lab::to_csv(lab::run(cfg, {Exec::serial}));
    o.require(first == second, "serial runs differ");
    o.note(fmt("%g bytes identical", static_cast<double>(first.size())));
    return o;
}

} // namespace

int main()
{
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    int failed = 0;
    auto report = [&](int n, const char* title, const std::function<Outcome()>& f) {
        const auto start = clock::now();
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(clock::now() - start).count();
        std::printf("%s criterion %d: %s (%s) [%.1fs]\n", o.pass ? "PASS" : "FAIL", n, title, o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failed;
    };

    const auto cfg = lab::load_config(PLAP_ACCEPTANCE_CONFIG);
    lab::SweepReport sweep;
    std::string sweep_csv;
    std::map<double, RadialSolves> radial_cache;

    report(1, "exponent golden table", exponent_table);
    report(2, "CZ identity at q=2", cz_identity);
    report(3, "manufactured Poisson at p=2", manufactured);
    report(4, "radial solves p=1.5, 2.5 with eps-continuation", [&] { return radial(radial_cache); });
    report(5, "Hessian energy stability in h and eps", [&] {
        if (!radial_cache.count(1.5)) {
            Outcome o;
            o.require(false, "radial p=1.5 solves unavailable");
            return o;
        }
        return hessian_stability(radial_cache.at(1.5));
    });
    report(6, "third-order boundedness/divergence dichotomy", [&] {
        sweep = lab::run(cfg, {Exec::serial});
        sweep_csv = lab::to_csv(sweep);
        return dichotomy(sweep);
    });
    report(7, "stress seminorm at p=1.9, alpha~=3", stress);
    report(8, "power vector field threshold", [&] { return vector_field(sweep); });
    report(9, "second linearized residual", linearized);
    report(10, "determinism of serial runs", [&] { return determinism(cfg, sweep_csv); });

    std::printf("%d of 10 criteria passed in %.1fs\n", 10 - failed,
                std::chrono::duration<double>(clock::now() - t0).count());
    return failed == 0 ? 0 : 1;
}
