#include "plap/lab/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

#include "plap/error.hpp"
#include "plap/exponents.hpp"
#include "plap/field_io.hpp"
#include "plap/functionals.hpp"
#include "plap/oracles.hpp"
#include "plap/solver.hpp"

namespace plap::lab {

std::string_view to_string(Verdict v) noexcept
{
    switch (v) {
    case Verdict::bounded: return "bounded";
    case Verdict::divergent: return "divergent";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

Verdict classify(std::span<const double> v, double floor)
{
    if (v.size() < 2) return Verdict::inconclusive;
    double lo = std::abs(v[0]), hi = lo;
    for (double x : v) {
        if (!std::isfinite(x)) return Verdict::inconclusive;
        lo = std::min(lo, std::abs(x));
        hi = std::max(hi, std::abs(x));
    }
    if (hi <= floor) return Verdict::bounded;
    if (lo > 0.0 && hi / lo <= kBoundedBand) return Verdict::bounded;
    bool grows = true;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(std::abs(v[i - 1]) > 0.0 && std::abs(v[i]) >= kDivergentFactor * std::abs(v[i - 1]))) grows = false;
    return grows ? Verdict::divergent : Verdict::inconclusive;
}

namespace {

struct FieldKey {
    bool solved = false;
    double p = 2.0;
    double h = 0.0;
    double epsilon = 0.0;
    auto operator<=>(const FieldKey&) const = default;
};

struct Field {
    ScalarField u;
    ScalarField f;
    std::string status = "ok";
    double residual = 0.0;
    std::optional<double> error;  // interior max error against the exact solution
};

struct Task {
    std::size_t functional = 0;  // index into cfg.functionals
    Row row;
    FieldKey field;
    FunctionalSpec spec;
};

GridDomain make_domain(const ExperimentConfig& cfg, double h)
{
    const auto& b = cfg.benchmark;
    return GridDomain::cube(b.n, b.lo, b.hi, cfg.cells_for(h));
}

ScalarField exact_u(const ExperimentConfig& cfg, double p, const GridDomain& d)
{
    if (cfg.benchmark.kind == BenchmarkKind::radial)
        return oracles::radial_solution(p, cfg.benchmark.n, cfg.benchmark.scale).sample_u(d);
    return oracles::manufactured_poisson(d).u;
}

ScalarField exact_f(const ExperimentConfig& cfg, double p, const GridDomain& d)
{
    if (cfg.benchmark.kind == BenchmarkKind::radial)
        return oracles::radial_solution(p, cfg.benchmark.n, cfg.benchmark.scale).sample_f(d);
    return oracles::manufactured_poisson(d).f;
}

double interior_error(const ScalarField& u, const ScalarField& ex)
{
    const auto& d = u.domain();
    double e = 0.0;
    for (std::size_t i = 0; i < d.node_count(); ++i)
        if (!d.on_boundary(i)) e = std::max(e, std::abs(u[i] - ex[i]));
    return e;
}

struct FileData {
    ScalarField u;
    ScalarField f;
};

FileData load_file_benchmark(const ExperimentConfig& cfg)
{
    FileData fd;
    fd.u = read_field(cfg.benchmark.path).field;
    if (!cfg.benchmark.f_path.empty()) {
        fd.f = read_field(cfg.benchmark.f_path).field;
        if (!(fd.f.domain() == fd.u.domain())) throw ConfigError("benchmark.f_path lives on a different grid than u");
    } else {
        fd.f = ScalarField(fd.u.domain(), 0.0);
    }
    return fd;
}

/// Solves every requested epsilon for one (p, h) pair along a single continuation chain.
void solve_chain(const ExperimentConfig& cfg, const FileData* file, double p, double h, std::vector<double> eps,
                 std::map<FieldKey, Field>& out)
{
    const GridDomain d = file ? file->u.domain() : make_domain(cfg, h);
    ProblemSpec spec;
    spec.p = p;
    spec.f = file ? file->f : exact_f(cfg, p, d);
    spec.g = file ? file->u : (cfg.benchmark.kind == BenchmarkKind::radial ? exact_u(cfg, p, d) : ScalarField(d, 0.0));
    std::optional<ScalarField> ex;
    if (!file) ex = exact_u(cfg, p, d);

    // epsilon = 0 is only requested at p = 2, where the coefficient is 1 for every epsilon
    std::vector<double> chain;
    std::sort(eps.begin(), eps.end(), std::greater<>());
    const double finest = eps.back();
    for (double s : cfg.solver.schedule)
        if (s > finest) chain.push_back(s);
    for (double e : eps) chain.push_back(e == 0.0 ? kMinColdEpsilon : e);
    std::sort(chain.begin(), chain.end(), std::greater<>());
    chain.erase(std::unique(chain.begin(), chain.end()), chain.end());
    if (chain.front() < kMinColdEpsilon) chain.insert(chain.begin(), kMinColdEpsilon);

    SolverOptions so;
    so.tol = cfg.solver.tol;
    so.max_iter = cfg.solver.max_iter;
    so.damping = cfg.solver.damping;
    so.preconditioner = cfg.solver.preconditioner;
    so.exec = Exec::serial;

    spec.epsilon = chain.front();
    std::vector<ScalarField> sols;
    std::vector<SolveReport> reps;
    std::string failure;
    try {
        auto res = continuation_solve(spec, chain, with_boundary(ScalarField(d, 0.0), spec.g), so);
        sols = std::move(res.solutions);
        reps = std::move(res.per_epsilon);
    } catch (const SolverError& e) {
        failure = std::string("error: ") + e.what();
    } catch (const DomainError& e) {
        failure = std::string("error: ") + e.what();
    }

    for (double e : eps) {
        const double target = e == 0.0 ? kMinColdEpsilon : e;
        Field fl;
        fl.f = spec.f;
        if (!failure.empty()) {
            fl.u = spec.g;
            fl.status = failure;
        } else {
            const auto at = std::find(chain.begin(), chain.end(), target) - chain.begin();
            fl.u = sols[static_cast<std::size_t>(at)];
            const auto& rep = reps[static_cast<std::size_t>(at)];
            fl.residual = rep.residual_history.empty() ? 0.0 : rep.residual_history.back();
            if (!rep.converged) fl.status = "not_converged";
            if (ex) fl.error = interior_error(fl.u, *ex);
        }
        out[{true, p, h, e}] = std::move(fl);
    }
}

std::string admissibility(const ExperimentConfig& cfg, const Row& r, FunctionalKind kind)
{
    const auto& ex = cfg.exponents;
    const int n = cfg.benchmark.n;
    const double p = r.p.value_or(cfg.benchmark.p);
    auto yes = [](bool b) { return std::string(b ? "admissible" : "inadmissible"); };
    try {
        switch (kind) {
        case FunctionalKind::hessian_energy: {
            const auto w = exponents::p_window(2.0, ex.cz, exponents::WindowMode::w2q);
            const double beta = r.beta.value_or(0.0);
            return yes(beta >= 0.0 && beta < 1.0 && w.interval.contains(p));
        }
        case FunctionalKind::inverse_weight_f: {
            const auto w = exponents::p_window(2.0, ex.cz, exponents::WindowMode::w2q);
            const double q = r.q.value_or(1.0);
            return yes(w.interval.contains(p) && q >= 1.0 && (p <= 2.0 || q < (p - 1.0) / (p - 2.0)));
        }
        case FunctionalKind::gradient_inverse: {
            const auto w = exponents::p_window(2.0, ex.cz, exponents::WindowMode::w2q);
            return yes(w.interval.contains(p) && r.r.value_or(1.0) < 1.0);
        }
        case FunctionalKind::third_order: {
            exponents::ExponentParams ep{p, ex.q, r.gamma.value_or(1.0), n, ex.cz, ex.f_has_sign};
            return yes(exponents::third_order_admissible(ep, r.alpha.value_or(0.0)).admissible);
        }
        case FunctionalKind::stress_seminorm:
            return yes(exponents::stress_admissible(p, r.alpha_tilde.value_or(0.0), n, ex.cz).admissible);
        case FunctionalKind::power_field_seminorm: {
            if (!r.alpha) return "n/a";
            exponents::ExponentParams ep{p, ex.q, r.gamma.value_or(1.0), n, ex.cz, ex.f_has_sign};
            return yes(exponents::power_field_admissible(ep, *r.alpha, r.k.value_or(0.0)).admissible);
        }
        case FunctionalKind::linearized_residual:
            return "n/a";
        }
    } catch (const DomainError&) {
        return "n/a";
    }
    return "n/a";
}

std::string radial_prediction(const ExperimentConfig& cfg, const FunctionalSpec& spec, double p)
{
    if (cfg.benchmark.kind != BenchmarkKind::radial || spec.kind == FunctionalKind::linearized_residual) return "";
    const bool origin_inside = cfg.window.shape == WindowShape::box || cfg.window.r0 == 0.0;
    if (!origin_inside) return "bounded";
    const auto sol = oracles::radial_solution(p, cfg.benchmark.n, cfg.benchmark.scale);
    return oracles::predicts_divergence(spec, sol) ? "divergent" : "bounded";
}

std::vector<double> axis_or(const std::vector<double>& axis, const FunctionalSpec& spec, const char* name,
                            std::optional<double> fallback)
{
    if (auto it = spec.params.find(name); it != spec.params.end()) return {it->second};
    if (!axis.empty()) return axis;
    if (fallback) return {*fallback};
    return {};
}

bool uses_epsilon(FunctionalKind k)
{
    return k != FunctionalKind::gradient_inverse && k != FunctionalKind::linearized_residual;
}

using SortKey = std::tuple<std::string, std::optional<double>, std::optional<double>, std::optional<double>,
                           std::optional<double>, std::optional<double>, std::optional<double>, std::optional<double>,
                           std::optional<double>, std::optional<double>>;

SortKey group_key(const Row& r)
{
    return {r.functional, r.p, r.epsilon, r.alpha, r.beta, r.gamma, r.q, r.r, r.k, r.alpha_tilde};
}

} // namespace

SweepReport run(const ExperimentConfig& cfg, const RunOptions& opts)
{
    cfg.validate();
    std::optional<FileData> file;
    if (cfg.benchmark.kind == BenchmarkKind::file) file = load_file_benchmark(cfg);

    const auto ps = cfg.axes.p.empty() ? std::vector<double>{cfg.benchmark.p} : cfg.axes.p;
    const auto hs = file ? std::vector<double>{file->u.domain().max_h()} : cfg.spacings();
    const bool solving = cfg.solver.mode == FieldMode::solve;
    const double default_solve_eps = cfg.solver.schedule.empty() ? kMinColdEpsilon : cfg.solver.schedule.back();

    std::vector<Task> tasks;
    for (std::size_t fi = 0; fi < cfg.functionals.size(); ++fi) {
        const auto& nf = cfg.functionals[fi];
        const auto kind = nf.spec.kind;
        const auto fixed_p = nf.spec.params.find("p");
        const auto fps = fixed_p != nf.spec.params.end() ? std::vector<double>{fixed_p->second} : ps;
        for (double p : fps) {
            std::vector<double> eps;
            if (auto it = nf.spec.params.find("epsilon"); it != nf.spec.params.end()) eps = {it->second};
            else if (!cfg.axes.epsilon.empty() && (solving || uses_epsilon(kind))) eps = cfg.axes.epsilon;
            else eps = {solving ? default_solve_eps : 0.0};

            const bool third = kind == FunctionalKind::third_order;
            const auto alphas = third ? axis_or(cfg.axes.alpha, nf.spec, "alpha", std::nullopt)
                                      : axis_or({}, nf.spec, "alpha", std::nullopt);
            const auto gammas = third ? axis_or(cfg.axes.gamma, nf.spec, "gamma", std::nullopt)
                                      : axis_or({}, nf.spec, "gamma", std::nullopt);
            const auto tildes = kind == FunctionalKind::stress_seminorm
                                    ? axis_or(cfg.axes.alpha_tilde, nf.spec, "alpha_tilde", std::nullopt)
                                    : std::vector<double>{};
            const auto ks = kind == FunctionalKind::power_field_seminorm
                                ? axis_or(cfg.axes.k, nf.spec, "k", std::nullopt)
                                : std::vector<double>{};
            auto opt_list = [](const std::vector<double>& v) {
                std::vector<std::optional<double>> out(v.begin(), v.end());
                if (out.empty()) out.emplace_back();
                return out;
            };
            for (double h : hs)
                for (double e : eps)
                    for (auto a : opt_list(alphas))
                        for (auto g : opt_list(gammas))
                            for (auto at : opt_list(tildes))
                                for (auto k : opt_list(ks)) {
                                    Task t;
                                    t.functional = fi;
                                    t.spec = nf.spec;
                                    t.spec.params["p"] = p;
                                    t.spec.params["epsilon"] = uses_epsilon(kind) ? e : 0.0;
                                    if (a) t.spec.params["alpha"] = *a;
                                    if (g) t.spec.params["gamma"] = *g;
                                    if (at) t.spec.params["alpha_tilde"] = *at;
                                    if (k) t.spec.params["k"] = *k;
                                    Row& r = t.row;
                                    r.functional = nf.name;
                                    r.kind = std::string(to_string(kind));
                                    r.p = p;
                                    if (uses_epsilon(kind) || solving) r.epsilon = e;
                                    r.alpha = a;
                                    r.gamma = g;
                                    r.alpha_tilde = at;
                                    r.k = k;
                                    if (kind == FunctionalKind::stress_seminorm && !g && at &&
                                        cfg.exponents.couple_gamma)
                                        r.gamma = 2.0 * *at - 5.0;
                                    auto fixed = [&](const char* name) -> std::optional<double> {
                                        auto it = t.spec.params.find(name);
                                        return it == t.spec.params.end() ? std::nullopt
                                                                         : std::optional<double>(it->second);
                                    };
                                    r.beta = fixed("beta");
                                    r.q = fixed("q");
                                    r.r = fixed("r");
                                    r.h = h;
                                    t.field = {solving, solving ? p : (cfg.benchmark.kind == BenchmarkKind::manufactured
                                                                           ? 2.0
                                                                           : p),
                                               h, solving ? e : 0.0};
                                    if (file && !solving) t.field.p = 0.0;
                                    tasks.push_back(std::move(t));
                                }
        }
    }

    // field requests
    std::map<FieldKey, Field> fields;
    std::map<std::pair<double, double>, std::vector<double>> chains;  // (p, h) -> epsilons to solve
    auto request_solve = [&](double p, double h, double e) {
        auto& v = chains[{p, h}];
        if (std::find(v.begin(), v.end(), e) == v.end()) v.push_back(e);
    };
    for (const auto& t : tasks)
        if (t.field.solved) request_solve(t.field.p, t.field.h, t.field.epsilon);
    std::vector<FieldKey> solve_rows;
    if (cfg.solve_task) {
        const auto eps = cfg.axes.epsilon.empty() ? std::vector<double>{default_solve_eps} : cfg.axes.epsilon;
        for (double p : ps)
            for (double h : hs)
                for (double e : eps) {
                    request_solve(p, h, e);
                    solve_rows.push_back({true, p, h, e});
                }
    }

    // sampled fields are cheap: build them serially
    for (const auto& t : tasks) {
        if (t.field.solved || fields.count(t.field)) continue;
        Field fl;
        if (file) {
            fl.u = file->u;
            fl.f = file->f;
        } else {
            const auto d = make_domain(cfg, t.field.h);
            fl.u = exact_u(cfg, t.field.p, d);
            fl.f = exact_f(cfg, t.field.p, d);
        }
        fields[t.field] = std::move(fl);
    }

    // continuation chains, one per (p, h)
    std::vector<std::pair<std::pair<double, double>, std::vector<double>>> chain_list(chains.begin(), chains.end());
    std::vector<std::map<FieldKey, Field>> chain_out(chain_list.size());
    for_each_node(chain_list.size(), opts.exec, [&](std::size_t c) {
        const auto& [ph, eps] = chain_list[c];
        solve_chain(cfg, file ? &*file : nullptr, ph.first, ph.second, eps, chain_out[c]);
    });
    for (auto& m : chain_out) fields.merge(m);

    // window masks per grid
    std::map<double, CellMask> windows;
    for (const auto& [key, fl] : fields) {
        if (windows.count(key.h) || cfg.window.shape == WindowShape::box) continue;
        const auto& d = fl.u.domain();
        Point center{};
        for (int a = 0; a < d.dim(); ++a) center[a] = d.origin()[a] + 0.5 * d.extent()[a];
        windows[key.h] = outside_ball_mask(d, center, cfg.window.radius, cfg.window.r0);
    }

    std::vector<Row> rows(tasks.size());
    for_each_node(tasks.size(), opts.exec, [&](std::size_t i) {
        const Task& t = tasks[i];
        Row r = t.row;
        const Field& fl = fields.at(t.field);
        const auto kind = t.spec.kind;
        r.admissible = admissibility(cfg, r, kind);
        r.prediction = radial_prediction(cfg, t.spec, t.spec.params.at("p"));
        if (fl.status.rfind("error", 0) == 0) {
            r.status = fl.status;
            rows[i] = std::move(r);
            return;
        }
        WindowOptions w;
        w.exec = Exec::serial;
        w.delta = cfg.window.delta;
        if (auto it = windows.find(t.field.h); it != windows.end()) w.mask = it->second;
        try {
            FunctionalValue v;
            if (kind == FunctionalKind::stress_seminorm) {
                const auto s = stress_sobolev_seminorm(fl.u, t.spec.get("p"), t.spec.get("alpha_tilde"),
                                                       t.spec.get_or("epsilon", 0.0), w);
                const int variant = static_cast<int>(t.spec.get_or("variant", 0.0));
                v = variant == 1 ? s.entry_sum : variant == 2 ? s.expansion : s.direct;
                if (!s.cross_check_ok) {
                    r.status = "cross_check_failed";
                    v.warnings = s.direct.warnings;
                }
            } else {
                v = evaluate(t.spec, fl.u, &fl.f, w);
            }
            r.value = v.value;
            r.masked_fraction = v.masked_fraction;
            r.h = fl.u.domain().max_h();
            r.warnings = v.warnings;
            if (fl.status != "ok") r.status = fl.status;
        } catch (const DomainError& e) {
            r.status = std::string("error: ") + e.what();
        }
        rows[i] = std::move(r);
    });

    for (const auto& key : solve_rows) {
        const Field& fl = fields.at(key);
        Row r;
        r.functional = "solve";
        r.kind = "solve";
        r.p = key.p;
        r.epsilon = key.epsilon;
        r.h = fl.u.domain().max_h();
        r.value = fl.error.value_or(fl.residual);
        r.status = fl.status;
        if (!fl.error) r.warnings.emplace_back("no exact solution: value is the final residual");
        rows.push_back(std::move(r));
    }

    // refinement ratios and verdicts over the h axis
    std::map<SortKey, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < rows.size(); ++i) groups[group_key(rows[i])].push_back(i);
    for (auto& [key, idx] : groups) {
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return rows[a].h > rows[b].h; });
        std::vector<double> vals;
        bool clean = true;
        for (std::size_t j = 0; j < idx.size(); ++j) {
            Row& r = rows[idx[j]];
            vals.push_back(r.value);
            if (r.status.rfind("error", 0) == 0 || r.status == "not_converged") clean = false;
            if (j > 0 && rows[idx[j - 1]].value != 0.0) r.ratio = r.value / rows[idx[j - 1]].value;
        }
        const Verdict v = clean ? classify(vals) : Verdict::inconclusive;
        for (std::size_t j : idx) rows[j].verdict = std::string(to_string(v));
    }

    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tuple_cat(group_key(a), std::make_tuple(-a.h)) < std::tuple_cat(group_key(b), std::make_tuple(-b.h));
    });
    return {std::move(rows)};
}

} // namespace plap::lab
