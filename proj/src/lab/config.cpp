#include "plap/lab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "plap/error.hpp"
#include "plap/solver.hpp"

namespace plap::lab {

namespace {

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s)
{
    std::vector<std::string_view> out;
    while (true) {
        const auto c = s.find(',');
        const auto item = trim(s.substr(0, c));
        if (!item.empty()) out.push_back(item);
        if (c == std::string_view::npos) break;
        s.remove_prefix(c + 1);
    }
    return out;
}

struct Parser {
    ExperimentConfig cfg;
    bool lo_set = false, hi_set = false;
    int line = 0;

    [[noreturn]] void fail(const std::string& msg) const
    {
        throw ConfigError("line " + std::to_string(line) + ": " + msg);
    }

    double number(std::string_view v, std::string_view key) const
    {
        const auto x = parse_number(v);
        if (!x) fail("'" + std::string(key) + "' expects a number, got '" + std::string(v) + "'");
        return *x;
    }

    std::vector<double> numbers(std::string_view v, std::string_view key) const
    {
        std::vector<double> out;
        for (auto item : split_list(v)) out.push_back(number(item, key));
        if (out.empty()) fail("'" + std::string(key) + "' expects at least one number");
        return out;
    }

    int integer(std::string_view v, std::string_view key) const
    {
        const double x = number(v, key);
        if (x != std::floor(x) || std::abs(x) > 1e9) fail("'" + std::string(key) + "' expects an integer");
        return static_cast<int>(x);
    }

    bool boolean(std::string_view v, std::string_view key) const
    {
        if (v == "true" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "no" || v == "0") return false;
        fail("'" + std::string(key) + "' expects true or false");
    }

    NamedFunctional& functional(std::string_view name)
    {
        for (auto& f : cfg.functionals)
            if (f.name == name) return f;
        cfg.functionals.push_back({std::string(name), {}});
        cfg.functionals.back().spec.params.clear();
        kind_set.emplace_back(false);
        return cfg.functionals.back();
    }

    std::vector<bool> kind_set;

    void assign(std::string_view key, std::string_view value)
    {
        auto& c = cfg;
        const auto dot = key.find('.');
        const std::string_view section = dot == std::string_view::npos ? std::string_view{} : key.substr(0, dot);
        const std::string_view rest = dot == std::string_view::npos ? key : key.substr(dot + 1);

        if (section.empty()) {
            if (key == "seed") {
                const double s = number(value, key);
                if (s < 0 || s != std::floor(s)) fail("seed must be a non-negative integer");
                c.seed = static_cast<std::uint64_t>(std::strtoull(std::string(value).c_str(), nullptr, 10));
                return;
            }
            fail("unknown key '" + std::string(key) + "'");
        }
        if (section == "benchmark") {
            auto& b = c.benchmark;
            if (rest == "kind") {
                if (value == "radial") b.kind = BenchmarkKind::radial;
                else if (value == "manufactured") b.kind = BenchmarkKind::manufactured;
                else if (value == "file") b.kind = BenchmarkKind::file;
                else fail("benchmark.kind must be radial, manufactured or file");
            } else if (rest == "n") b.n = integer(value, key);
            else if (rest == "p") b.p = number(value, key);
            else if (rest == "scale") b.scale = number(value, key);
            else if (rest == "lo") { b.lo = number(value, key); lo_set = true; }
            else if (rest == "hi") { b.hi = number(value, key); hi_set = true; }
            else if (rest == "cells") b.cells = integer(value, key);
            else if (rest == "path") b.path = std::string(value);
            else if (rest == "f_path") b.f_path = std::string(value);
            else fail("unknown key '" + std::string(key) + "'");
            return;
        }
        if (section == "sweep") {
            auto& a = c.axes;
            std::vector<double>* axis = rest == "p"             ? &a.p
                                        : rest == "epsilon"     ? &a.epsilon
                                        : rest == "h"           ? &a.h
                                        : rest == "alpha"       ? &a.alpha
                                        : rest == "gamma"       ? &a.gamma
                                        : rest == "alpha_tilde" ? &a.alpha_tilde
                                        : rest == "k"           ? &a.k
                                                                : nullptr;
            if (!axis) fail("unknown sweep axis '" + std::string(rest) + "'");
            *axis = numbers(value, key);
            return;
        }
        if (section == "functional") {
            const auto d2 = rest.find('.');
            if (d2 == std::string_view::npos || d2 == 0) fail("functional keys look like functional.<name>.<param>");
            const auto name = rest.substr(0, d2);
            const auto param = rest.substr(d2 + 1);
            auto& f = functional(name);
            const std::size_t idx = static_cast<std::size_t>(&f - c.functionals.data());
            if (param == "kind") {
                const auto k = parse_functional_kind(value);
                if (!k) fail("unknown functional kind '" + std::string(value) + "'");
                f.spec.kind = *k;
                kind_set[idx] = true;
            } else if (param == "mask_policy") {
                const auto m = parse_mask_policy(value);
                if (!m) fail("unknown mask policy '" + std::string(value) + "'");
                f.spec.mask_policy = *m;
            } else {
                static const std::set<std::string_view> known{"p", "epsilon", "alpha", "beta", "gamma", "q", "r",
                                                              "alpha_tilde", "k", "order", "variant", "i", "j"};
                if (!known.count(param)) fail("unknown functional parameter '" + std::string(param) + "'");
                f.spec.params[std::string(param)] = number(value, key);
            }
            return;
        }
        if (section == "solve") {
            if (rest == "enabled") c.solve_task = boolean(value, key);
            else fail("unknown key '" + std::string(key) + "'");
            return;
        }
        if (section == "solver") {
            auto& s = c.solver;
            if (rest == "mode") {
                if (value == "sample") s.mode = FieldMode::sample;
                else if (value == "solve") s.mode = FieldMode::solve;
                else fail("solver.mode must be sample or solve");
            } else if (rest == "tol") s.tol = number(value, key);
            else if (rest == "max_iter") s.max_iter = integer(value, key);
            else if (rest == "damping") s.damping = number(value, key);
            else if (rest == "schedule") s.schedule = numbers(value, key);
            else if (rest == "preconditioner") {
                if (value == "multigrid") s.preconditioner = linear::Preconditioner::multigrid;
                else if (value == "jacobi") s.preconditioner = linear::Preconditioner::jacobi;
                else fail("solver.preconditioner must be multigrid or jacobi");
            } else fail("unknown key '" + std::string(key) + "'");
            return;
        }
        if (section == "window") {
            auto& w = c.window;
            if (rest == "shape") {
                if (value == "box") w.shape = WindowShape::box;
                else if (value == "ball") w.shape = WindowShape::ball;
                else fail("window.shape must be box or ball");
            } else if (rest == "radius") w.radius = number(value, key);
            else if (rest == "r0") w.r0 = number(value, key);
            else if (rest == "delta") w.delta = number(value, key);
            else fail("unknown key '" + std::string(key) + "'");
            return;
        }
        if (section == "exponents") {
            auto& e = c.exponents;
            if (rest == "q") e.q = number(value, key);
            else if (rest == "cz") e.cz = number(value, key);
            else if (rest == "f_has_sign") e.f_has_sign = boolean(value, key);
            else if (rest == "couple_gamma") e.couple_gamma = boolean(value, key);
            else fail("unknown key '" + std::string(key) + "'");
            return;
        }
        if (section == "output") {
            if (rest == "dir") c.output.dir = std::string(value);
            else if (rest == "formats") {
                c.output.csv = c.output.json = false;
                for (auto f : split_list(value)) {
                    if (f == "csv") c.output.csv = true;
                    else if (f == "json") c.output.json = true;
                    else fail("output.formats accepts csv and json");
                }
            } else fail("unknown key '" + std::string(key) + "'");
            return;
        }
        fail("unknown section '" + std::string(section) + "'");
    }
};

std::vector<std::string_view> required_params(FunctionalKind k)
{
    switch (k) {
    case FunctionalKind::hessian_energy: return {"beta"};
    case FunctionalKind::inverse_weight_f: return {"q"};
    case FunctionalKind::gradient_inverse: return {"r"};
    case FunctionalKind::third_order: return {"alpha", "gamma"};
    case FunctionalKind::stress_seminorm: return {"alpha_tilde"};
    case FunctionalKind::power_field_seminorm: return {"k", "r"};
    case FunctionalKind::linearized_residual: return {};
    }
    return {};
}

} // namespace

std::optional<double> parse_number(std::string_view s)
{
    s = trim(s);
    if (s.empty()) return std::nullopt;
    const auto slash = s.find('/');
    auto one = [](std::string_view t) -> std::optional<double> {
        t = trim(t);
        if (t.empty()) return std::nullopt;
        const std::string str(t);
        char* end = nullptr;
        const double v = std::strtod(str.c_str(), &end);
        if (end != str.c_str() + str.size() || !std::isfinite(v)) return std::nullopt;
        return v;
    };
    if (slash == std::string_view::npos) return one(s);
    const auto a = one(s.substr(0, slash));
    const auto b = one(s.substr(slash + 1));
    if (!a || !b || *b == 0.0) return std::nullopt;
    return *a / *b;
}

std::vector<double> ExperimentConfig::spacings() const
{
    if (!axes.h.empty()) return axes.h;
    return {(benchmark.hi - benchmark.lo) / benchmark.cells};
}

int ExperimentConfig::cells_for(double h) const
{
    const double c = (benchmark.hi - benchmark.lo) / h;
    const double r = std::round(c);
    if (std::abs(c - r) > 1e-9 * std::max(1.0, c) || r < 4)
        throw ConfigError("h = " + std::to_string(h) + " does not divide the box into a whole number (>= 4) of cells");
    return static_cast<int>(r);
}

void ExperimentConfig::validate() const
{
    if (functionals.empty() && !solve_task) throw ConfigError("nothing to do: add a functional or set solve.enabled");
    if (benchmark.n < 1 || benchmark.n > 3) throw ConfigError("benchmark.n must be 1, 2 or 3");
    if (!(benchmark.hi > benchmark.lo)) throw ConfigError("benchmark.hi must exceed benchmark.lo");
    if (benchmark.kind == BenchmarkKind::file && benchmark.path.empty())
        throw ConfigError("file benchmark needs benchmark.path");
    if (benchmark.kind == BenchmarkKind::radial && benchmark.scale == 0.0)
        throw ConfigError("radial benchmark needs a nonzero scale");

    const auto ps = axes.p.empty() ? std::vector<double>{benchmark.p} : axes.p;
    for (double p : ps)
        if (!(p > 1.0)) throw ConfigError("every p must exceed 1");
    for (double e : axes.epsilon)
        if (!(e >= 0.0 && e < 1.0)) throw ConfigError("every epsilon must lie in [0, 1)");

    auto hs = spacings();
    for (double h : hs) {
        if (!(h > 0.0)) throw ConfigError("every h must be positive");
        (void)cells_for(h);
    }
    std::sort(hs.begin(), hs.end(), std::greater<>());
    for (std::size_t i = 1; i < hs.size(); ++i)
        if (std::abs(hs[i - 1] / hs[i] - 2.0) > 1e-9)
            throw ConfigError("h values must be successive halvings (powers-of-two refinements)");

    for (std::size_t i = 0; i < functionals.size(); ++i) {
        const auto& f = functionals[i];
        for (auto name : required_params(f.spec.kind)) {
            const bool fixed = f.spec.params.count(std::string(name)) != 0;
            const bool axis = (name == "alpha" && !axes.alpha.empty()) || (name == "gamma" && !axes.gamma.empty()) ||
                              (name == "alpha_tilde" && !axes.alpha_tilde.empty()) ||
                              (name == "k" && !axes.k.empty());
            if (!fixed && !axis)
                throw ConfigError("functional '" + f.name + "' (" + std::string(to_string(f.spec.kind)) +
                                  ") needs '" + std::string(name) + "' as a parameter or sweep axis");
        }
        if (f.spec.kind == FunctionalKind::power_field_seminorm) {
            const double order = f.spec.get_or("order", 1.0);
            if (order != 1.0 && order != 2.0) throw ConfigError("functional '" + f.name + "': order must be 1 or 2");
        }
        if (f.spec.kind == FunctionalKind::linearized_residual && benchmark.kind == BenchmarkKind::file &&
            benchmark.f_path.empty())
            throw ConfigError("functional '" + f.name + "' needs a source: set benchmark.f_path");
    }

    if (solver.mode == FieldMode::solve) {
        if (!(solver.tol > 0.0)) throw ConfigError("solver.tol must be positive");
        if (solver.max_iter < 1) throw ConfigError("solver.max_iter must be at least 1");
        if (!(solver.damping > 0.0 && solver.damping <= 1.0)) throw ConfigError("solver.damping must lie in (0, 1]");
        for (std::size_t i = 0; i < solver.schedule.size(); ++i) {
            if (!(solver.schedule[i] > 0.0 && solver.schedule[i] < 1.0))
                throw ConfigError("solver.schedule entries must lie in (0, 1)");
            if (i > 0 && !(solver.schedule[i] < solver.schedule[i - 1]))
                throw ConfigError("solver.schedule must be strictly decreasing");
        }
        if (!solver.schedule.empty() && solver.schedule.front() < kMinColdEpsilon)
            throw ConfigError("solver.schedule must start at epsilon >= 1e-4");
        for (double p : ps)
            for (double e : axes.epsilon)
                if (e == 0.0 && p != 2.0) throw ConfigError("solve mode needs epsilon > 0 unless p = 2");
        if (benchmark.kind == BenchmarkKind::file && benchmark.f_path.empty())
            throw ConfigError("solving a file benchmark needs benchmark.f_path");
    }
    if (window.shape == WindowShape::ball && !(window.radius > window.r0 && window.r0 >= 0.0))
        throw ConfigError("window needs radius > r0 >= 0");
    if (!(window.delta >= 0.0)) throw ConfigError("window.delta must be non-negative");
    if (!(exponents.cz > 0.0)) throw ConfigError("exponents.cz must be positive");
    if (!output.csv && !output.json) throw ConfigError("output.formats must name csv, json or both");
}

ExperimentConfig parse_config(std::string_view text)
{
    Parser ps;
    std::string section;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view raw = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++ps.line;
        const auto hash = raw.find('#');
        const auto s = trim(raw.substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') ps.fail("unterminated section header");
            section = std::string(trim(s.substr(1, s.size() - 2)));
            if (section.empty()) ps.fail("empty section name");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) ps.fail("expected key = value");
        const auto key = trim(s.substr(0, eq));
        const auto value = trim(s.substr(eq + 1));
        if (key.empty()) ps.fail("missing key");
        if (value.empty()) ps.fail("missing value for '" + std::string(key) + "'");
        ps.assign(section.empty() ? std::string(key) : section + "." + std::string(key), value);
    }
    for (std::size_t i = 0; i < ps.cfg.functionals.size(); ++i)
        if (!ps.kind_set[i]) throw ConfigError("functional '" + ps.cfg.functionals[i].name + "' has no kind");
    auto& b = ps.cfg.benchmark;
    if (b.kind == BenchmarkKind::manufactured) {
        if (!ps.lo_set) b.lo = 0.0;
        if (!ps.hi_set) b.hi = 1.0;
    }
    ps.cfg.validate();
    return ps.cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

std::string resolve_output_dir(const ExperimentConfig& cfg, const std::string& cli_override)
{
    if (!cli_override.empty()) return cli_override;
    if (const char* env = std::getenv("PLAP_OUT_DIR"); env && *env) return env;
    return cfg.output.dir;
}

} // namespace plap::lab
