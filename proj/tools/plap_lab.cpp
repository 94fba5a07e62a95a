// plap_lab: command-line driver for exponent reports, solves, functional
// evaluations, refinement sweeps, Calderon-Zygmund estimates and oracle dumps.
//
// Exit codes: 0 success, 2 configuration or argument error, 3 solver failure, 4 I/O error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "plap/error.hpp"
#include "plap/exponents.hpp"
#include "plap/field_io.hpp"
#include "plap/lab/config.hpp"
#include "plap/lab/report.hpp"
#include "plap/lab/sweep.hpp"
#include "plap/oracles.hpp"
#include "plap/solver.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

struct Globals {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 0;
    std::string format;
};

plap::lab::ExperimentConfig load(const Globals& g)
{
    if (g.config.empty()) throw plap::ConfigError("this subcommand needs --config <path>");
    auto cfg = plap::lab::load_config(g.config);
    if (g.seed_given) cfg.seed = g.seed;
    if (g.format == "csv") cfg.output.csv = true, cfg.output.json = false;
    if (g.format == "json") cfg.output.csv = false, cfg.output.json = true;
    if (g.format == "both") cfg.output.csv = cfg.output.json = true;
    return cfg;
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
    out.close();
    if (!out) throw plap::IoError("cannot write " + path);
}

std::string ensure_dir(const std::string& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw plap::IoError("cannot create output directory " + dir);
    return dir;
}

int cmd_admissible(double p, double q, double gamma, int n, double cz, bool unsigned_f, double q0,
                   std::optional<double> alpha, std::optional<double> k, std::optional<double> alpha_tilde)
{
    namespace ex = plap::exponents;
    ex::ExponentParams params{p, q, gamma, n, cz, !unsigned_f};
    params.validate();
    nlohmann::json j = ex::to_json(ex::report(params, q0));
    if (alpha) {
        const auto a = ex::third_order_admissible(params, *alpha);
        j["third_order"] = {{"alpha", *alpha}, {"admissible", a.admissible}, {"reason", a.reason}};
        if (k) {
            const auto b = ex::power_field_admissible(params, *alpha, *k);
            j["power_field"] = {{"alpha", *alpha}, {"k", *k}, {"admissible", b.admissible}, {"reason", b.reason}};
        }
    }
    if (alpha_tilde) {
        const auto w = ex::stress_window(*alpha_tilde, n, cz);
        const auto s = ex::stress_admissible(p, *alpha_tilde, n, cz);
        j["stress"] = {{"alpha_tilde", *alpha_tilde},
                       {"q", w.q},
                       {"p_interval", ex::to_json(w.p_interval)},
                       {"admissible", s.admissible},
                       {"reason", s.reason}};
    }
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_solve(const Globals& g)
{
    auto cfg = load(g);
    cfg.functionals.clear();
    cfg.solve_task = true;
    cfg.solver.mode = plap::lab::FieldMode::solve;
    plap::lab::RunOptions ro;
    ro.exec = plap::Exec::serial;
    const auto rep = plap::lab::run(cfg, ro);
    const auto dir = ensure_dir(plap::lab::resolve_output_dir(cfg, g.out));
    plap::lab::write_report(rep, dir, {cfg.output.csv, cfg.output.json});
    std::cout << plap::lab::summary_table(rep);
    for (const auto& r : rep.rows)
        if (r.status != "ok") return kExitSolver;
    return 0;
}

int cmd_sweep(const Globals& g, bool print_only)
{
    const auto cfg = load(g);
    const auto rep = plap::lab::run(cfg, {plap::Exec::parallel});
    if (print_only && g.out.empty()) {
        std::cout << plap::lab::to_json(rep).dump(2) << '\n';
        return 0;
    }
    const auto dir = plap::lab::resolve_output_dir(cfg, g.out);
    plap::lab::write_report(rep, dir, {cfg.output.csv, cfg.output.json});
    std::cout << plap::lab::summary_table(rep) << "written to " << dir << '\n';
    return 0;
}

int cmd_cz(const Globals& g, int n, double q, const std::string& mode, int cells, int family)
{
    namespace orc = plap::oracles;
    orc::CzEstimate e;
    if (mode == "known") e = orc::cz_constant_known(n, q);
    else if (mode == "estimate") e = orc::cz_constant_estimate(n, q, cells, family, g.seed);
    else throw plap::ConfigError("--mode must be known or estimate");
    nlohmann::json j{{"n", n},
                     {"q", q},
                     {"value", e.value},
                     {"kind", e.kind == orc::CzKind::known ? "known" : "lower_bound"},
                     {"family", e.family}};
    if (e.kind == orc::CzKind::lower_bound) {
        j["seed"] = e.seed;
        j["family_size"] = e.family_size;
        j["cells"] = e.cells;
    }
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_oracle(const Globals& g, const std::string& which, double p, int n, double scale, int cells, double lo,
               double hi)
{
    namespace orc = plap::oracles;
    const std::string dir = ensure_dir(g.out.empty() ? std::string("plap_oracle") : g.out);
    nlohmann::json j;
    if (which == "radial") {
        const auto d = plap::GridDomain::cube(n, lo, hi, cells);
        const auto sol = orc::radial_solution(p, n, scale);
        plap::write_field(dir + "/u.txt", sol.sample_u(d), "u");
        plap::write_field(dir + "/f.txt", sol.sample_f(d), "f");
        j = {{"benchmark", "radial"}, {"p", p}, {"n", n}, {"m", sol.m}, {"scale", scale}, {"f_value", sol.f_value}};
    } else if (which == "manufactured") {
        const auto d = plap::GridDomain::cube(n, lo, hi, cells);
        const auto mf = orc::manufactured_poisson(d);
        plap::write_field(dir + "/u.txt", mf.u, "u");
        plap::write_field(dir + "/f.txt", mf.f, "f");
        j = {{"benchmark", "manufactured"}, {"n", n}};
    } else {
        throw plap::ConfigError("--benchmark must be radial or manufactured");
    }
    j["cells"] = cells;
    j["files"] = {dir + "/u.txt", dir + "/f.txt"};
    write_text(dir + "/oracle.json", j.dump(2) + "\n");
    std::cout << j.dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"p-Laplace regularity lab"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "experiment config file");
    app.add_option("--out", g.out, "output directory (overrides PLAP_OUT_DIR and the config)");
    auto* seed_opt = app.add_option("--seed", g.seed, "seed for randomized estimators");
    app.add_option("--threads", g.threads, "OpenMP threads (0 keeps the default)")->check(CLI::NonNegativeNumber);
    app.add_option("--format", g.format, "report formats")->check(CLI::IsMember({"csv", "json", "both"}));
    app.fallthrough();

    auto* adm = app.add_subcommand("admissible", "exponent ledger and admissibility");
    double p = 2.0, q = 8.0, gamma = 1.0, cz = 1.0, q0 = 0.0;
    int n = 2;
    bool unsigned_f = false;
    std::optional<double> alpha, k, alpha_tilde;
    adm->add_option("--p", p)->required();
    adm->add_option("--q", q);
    adm->add_option("--gamma", gamma);
    adm->add_option("--n", n);
    adm->add_option("--cz", cz, "Calderon-Zygmund constant C(n,q)");
    adm->add_option("--q0", q0, "chain start (default 3 + gamma)");
    adm->add_flag("--unsigned", unsigned_f, "f without a sign condition");
    adm->add_option("--alpha", alpha);
    adm->add_option("--k", k);
    adm->add_option("--alpha-tilde", alpha_tilde);

    auto* solve = app.add_subcommand("solve", "solve the configured benchmark (eps-continuation)");
    auto* funcs = app.add_subcommand("functionals", "evaluate the configured functionals (JSON to stdout)");
    auto* sweep = app.add_subcommand("sweep", "run a refinement sweep and write reports");

    auto* czc = app.add_subcommand("cz", "Calderon-Zygmund constant");
    std::string mode = "known";
    int cz_cells = 128, family = 64, cz_n = 2;
    double cz_q = 2.0;
    czc->add_option("--n", cz_n);
    czc->add_option("--q", cz_q);
    czc->add_option("--mode", mode)->check(CLI::IsMember({"known", "estimate"}));
    czc->add_option("--cells", cz_cells);
    czc->add_option("--family", family);

    auto* orc = app.add_subcommand("oracle", "dump exact fields in the field file format");
    std::string which = "radial";
    double op = 1.5, scale = 1.0, lo = -1.0, hi = 1.0;
    int on = 2, ocells = 64;
    orc->add_option("--benchmark", which)->check(CLI::IsMember({"radial", "manufactured"}));
    orc->add_option("--p", op);
    orc->add_option("--n", on);
    orc->add_option("--scale", scale);
    orc->add_option("--cells", ocells);
    orc->add_option("--lo", lo);
    orc->add_option("--hi", hi);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }
    g.seed_given = seed_opt->count() > 0;
    if (g.threads > 0) plap::set_threads(g.threads);

    try {
        if (adm->parsed()) return cmd_admissible(p, q, gamma, n, cz, unsigned_f, q0, alpha, k, alpha_tilde);
        if (solve->parsed()) return cmd_solve(g);
        if (funcs->parsed()) return cmd_sweep(g, true);
        if (sweep->parsed()) return cmd_sweep(g, false);
        if (czc->parsed()) return cmd_cz(g, cz_n, cz_q, mode, cz_cells, family);
        if (orc->parsed()) return cmd_oracle(g, which, op, on, scale, ocells, lo, hi);
    } catch (const plap::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const plap::DomainError& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return kExitConfig;
    } catch (const plap::SolverError& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return kExitSolver;
    } catch (const plap::IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kExitIo;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kExitIo;
    }
    return 0;
}
