#pragma once

// Experiment configuration: a flat key = value text file.
//
//   # comment (also after a value)
//   [benchmark]            keys below are read as benchmark.<key>
//   kind = radial
//   sweep.p = 1.8, 2.0     dotted keys work outside sections too
//   [functional.third]     one section per functional; the suffix names it
//   kind = third_order
//
// Lists are comma separated. Numbers accept a fraction form a/b (for h).
// The full grammar and every key are documented in README.md.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plap/functional_spec.hpp"
#include "plap/linear.hpp"

namespace plap::lab {

enum class BenchmarkKind { radial, manufactured, file };
enum class FieldMode { sample, solve };
enum class WindowShape { box, ball };

struct Benchmark {
    BenchmarkKind kind = BenchmarkKind::radial;
    int n = 2;
    double p = 2.0;  // used when the p axis is empty
    double scale = 1.0;
    double lo = -1.0;
    double hi = 1.0;
    int cells = 64;  // used when the h axis is empty
    std::string path;    // file benchmark: u
    std::string f_path;  // file benchmark: optional f (zero otherwise)
};

struct Axes {
    std::vector<double> p, epsilon, h, alpha, gamma, alpha_tilde, k;
};

struct NamedFunctional {
    std::string name;
    FunctionalSpec spec;
};

struct SolverSettings {
    FieldMode mode = FieldMode::sample;
    double tol = 1e-8;
    int max_iter = 200;
    double damping = 0.7;
    std::vector<double> schedule{1e-2, 1e-3, 1e-4};
    linear::Preconditioner preconditioner = linear::Preconditioner::multigrid;
};

struct WindowSettings {
    WindowShape shape = WindowShape::box;
    double radius = 1.0;
    double r0 = 0.0;
    /// Degeneracy threshold for |grad u|; 0 selects the grid-dependent default.
    double delta = 0.0;
};

struct ExponentSettings {
    double q = 8.0;
    double cz = 1.0;
    bool f_has_sign = true;
    /// Stress rows record gamma = 2 alpha_tilde - 5 unless switched off.
    bool couple_gamma = true;
};

struct OutputSettings {
    std::string dir = "plap_out";
    bool csv = true;
    bool json = true;
};

struct ExperimentConfig {
    Benchmark benchmark;
    Axes axes;
    std::vector<NamedFunctional> functionals;
    /// Emit one row per solve (error against the exact solution when known).
    bool solve_task = false;
    SolverSettings solver;
    WindowSettings window;
    ExponentSettings exponents;
    OutputSettings output;
    std::uint64_t seed = 0;

    /// Throws ConfigError describing the first problem found.
    void validate() const;
    /// Grid spacings to run: the h axis, or the single spacing from benchmark.cells.
    [[nodiscard]] std::vector<double> spacings() const;
    /// Cells per axis for spacing h (checked to be a whole number).
    [[nodiscard]] int cells_for(double h) const;
};

/// Parses and validates. Errors name the offending line.
ExperimentConfig parse_config(std::string_view text);
/// Throws IoError when the file cannot be read.
ExperimentConfig load_config(const std::string& path);

/// Output directory: the explicit override if non-empty, else PLAP_OUT_DIR if set, else the config value.
std::string resolve_output_dir(const ExperimentConfig& cfg, const std::string& cli_override = {});

/// Number literal with optional a/b fraction form.
std::optional<double> parse_number(std::string_view s);

} // namespace plap::lab
