#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plap/exec.hpp"
#include "plap/lab/config.hpp"

namespace plap::lab {

enum class Verdict { bounded, divergent, inconclusive };

std::string_view to_string(Verdict v) noexcept;

/// Refinement verdict over values ordered coarse to fine: bounded when
/// max/min <= 1.25 (or every |value| <= floor), divergent when every halving
/// multiplies the value by at least 2, inconclusive otherwise or with fewer
/// than two values.
Verdict classify(std::span<const double> coarse_to_fine, double floor = 1e-12);

inline constexpr double kBoundedBand = 1.25;
inline constexpr double kDivergentFactor = 2.0;

struct Row {
    std::string functional;  // config name, or "solve"
    std::string kind;        // functional kind, or "solve"
    std::optional<double> p, epsilon, alpha, beta, gamma, q, r, k, alpha_tilde;
    double h = 0.0;
    double value = 0.0;
    double masked_fraction = 0.0;
    /// value / value at the next coarser h (absent on the coarsest grid).
    std::optional<double> ratio;
    std::string verdict = "inconclusive";
    std::string admissible = "n/a";   // admissible | inadmissible | n/a
    std::string prediction;           // bounded | divergent | "" (radial exponent test)
    std::string status = "ok";        // ok | not_converged | cross_check_failed | error: ...
    std::vector<std::string> warnings;
};

struct SweepReport {
    std::vector<Row> rows;
};

struct RunOptions {
    /// serial: rows one at a time; parallel: rows spread over OpenMP threads.
    /// Every kernel inside a row runs serially, so results do not depend on the thread count.
    Exec exec = Exec::parallel;
};

/// Runs every solve and functional evaluation of the config. Solver
/// non-convergence and per-row domain errors flag the row; the run continues.
SweepReport run(const ExperimentConfig& cfg, const RunOptions& opts = {});

} // namespace plap::lab
