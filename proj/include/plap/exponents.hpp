#pragma once

// Closed-form exponent bookkeeping for the weighted third-order and
// stress-field estimates: the q-chain recursion, alpha thresholds, the
// p-windows driven by the Calderon-Zygmund constant C(n,q), the gamma lower
// bound, k thresholds and the stress window.
//
// Bounds carry their strictness; nothing here collapses an open end to a
// closed one.

#include <string>
#include <vector>

#include <json.hpp>

namespace plap::exponents {

/// Lower bound on a parameter: x > value (strict) or x >= value.
struct Bound {
    double value = 0.0;
    bool strict = true;

    [[nodiscard]] bool admits(double x) const noexcept { return strict ? x > value : x >= value; }
};

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
    bool lower_open = true;
    bool upper_open = true;

    [[nodiscard]] bool contains(double x) const noexcept;
    [[nodiscard]] bool empty() const noexcept;
};

enum class Bracket {
    strict,    // q_N <  q <= q_{N+1}
    nonstrict  // q_N <= q <  q_{N+1}
};

struct QChain {
    int N = 0;
    std::vector<double> chain;  // q_0 .. q_{N+1}
};

struct ExponentParams {
    double p = 2.0;
    double q = 2.0;
    double gamma = 1.0;
    int n = 2;
    double cz_constant = 1.0;
    bool f_has_sign = true;

    /// Throws DomainError on p <= 1, q < 2, n < 2 or C <= 0.
    void validate() const;
};

/// q_{i+1} = 2 (q_i - 1) from q0, stopped at the first bracket containing q.
QChain q_chain(double q0, double q, Bracket bracket);

/// Alpha threshold for a given N, with q0 = 3 + gamma.
/// Signed f: strict (q - q_N)/(2^N q) (1 - p) + (3 - p)/2^N + 1.
/// Unsigned f: strict (3 - p)/2^N + 1 for N >= 1, non-strict 4 - p for N = 0.
Bound alpha_threshold(const ExponentParams& params, int N);

enum class WindowMode { third_order, w2q };

struct PWindow {
    Interval interval;
    /// w2q only: for p > 2 the extra requirement q < (p-1)/(p-2), i.e. p < 2 + 1/(q-1).
    double extra_upper_for_p_above_2 = 0.0;
    bool has_extra_constraint = false;
};

PWindow p_window(double q, double cz_constant, WindowMode mode);

/// max{(p-2)/(p-1), 2-p}; gamma must exceed it.
double gamma_lower(double p);

/// Signed f: k > (alpha+1)/2. Unsigned: k >= (p+alpha)/2.
Bound k_threshold(double p, double alpha, bool f_has_sign);

struct StressWindow {
    double q = 0.0;  // 2 (alpha_tilde - 1)
    Interval p_interval;
};

/// alpha_tilde >= 3; p in (max{2 - 1/(2 alpha_tilde - 1), 2 - 1/C}, 2].
StressWindow stress_window(double alpha_tilde, int n, double cz_constant);

struct ExponentReport {
    double q0 = 0.0;
    std::vector<double> chain;
    int N = 0;
    Bound alpha_threshold;
    Interval p_window;
    double gamma_lower = 0.0;
    /// k threshold evaluated at alpha = alpha_threshold.value.
    Bound k_threshold;
};

/// Full ledger for (p, q, gamma, C, sign). q0 defaults to 3 + gamma. The
/// bracket is strict for signed f and non-strict otherwise.
ExponentReport report(const ExponentParams& params, double q0_override = 0.0);

/// Admissibility of (p, q, gamma, alpha) for the weighted third-order estimate.
struct Admissibility {
    bool admissible = false;
    std::string reason;
};

Admissibility third_order_admissible(const ExponentParams& params, double alpha);
Admissibility stress_admissible(double p, double alpha_tilde, int n, double cz_constant);
Admissibility power_field_admissible(const ExponentParams& params, double alpha, double k);

nlohmann::json to_json(const Bound& b);
nlohmann::json to_json(const Interval& i);
nlohmann::json to_json(const ExponentReport& r);

} // namespace plap::exponents
