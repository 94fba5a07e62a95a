#include "plap/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "plap/error.hpp"

namespace plap::exponents {

bool Interval::contains(double x) const noexcept
{
    const bool lo = lower_open ? x > lower : x >= lower;
    const bool hi = upper_open ? x < upper : x <= upper;
    return lo && hi;
}

bool Interval::empty() const noexcept
{
    if (lower < upper) return false;
    return !(lower == upper && !lower_open && !upper_open);
}

void ExponentParams::validate() const
{
    PLAP_REQUIRE(p > 1.0, "p must exceed 1");
    PLAP_REQUIRE(q >= 2.0, "q must be at least 2");
    PLAP_REQUIRE(n >= 2, "dimension n must be at least 2");
    PLAP_REQUIRE(cz_constant > 0.0, "C(n,q) must be positive");
}

QChain q_chain(double q0, double q, Bracket bracket)
{
    PLAP_REQUIRE(std::isfinite(q0) && std::isfinite(q), "q0 and q must be finite");
    PLAP_REQUIRE(q0 > 2.0, "q0 must exceed 2 for the chain q_N = 2(q_{N-1} - 1) to increase");
    if (bracket == Bracket::strict) {
        if (!(q > q0)) {
            std::ostringstream os;
            os << "q = " << q << " violates the strict bracket q_N < q <= q_{N+1} (needs q > q0 = " << q0 << ")";
            throw DomainError(os.str());
        }
    } else if (!(q >= q0)) {
        std::ostringstream os;
        os << "q = " << q << " violates the non-strict bracket q_N <= q < q_{N+1} (needs q >= q0 = " << q0 << ")";
        throw DomainError(os.str());
    }

    QChain out;
    out.chain.push_back(q0);
    for (int N = 0;; ++N) {
        const double next = 2.0 * (out.chain.back() - 1.0);
        out.chain.push_back(next);
        const double lo = out.chain[static_cast<std::size_t>(N)];
        const bool hit = bracket == Bracket::strict ? (lo < q && q <= next) : (lo <= q && q < next);
        if (hit) {
            out.N = N;
            return out;
        }
    }
}

namespace {

Bound alpha_from_qN(double p, double q, double qN, int N, bool signed_f)
{
    const double scale = std::ldexp(1.0, -N);  // 2^{-N}
    if (signed_f) return {(q - qN) * scale / q * (1.0 - p) + (3.0 - p) * scale + 1.0, true};
    if (N == 0) return {4.0 - p, false};
    return {(3.0 - p) * scale + 1.0, true};
}

} // namespace

Bound alpha_threshold(const ExponentParams& params, int N)
{
    params.validate();
    PLAP_REQUIRE(N >= 0, "N must be nonnegative");
    double qN = 3.0 + params.gamma;
    for (int i = 0; i < N; ++i) qN = 2.0 * (qN - 1.0);
    return alpha_from_qN(params.p, params.q, qN, N, params.f_has_sign);
}

PWindow p_window(double q, double cz_constant, WindowMode mode)
{
    PLAP_REQUIRE(q >= 2.0, "q must be at least 2");
    PLAP_REQUIRE(cz_constant > 0.0, "C(n,q) must be positive");
    PWindow w;
    w.interval.lower = 2.0 - 1.0 / cz_constant;
    if (mode == WindowMode::third_order) {
        w.interval.upper = std::min(2.0 + 1.0 / (q - 1.0), 2.0 + 1.0 / cz_constant);
    } else {
        w.interval.upper = 2.0 + 1.0 / cz_constant;
        w.has_extra_constraint = true;
        w.extra_upper_for_p_above_2 = 2.0 + 1.0 / (q - 1.0);
    }
    return w;
}

double gamma_lower(double p)
{
    PLAP_REQUIRE(p > 1.0, "p must exceed 1");
    return std::max((p - 2.0) / (p - 1.0), 2.0 - p);
}

Bound k_threshold(double p, double alpha, bool f_has_sign)
{
    if (f_has_sign) return {(alpha + 1.0) / 2.0, true};
    return {(p + alpha) / 2.0, false};
}

StressWindow stress_window(double alpha_tilde, int n, double cz_constant)
{
    PLAP_REQUIRE(alpha_tilde >= 3.0, "the stress window needs alpha_tilde >= 3");
    PLAP_REQUIRE(n >= 2, "dimension n must be at least 2");
    PLAP_REQUIRE(cz_constant > 0.0, "C(n,q) must be positive");
    StressWindow w;
    w.q = 2.0 * (alpha_tilde - 1.0);
    w.p_interval.lower = std::max(2.0 - 1.0 / (2.0 * alpha_tilde - 1.0), 2.0 - 1.0 / cz_constant);
    w.p_interval.upper = 2.0;
    w.p_interval.lower_open = true;
    w.p_interval.upper_open = false;
    return w;
}

ExponentReport report(const ExponentParams& params, double q0_override)
{
    params.validate();
    ExponentReport r;
    r.q0 = q0_override > 0.0 ? q0_override : 3.0 + params.gamma;
    const auto qc = q_chain(r.q0, params.q, params.f_has_sign ? Bracket::strict : Bracket::nonstrict);
    r.chain = qc.chain;
    r.N = qc.N;
    r.alpha_threshold = alpha_from_qN(params.p, params.q, qc.chain[static_cast<std::size_t>(qc.N)], qc.N,
                                      params.f_has_sign);
    r.p_window = p_window(params.q, params.cz_constant, WindowMode::third_order).interval;
    r.gamma_lower = gamma_lower(params.p);
    r.k_threshold = k_threshold(params.p, r.alpha_threshold.value, params.f_has_sign);
    return r;
}

Admissibility third_order_admissible(const ExponentParams& params, double alpha)
{
    std::ostringstream os;
    if (params.p <= 1.0) return {false, "p <= 1"};
    const auto win = p_window(params.q, params.cz_constant, WindowMode::third_order).interval;
    if (!win.contains(params.p)) {
        os << "p = " << params.p << " outside (" << win.lower << ", " << win.upper << ")";
        return {false, os.str()};
    }
    const double gl = gamma_lower(params.p);
    if (!(params.gamma > gl)) {
        os << "gamma = " << params.gamma << " not above " << gl;
        return {false, os.str()};
    }
    ExponentReport r;
    try {
        r = report(params);
    } catch (const DomainError& e) {
        return {false, e.what()};
    }
    if (!r.alpha_threshold.admits(alpha)) {
        os << "alpha = " << alpha << " fails " << (r.alpha_threshold.strict ? "> " : ">= ") << r.alpha_threshold.value;
        return {false, os.str()};
    }
    return {true, "ok"};
}

Admissibility stress_admissible(double p, double alpha_tilde, int n, double cz_constant)
{
    if (alpha_tilde < 3.0) return {false, "alpha_tilde < 3"};
    const auto w = stress_window(alpha_tilde, n, cz_constant);
    if (!w.p_interval.contains(p)) {
        std::ostringstream os;
        os << "p = " << p << " outside (" << w.p_interval.lower << ", 2]";
        return {false, os.str()};
    }
    return {true, "ok"};
}

Admissibility power_field_admissible(const ExponentParams& params, double alpha, double k)
{
    auto a = third_order_admissible(params, alpha);
    if (!a.admissible) return a;
    const auto kt = k_threshold(params.p, alpha, params.f_has_sign);
    if (!kt.admits(k)) {
        std::ostringstream os;
        os << "k = " << k << " fails " << (kt.strict ? "> " : ">= ") << kt.value;
        return {false, os.str()};
    }
    return {true, "ok"};
}

nlohmann::json to_json(const Bound& b) { return {{"value", b.value}, {"strict", b.strict}}; }

nlohmann::json to_json(const Interval& i)
{
    return {{"lower", i.lower}, {"upper", i.upper}, {"lower_open", i.lower_open}, {"upper_open", i.upper_open}};
}

nlohmann::json to_json(const ExponentReport& r)
{
    return {{"q0", r.q0},
            {"chain", r.chain},
            {"N", r.N},
            {"alpha_threshold", to_json(r.alpha_threshold)},
            {"p_window", to_json(r.p_window)},
            {"gamma_lower", r.gamma_lower},
            {"k_threshold", to_json(r.k_threshold)}};
}

} // namespace plap::exponents
