#include "plap/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "plap/error.hpp"
#include "plap/jet.hpp"
#include "plap/quadrature.hpp"
#include "plap/truncation.hpp"

namespace plap {

namespace {

constexpr struct {
    FunctionalKind kind;
    std::string_view name;
} kKindNames[] = {
    {FunctionalKind::hessian_energy, "hessian_energy"},
    {FunctionalKind::inverse_weight_f, "inverse_weight_f"},
    {FunctionalKind::gradient_inverse, "gradient_inverse"},
    {FunctionalKind::third_order, "third_order"},
    {FunctionalKind::stress_seminorm, "stress_seminorm"},
    {FunctionalKind::power_field_seminorm, "power_field_seminorm"},
    {FunctionalKind::linearized_residual, "linearized_residual"},
};

} // namespace

std::string_view to_string(FunctionalKind k) noexcept
{
    for (const auto& e : kKindNames)
        if (e.kind == k) return e.name;
    return "unknown";
}

std::optional<FunctionalKind> parse_functional_kind(std::string_view s) noexcept
{
    for (const auto& e : kKindNames)
        if (e.name == s) return e.kind;
    return std::nullopt;
}

std::string_view to_string(MaskPolicy m) noexcept
{
    switch (m) {
    case MaskPolicy::exclude_Zu: return "exclude_Zu";
    case MaskPolicy::exclude_Zu_and_degenerate_hessian: return "exclude_Zu_and_degenerate_hessian";
    case MaskPolicy::none: return "none";
    }
    return "unknown";
}

std::optional<MaskPolicy> parse_mask_policy(std::string_view s) noexcept
{
    if (s == "exclude_Zu") return MaskPolicy::exclude_Zu;
    if (s == "exclude_Zu_and_degenerate_hessian") return MaskPolicy::exclude_Zu_and_degenerate_hessian;
    if (s == "none") return MaskPolicy::none;
    return std::nullopt;
}

void FunctionalSpec::require(std::initializer_list<std::string_view> names) const
{
    for (auto name : names)
        if (params.find(std::string(name)) == params.end())
            throw DomainError(std::string(to_string(kind)) + " needs parameter '" + std::string(name) + "'");
}

double FunctionalSpec::get(std::string_view name) const
{
    const auto it = params.find(std::string(name));
    if (it == params.end())
        throw DomainError(std::string(to_string(kind)) + " needs parameter '" + std::string(name) + "'");
    return it->second;
}

double FunctionalSpec::get_or(std::string_view name, double fallback) const
{
    const auto it = params.find(std::string(name));
    return it == params.end() ? fallback : it->second;
}

nlohmann::json to_json(const FunctionalValue& v)
{
    return {{"value", v.value},
            {"masked_fraction", v.masked_fraction},
            {"grid_h", v.grid_h},
            {"epsilon", v.epsilon},
            {"warnings", v.warnings}};
}

namespace {

double weight(double g, double eps, double expo)
{
    if (expo == 0.0) return 1.0;
    return eps > 0.0 ? std::pow(eps + g * g, 0.5 * expo) : std::pow(g, expo);
}

double power_or_zero(double x, double e)
{
    if (e == 0.0) return 1.0;
    return x == 0.0 && e > 0.0 ? 0.0 : std::pow(x, e);
}

double hessian_delta(const JetField& J)
{
    std::vector<double> v;
    for (std::size_t i = 0; i < J.node_count(); ++i)
        if (!J.boundary[i]) v.push_back(J.hess_norm[i]);
    double median = 0.0;
    if (!v.empty()) {
        const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
        std::nth_element(v.begin(), mid, v.end());
        median = *mid;
    }
    const double h = J.domain.max_h();
    return std::max(h * h, 1e-10) * (median > 0.0 ? median : 1.0);
}

/// Exclusion mask from the degeneracy policy; empty when nothing is excluded.
CellMask policy_mask(const JetField& J, double epsilon, MaskPolicy policy, const WindowOptions& w)
{
    if (epsilon > 0.0 || policy == MaskPolicy::none) return {};
    const double delta = w.delta > 0.0 ? w.delta : default_degenerate_delta(J);
    CellMask m = degenerate_mask(J, DegenerateKind::gradient, delta);
    if (policy == MaskPolicy::exclude_Zu_and_degenerate_hessian)
        m |= degenerate_mask(J, DegenerateKind::hessian, w.delta > 0.0 ? w.delta : hessian_delta(J));
    return m;
}

FunctionalValue finish(const GridDomain& d, std::vector<double>& values, const CellMask& excluded,
                       const WindowOptions& w, double epsilon)
{
    const std::size_t N = d.node_count();
    PLAP_REQUIRE(w.mask.size() == 0 || w.mask.size() == N, "window mask size does not match node count");
    CellMask skip(N, MaskSource::degenerate_gradient);
    std::size_t inside = 0, dropped = 0;
    for (std::size_t i = 0; i < N; ++i) {
        if (w.mask.size() != 0 && w.mask[i]) {
            skip.set(i);
            values[i] = 0.0;
            continue;
        }
        ++inside;
        if ((excluded.size() != 0 && excluded[i]) || !std::isfinite(values[i])) {
            skip.set(i);
            values[i] = 0.0;
            ++dropped;
        }
    }
    FunctionalValue out;
    out.grid_h = d.max_h();
    out.epsilon = epsilon;
    if (inside == 0) {
        out.warnings.emplace_back("window contains no nodes");
        return out;
    }
    out.masked_fraction = static_cast<double>(dropped) / static_cast<double>(inside);
    const auto q = integrate(d, values, skip, QuadratureRule::trapezoid, w.exec);
    if (q.all_masked) out.warnings.emplace_back("every node in the window was excluded");
    out.value = q.value;
    return out;
}

std::string fmt(const char* pattern, double a, double b)
{
    char buf[200];
    std::snprintf(buf, sizeof buf, pattern, a, b);
    return buf;
}

std::vector<ScalarField> split_components(const VectorField& V)
{
    std::vector<ScalarField> out;
    for (int c = 0; c < V.components(); ++c) out.push_back(V.component(c));
    return out;
}

// Derivatives of a derived field are only trustworthy `margin` nodes away from
// the boundary; nodes closer take the value of the nearest trusted node.
void copy_margin(const GridDomain& d, std::vector<double>& values, int margin)
{
    for (std::size_t i = 0; i < values.size(); ++i) {
        Index3 idx = d.index(i);
        if (d.boundary_distance(idx) >= margin) continue;
        for (int a = 0; a < d.dim(); ++a) idx[a] = std::clamp(idx[a], margin, d.cells(a) - margin);
        values[i] = values[d.flat(idx)];
    }
}

} // namespace

FunctionalValue hessian_energy(const ScalarField& u, double p, double beta, double epsilon, const WindowOptions& w)
{
    PLAP_REQUIRE(epsilon >= 0.0, "epsilon must be non-negative");
    const JetField J = jet(u, 2, w.exec);
    std::vector<double> v(J.node_count());
    const double expo = p - 2.0 - beta;
    for_each_node(v.size(), w.exec, [&](std::size_t i) {
        v[i] = weight(J.grad_norm[i], epsilon, expo) * J.hess_norm[i] * J.hess_norm[i];
    });
    return finish(u.domain(), v, policy_mask(J, epsilon, MaskPolicy::exclude_Zu, w), w, epsilon);
}

FunctionalValue inverse_weight_f(const ScalarField& u, const ScalarField& f, double p, double q_dual, double epsilon,
                                 const WindowOptions& w)
{
    PLAP_REQUIRE(epsilon >= 0.0, "epsilon must be non-negative");
    PLAP_REQUIRE(f.domain() == u.domain(), "f and u live on different grids");
    const JetField J = jet(u, 1, w.exec);
    std::vector<double> v(J.node_count());
    const double expo = -q_dual * (p - 2.0);
    for_each_node(v.size(), w.exec, [&](std::size_t i) { v[i] = f[i] * f[i] * weight(J.grad_norm[i], epsilon, expo); });
    auto out = finish(u.domain(), v, policy_mask(J, epsilon, MaskPolicy::exclude_Zu, w), w, epsilon);
    if (p > 2.0 && q_dual >= (p - 1.0) / (p - 2.0))
        out.warnings.push_back(fmt("q = %g is not below (p-1)/(p-2) = %g", q_dual, (p - 1.0) / (p - 2.0)));
    return out;
}

FunctionalValue gradient_inverse(const ScalarField& u, double p, double r, const WindowOptions& w)
{
    const JetField J = jet(u, 1, w.exec);
    std::vector<double> v(J.node_count());
    const double expo = -(p - 1.0) * r;
    for_each_node(v.size(), w.exec, [&](std::size_t i) { v[i] = std::pow(J.grad_norm[i], expo); });
    auto out = finish(u.domain(), v, policy_mask(J, 0.0, MaskPolicy::exclude_Zu, w), w, 0.0);
    if (r >= 1.0) out.warnings.push_back(fmt("r = %g is not below %g", r, 1.0));
    return out;
}

FunctionalValue third_order_functional(const ScalarField& u, double p, double alpha, double gamma, double epsilon,
                                       MaskPolicy policy, const WindowOptions& w)
{
    PLAP_REQUIRE(epsilon >= 0.0, "epsilon must be non-negative");
    if (gamma < 1.0 && epsilon == 0.0 && policy != MaskPolicy::exclude_Zu_and_degenerate_hessian)
        throw DomainError("gamma < 1 needs mask policy exclude_Zu_and_degenerate_hessian");
    const JetField J = jet(u, 3, w.exec);
    std::vector<double> v(J.node_count());
    const double expo = p - 2.0 + alpha;
    for_each_node(v.size(), w.exec, [&](std::size_t i) {
        const double t2 = J.third_norm[i] * J.third_norm[i];
        v[i] = t2 == 0.0 ? 0.0 : weight(J.grad_norm[i], epsilon, expo) * power_or_zero(J.hess_norm[i], gamma - 1.0) * t2;
    });
    return finish(u.domain(), v, policy_mask(J, epsilon, policy, w), w, epsilon);
}

VectorField stress_field(const ScalarField& u, double p, double epsilon, Exec exec)
{
    PLAP_REQUIRE(epsilon >= 0.0, "epsilon must be non-negative");
    const JetField J = jet(u, 1, exec);
    const int n = J.dim();
    std::vector<double> v(J.node_count() * static_cast<std::size_t>(n), 0.0);
    for_each_node(J.node_count(), exec, [&](std::size_t i) {
        const double g = J.grad_norm[i];
        if (epsilon == 0.0 && g == 0.0) return;
        const double a = weight(g, epsilon, p - 2.0);
        for (int c = 0; c < n; ++c) v[i * n + c] = a * J.g(i, c);
    });
    return VectorField(u.domain(), std::move(v));
}

StressSeminorm stress_sobolev_seminorm(const ScalarField& u, double p, double alpha_tilde, double epsilon,
                                       const WindowOptions& w)
{
    PLAP_REQUIRE(epsilon >= 0.0, "epsilon must be non-negative");
    PLAP_REQUIRE(alpha_tilde >= 1.0, "alpha_tilde must be at least 1");
    const JetField J = jet(u, 2, w.exec);
    const int n = J.dim();
    const std::size_t N = J.node_count();
    // at p = 2 the stress is the gradient itself and nothing degenerates
    const CellMask excl = policy_mask(J, epsilon, p == 2.0 ? MaskPolicy::none : MaskPolicy::exclude_Zu, w);

    const auto comps = split_components(stress_field(u, p, epsilon, w.exec));
    std::vector<JetField> dv;
    for (const auto& c : comps) dv.push_back(jet(c, 1, w.exec));

    std::vector<double> direct(N), expansion(N), entry(N);
    for_each_node(N, w.exec, [&](std::size_t i) {
        double s = 0.0;
        for (int c = 0; c < n; ++c)
            for (int a = 0; a < n; ++a) s += dv[c].g(i, a) * dv[c].g(i, a);
        direct[i] = power_or_zero(std::sqrt(s), alpha_tilde);

        const double g = J.grad_norm[i];
        const double base = epsilon + g * g;
        const double a = weight(g, epsilon, p - 2.0);
        double e2 = 0.0;
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) {
                double proj = 0.0;
                for (int k = 0; k < n; ++k) proj += J.g(i, k) * J.H(i, k, c);
                const double d = a * (J.H(i, r, c) + (p - 2.0) * J.g(i, r) * proj / base);
                e2 += d * d;
            }
        }
        expansion[i] = power_or_zero(std::sqrt(e2), alpha_tilde);

        double sum_kl = 0.0;
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) sum_kl += power_or_zero(std::abs(J.H(i, k, l)), alpha_tilde - 2.0);
        entry[i] = weight(g, epsilon, alpha_tilde * (p - 2.0)) * J.hess_norm[i] * J.hess_norm[i] * sum_kl;
    });

    copy_margin(u.domain(), direct, 2);

    StressSeminorm out;
    out.direct = finish(u.domain(), direct, excl, w, epsilon);
    out.expansion = finish(u.domain(), expansion, excl, w, epsilon);
    out.entry_sum = finish(u.domain(), entry, excl, w, epsilon);
    const double ref = std::abs(out.expansion.value);
    out.discrepancy = ref > 0.0 ? std::abs(out.direct.value - out.expansion.value) / ref
                                : std::abs(out.direct.value);
    out.cross_check_ok = out.discrepancy <= kStressCrossCheckTolerance;
    if (!out.cross_check_ok)
        out.direct.warnings.push_back(
            fmt("direct and chain-rule stress seminorms differ by %.3g (tolerance %.3g)", out.discrepancy,
                kStressCrossCheckTolerance));
    return out;
}

VectorField power_vector_field(const ScalarField& u, double k, double epsilon, Exec exec)
{
    PLAP_REQUIRE(epsilon >= 0.0, "epsilon must be non-negative");
    const JetField J = jet(u, 1, exec);
    const int n = J.dim();
    std::vector<double> v(J.node_count() * static_cast<std::size_t>(n), 0.0);
    for_each_node(J.node_count(), exec, [&](std::size_t i) {
        const double g = J.grad_norm[i];
        if (g == 0.0) return;
        const double a = cutoff_h(g, epsilon) * std::pow(g, k - 2.0);
        for (int c = 0; c < n; ++c) v[i * n + c] = a * J.g(i, c);
    });
    return VectorField(u.domain(), std::move(v));
}

FunctionalValue power_field_seminorm(const ScalarField& u, double k, double r_exp, int order, double epsilon,
                                     double p, const WindowOptions& w)
{
    PLAP_REQUIRE(order == 1 || order == 2, "power field seminorm order must be 1 or 2");
    PLAP_REQUIRE(r_exp > 0.0, "integrability exponent must be positive");
    const JetField J = jet(u, 1, w.exec);
    const int n = J.dim();
    const std::size_t N = J.node_count();
    std::vector<JetField> dv;
    for (const auto& c : split_components(power_vector_field(u, k, epsilon, w.exec))) dv.push_back(jet(c, order, w.exec));

    std::vector<double> v(N);
    for_each_node(N, w.exec, [&](std::size_t i) {
        double s = 0.0;
        for (int c = 0; c < n; ++c) {
            if (order == 1) {
                for (int a = 0; a < n; ++a) s += dv[c].g(i, a) * dv[c].g(i, a);
            } else {
                s += dv[c].hess_norm[i] * dv[c].hess_norm[i];
            }
        }
        v[i] = power_or_zero(std::sqrt(s), r_exp);
    });
    copy_margin(u.domain(), v, 1 + order);
    auto out = finish(u.domain(), v, policy_mask(J, epsilon, MaskPolicy::exclude_Zu, w), w, epsilon);
    if (p > 1.0 && k <= 0.5 * (p - 1.0))
        out.warnings.push_back(fmt("k = %g is not above (p-1)/2 = %g", k, 0.5 * (p - 1.0)));
    return out;
}

LinearizedResidual linearized_residual(const ScalarField& u, const ScalarField& f, const ScalarField& phi, int i,
                                       int j, double p, const WindowOptions& w)
{
    const GridDomain& d = u.domain();
    PLAP_REQUIRE(f.domain() == d && phi.domain() == d, "u, f and phi live on different grids");
    PLAP_REQUIRE(i >= 0 && i < d.dim() && j >= 0 && j < d.dim(), "direction index out of range");
    const int margin = 3;
    for (std::size_t k = 0; k < d.node_count(); ++k)
        if (phi[k] != 0.0 && d.boundary_distance(d.index(k)) <= margin)
            throw DomainError("test function support reaches the boundary margin");

    const JetField U = jet(u, 3, w.exec);
    const JetField F = jet(f, 2, w.exec);
    const JetField P = jet(phi, 1, w.exec);
    const int n = d.dim();
    const std::size_t N = d.node_count();
    const double delta = w.delta > 0.0 ? w.delta : default_degenerate_delta(U);
    const double c = p - 2.0;

    std::array<std::vector<double>, 7> parts;
    for (auto& part : parts) part.assign(N, 0.0);
    CellMask skip(N, MaskSource::degenerate_gradient);
    std::size_t support = 0, dropped = 0;
    for (std::size_t k = 0; k < N; ++k) {
        bool in_support = phi[k] != 0.0;
        for (int a = 0; a < n && !in_support; ++a) in_support = P.g(k, a) != 0.0;
        if (w.mask.size() != 0 && w.mask[k]) in_support = false;
        if (!in_support) {
            skip.set(k);
            continue;
        }
        ++support;
        const double G = U.grad_norm[k];
        if (G < delta) {
            skip.set(k);
            ++dropped;
            continue;
        }
        auto dot = [n](auto&& x, auto&& y) {
            double s = 0.0;
            for (int a = 0; a < n; ++a) s += x(a) * y(a);
            return s;
        };
        auto gu = [&](int a) { return U.g(k, a); };
        auto gphi = [&](int a) { return P.g(k, a); };
        auto du_i = [&](int a) { return U.H(k, i, a); };
        auto du_j = [&](int a) { return U.H(k, j, a); };
        auto du_ij = [&](int a) { return U.T(k, i, j, a); };

        parts[0][k] = std::pow(G, p - 2.0) * dot(du_ij, gphi);
        if (c != 0.0) {
            const double w4 = std::pow(G, p - 4.0);
            parts[1][k] = c * w4 * dot(gu, du_j) * dot(du_i, gphi);
            parts[2][k] = c * (p - 4.0) * std::pow(G, p - 6.0) * dot(gu, du_j) * dot(du_i, gu) * dot(gu, gphi);
            parts[3][k] = c * w4 * dot(du_ij, gu) * dot(gu, gphi);
            parts[4][k] = c * w4 * dot(du_i, du_j) * dot(gu, gphi);
            parts[5][k] = c * w4 * dot(du_i, gu) * dot(du_j, gphi);
        }
        parts[6][k] = F.H(k, i, j) * phi[k];
    }

    LinearizedResidual out;
    for (int t = 0; t < 6; ++t) out.terms[t] = integrate(d, parts[t], skip, QuadratureRule::trapezoid, w.exec).value;
    out.rhs = integrate(d, parts[6], skip, QuadratureRule::trapezoid, w.exec).value;
    double lhs = 0.0;
    for (double t : out.terms) lhs += t;
    out.value = lhs - out.rhs;
    out.masked_fraction = support ? static_cast<double>(dropped) / static_cast<double>(support) : 0.0;
    return out;
}

ScalarField bump_function(const GridDomain& domain, const Point& center, double radius)
{
    PLAP_REQUIRE(radius > 0.0, "bump radius must be positive");
    const int n = domain.dim();
    return ScalarField::sample(domain, [&](const Point& x) {
        double r2 = 0.0;
        for (int a = 0; a < n; ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
        const double t = 1.0 - r2 / (radius * radius);
        return t > 0.0 ? t * t * t * t : 0.0;
    });
}

FunctionalValue evaluate(const FunctionalSpec& spec, const ScalarField& u, const ScalarField* f,
                         const WindowOptions& window)
{
    const double eps = spec.get_or("epsilon", 0.0);
    switch (spec.kind) {
    case FunctionalKind::hessian_energy:
        return hessian_energy(u, spec.get("p"), spec.get("beta"), eps, window);
    case FunctionalKind::inverse_weight_f:
        PLAP_REQUIRE(f != nullptr, "inverse_weight_f needs the source f");
        return inverse_weight_f(u, *f, spec.get("p"), spec.get("q"), eps, window);
    case FunctionalKind::gradient_inverse:
        return gradient_inverse(u, spec.get("p"), spec.get("r"), window);
    case FunctionalKind::third_order:
        return third_order_functional(u, spec.get("p"), spec.get("alpha"), spec.get("gamma"), eps, spec.mask_policy,
                                      window);
    case FunctionalKind::stress_seminorm: {
        auto s = stress_sobolev_seminorm(u, spec.get("p"), spec.get("alpha_tilde"), eps, window);
        const int variant = static_cast<int>(spec.get_or("variant", 0.0));
        FunctionalValue v = variant == 1 ? s.entry_sum : variant == 2 ? s.expansion : s.direct;
        if (variant != 0 && !s.cross_check_ok) v.warnings = s.direct.warnings;
        return v;
    }
    case FunctionalKind::power_field_seminorm:
        return power_field_seminorm(u, spec.get("k"), spec.get("r"), static_cast<int>(spec.get_or("order", 1.0)), eps,
                                    spec.get_or("p", 0.0), window);
    case FunctionalKind::linearized_residual: {
        PLAP_REQUIRE(f != nullptr, "linearized_residual needs the source f");
        const GridDomain& d = u.domain();
        Point center{};
        double side = d.extent()[0];
        for (int a = 0; a < d.dim(); ++a) {
            center[a] = d.origin()[a] + 0.5 * d.extent()[a];
            side = std::min(side, d.extent()[a]);
        }
        const auto phi = bump_function(d, center, 0.25 * side);
        const auto r = linearized_residual(u, *f, phi, static_cast<int>(spec.get_or("i", 0.0)),
                                           static_cast<int>(spec.get_or("j", 0.0)), spec.get("p"), window);
        FunctionalValue v;
        v.value = r.value;
        v.masked_fraction = r.masked_fraction;
        v.grid_h = d.max_h();
        v.epsilon = eps;
        return v;
    }
    }
    throw DomainError("unknown functional kind");
}

} // namespace plap
