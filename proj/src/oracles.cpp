#include "plap/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "plap/error.hpp"
#include "plap/jet.hpp"
#include "plap/truncation.hpp"

namespace plap::oracles {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double radius(const Point& x, int n)
{
    double r2 = 0.0;
    for (int a = 0; a < n; ++a) r2 += x[a] * x[a];
    return std::sqrt(r2);
}

double sphere_measure(int n)
{
    switch (n) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    default: return 4.0 * std::numbers::pi;
    }
}

} // namespace

RadialSolution radial_solution(double p, int n, double scale)
{
    PLAP_REQUIRE(p > 1.0, "p must exceed 1");
    PLAP_REQUIRE(n >= 1 && n <= 3, "dimension must be 1, 2 or 3");
    PLAP_REQUIRE(scale != 0.0 && std::isfinite(scale), "scale must be finite and nonzero");
    RadialSolution s;
    s.p = p;
    s.n = n;
    s.m = p / (p - 1.0);
    s.scale = scale;
    s.sign = scale > 0.0 ? 1 : -1;
    s.f_value = -s.sign * n * std::pow(std::abs(scale) * s.m, p - 1.0);
    return s;
}

double RadialSolution::u(const Point& x) const { return scale * std::pow(radius(x, n), m); }

std::array<double, 3> RadialSolution::grad(const Point& x) const
{
    std::array<double, 3> g{0.0, 0.0, 0.0};
    const double r = radius(x, n);
    if (r == 0.0) return g;  // m > 1
    const double c = scale * m * std::pow(r, m - 2.0);
    for (int a = 0; a < n; ++a) g[a] = c * x[a];
    return g;
}

std::array<double, 9> RadialSolution::hess(const Point& x) const
{
    std::array<double, 9> H{};
    const double r = radius(x, n);
    if (r == 0.0) {
        const double diag = m > 2.0 ? 0.0 : m == 2.0 ? 2.0 * scale : kInf;
        for (int a = 0; a < n; ++a) H[a * 3 + a] = diag;
        return H;
    }
    const double c0 = scale * m * std::pow(r, m - 2.0);
    const double c1 = scale * m * (m - 2.0) * std::pow(r, m - 4.0);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) H[a * 3 + b] = (a == b ? c0 : 0.0) + c1 * x[a] * x[b];
    return H;
}

std::array<double, 27> RadialSolution::third(const Point& x) const
{
    std::array<double, 27> T{};
    const double r = radius(x, n);
    if (r == 0.0) {
        // the limit exists only for m > 3 (zero) or m = 2 (D^3 u = 0)
        const double v = (m > 3.0 || m == 2.0) ? 0.0 : kInf;
        T.fill(v);
        return T;
    }
    const double c1 = scale * m * (m - 2.0) * std::pow(r, m - 4.0);
    const double c2 = c1 * (m - 4.0) / (r * r);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                double v = c2 * x[a] * x[b] * x[c];
                if (a == b) v += c1 * x[c];
                if (a == c) v += c1 * x[b];
                if (b == c) v += c1 * x[a];
                T[(a * 3 + b) * 3 + c] = v;
            }
    return T;
}

double RadialSolution::grad_norm(double r) const { return std::abs(scale) * m * std::pow(r, m - 1.0); }

double RadialSolution::hess_norm(double r) const
{
    return std::abs(scale) * m * std::pow(r, m - 2.0) * std::sqrt((m - 1.0) * (m - 1.0) + (n - 1.0));
}

double RadialSolution::third_norm(double r) const
{
    if (m == 2.0) return 0.0;
    return std::abs(scale * m * (m - 2.0)) * std::pow(r, m - 3.0) *
           std::sqrt((m - 1.0) * (m - 1.0) + 3.0 * (n - 1.0));
}

ScalarField RadialSolution::sample_u(const GridDomain& d) const
{
    PLAP_REQUIRE(d.dim() == n, "grid dimension differs from the radial solution");
    return ScalarField::sample(d, [this](const Point& x) { return u(x); });
}

ScalarField RadialSolution::sample_f(const GridDomain& d) const
{
    PLAP_REQUIRE(d.dim() == n, "grid dimension differs from the radial solution");
    return ScalarField(d, f_value);
}

RadialExponent leading_exponent(const FunctionalSpec& spec, const RadialSolution& sol)
{
    const double m = sol.m, p = sol.p;
    const double a1 = m - 1.0, a2 = m - 2.0, a3 = m - 3.0;
    const double eps = spec.get_or("epsilon", 0.0);
    RadialExponent e;
    switch (spec.kind) {
    case FunctionalKind::hessian_energy:
        e.sigma = (eps > 0.0 ? 0.0 : a1 * (p - 2.0 - spec.get("beta"))) + 2.0 * a2;
        break;
    case FunctionalKind::inverse_weight_f:
        e.sigma = eps > 0.0 ? 0.0 : -a1 * spec.get("q") * (p - 2.0);
        break;
    case FunctionalKind::gradient_inverse:
        e.sigma = -a1 * (p - 1.0) * spec.get("r");
        break;
    case FunctionalKind::third_order:
        if (m == 2.0) {
            e.vanishes = true;
            break;
        }
        e.sigma = (eps > 0.0 ? 0.0 : a1 * (p - 2.0 + spec.get("alpha"))) + a2 * (spec.get("gamma") - 1.0) + 2.0 * a3;
        break;
    case FunctionalKind::stress_seminorm: {
        const double at = spec.get("alpha_tilde");
        // at eps = 0 the exact stress is linear in x, so both variants are bounded
        e.sigma = eps > 0.0 ? at * a2 : 0.0;
        break;
    }
    case FunctionalKind::power_field_seminorm: {
        if (eps > 0.0) {
            e.vanishes = true;  // h_eps kills the field where |grad u| < eps
            break;
        }
        const double s = a1 * spec.get("k");
        const double order = spec.get_or("order", 1.0);
        if (order == 2.0 && s == 1.0) {
            e.vanishes = true;
            break;
        }
        e.sigma = spec.get("r") * (s - order);
        break;
    }
    case FunctionalKind::linearized_residual:
        throw DomainError("no radial oracle for linearized_residual");
    }
    return e;
}

bool predicts_divergence(const FunctionalSpec& spec, const RadialSolution& sol)
{
    const auto e = leading_exponent(spec, sol);
    return !e.vanishes && e.sigma <= -static_cast<double>(sol.n);
}

namespace {

// angular integral over the unit sphere of sum_kl |delta_kl + c xhat_k xhat_l|^power
double angular_entry_sum(int n, double c, double power)
{
    auto entries = [&](const std::array<double, 3>& xh) {
        double s = 0.0;
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
                const double v = std::abs((k == l ? 1.0 : 0.0) + c * xh[k] * xh[l]);
                s += v == 0.0 ? (power == 0.0 ? 1.0 : 0.0) : std::pow(v, power);
            }
        return s;
    };
    using boost::math::quadrature::gauss;
    const double pi = std::numbers::pi;
    if (n == 1) return entries({1.0, 0.0, 0.0}) + entries({-1.0, 0.0, 0.0});
    if (n == 2) {
        double total = 0.0;
        for (int k = 0; k < 8; ++k) {
            const double a = k * pi / 4.0;
            total += gauss<double, 30>::integrate(
                [&](double t) { return entries({std::cos(t), std::sin(t), 0.0}); }, a, a + pi / 4.0);
        }
        return total;
    }
    double total = 0.0;
    for (int i = 0; i < 4; ++i) {
        const double t0 = i * pi / 4.0;
        for (int j = 0; j < 8; ++j) {
            const double f0 = j * pi / 4.0;
            total += gauss<double, 20>::integrate(
                [&](double th) {
                    return std::sin(th) * gauss<double, 20>::integrate(
                                              [&](double ph) {
                                                  return entries({std::sin(th) * std::cos(ph),
                                                                  std::sin(th) * std::sin(ph), std::cos(th)});
                                              },
                                              f0, f0 + pi / 4.0);
                },
                t0, t0 + pi / 4.0);
        }
    }
    return total;
}

} // namespace

std::optional<double> radial_functional_exact(const FunctionalSpec& spec, const RadialSolution& sol, double r0,
                                              double R)
{
    PLAP_REQUIRE(r0 >= 0.0 && R > r0, "need 0 <= r0 < R");
    if (r0 == 0.0 && predicts_divergence(spec, sol)) return std::nullopt;
    if (r0 == 0.0 && leading_exponent(spec, sol).vanishes && spec.kind == FunctionalKind::third_order) return 0.0;

    const double p = sol.p, m = sol.m, s = std::abs(sol.scale);
    const int n = sol.n;
    const double eps = spec.get_or("epsilon", 0.0);
    auto g = [&](double r) { return sol.grad_norm(r); };
    auto gp = [&](double r) { return s * m * (m - 1.0) * std::pow(r, m - 2.0); };
    auto gpp = [&](double r) { return s * m * (m - 1.0) * (m - 2.0) * std::pow(r, m - 3.0); };
    auto weight = [&](double r, double expo) {
        const double gg = g(r);
        return eps > 0.0 ? std::pow(eps + gg * gg, 0.5 * expo) : std::pow(gg, expo);
    };

    std::function<double(double)> c;  // integrand as a function of r (angular average included)
    double angular = sphere_measure(n);
    std::vector<double> breaks;
    auto add_break_at_grad = [&](double t) {
        if (t <= 0.0) return;
        const double r = std::pow(t / (s * m), 1.0 / (m - 1.0));
        if (r > r0 && r < R) breaks.push_back(r);
    };

    switch (spec.kind) {
    case FunctionalKind::hessian_energy: {
        const double beta = spec.get("beta");
        c = [&, beta](double r) {
            const double hn = sol.hess_norm(r);
            return weight(r, p - 2.0 - beta) * hn * hn;
        };
        break;
    }
    case FunctionalKind::inverse_weight_f: {
        const double q = spec.get("q");
        c = [&, q](double r) { return sol.f_value * sol.f_value / weight(r, q * (p - 2.0)); };
        break;
    }
    case FunctionalKind::gradient_inverse: {
        const double rr = spec.get("r");
        c = [&, rr](double r) { return std::pow(g(r), -(p - 1.0) * rr); };
        break;
    }
    case FunctionalKind::third_order: {
        const double alpha = spec.get("alpha"), gamma = spec.get("gamma");
        c = [&, alpha, gamma](double r) {
            const double tn = sol.third_norm(r);
            if (tn == 0.0) return 0.0;
            return weight(r, p - 2.0 + alpha) * std::pow(sol.hess_norm(r), gamma - 1.0) * tn * tn;
        };
        break;
    }
    case FunctionalKind::stress_seminorm: {
        const double at = spec.get("alpha_tilde");
        const int variant = static_cast<int>(spec.get_or("variant", 0.0));
        if (variant == 0) {
            // V = phi(r) xhat, |DV|^2 = phi'^2 + (n-1) (phi/r)^2
            c = [&, at](double r) {
                const double gg = g(r);
                const double base = eps + gg * gg;
                const double phi = std::pow(base, 0.5 * (p - 2.0)) * gg;
                const double dphi = std::pow(base, 0.5 * (p - 4.0)) * (eps + (p - 1.0) * gg * gg) * gp(r);
                const double norm = std::sqrt(dphi * dphi + (n - 1.0) * (phi / r) * (phi / r));
                return std::pow(norm, at);
            };
        } else {
            angular = angular_entry_sum(n, m - 2.0, at - 2.0);
            c = [&, at](double r) {
                const double hn = sol.hess_norm(r);
                const double entry = s * m * std::pow(r, m - 2.0);
                return weight(r, at * (p - 2.0)) * hn * hn * std::pow(entry, at - 2.0);
            };
        }
        add_break_at_grad(std::sqrt(eps));
        break;
    }
    case FunctionalKind::power_field_seminorm: {
        const double k = spec.get("k"), rexp = spec.get("r");
        const int order = static_cast<int>(spec.get_or("order", 1.0));
        PLAP_REQUIRE(order == 1 || order == 2, "power field seminorm order must be 1 or 2");
        auto H = [=](double t) { return cutoff_h(t, eps) * std::pow(t, k - 1.0); };
        auto H1 = [=](double t) {
            return cutoff_h_d1(t, eps) * std::pow(t, k - 1.0) + (k - 1.0) * cutoff_h(t, eps) * std::pow(t, k - 2.0);
        };
        auto H2 = [=](double t) {
            return cutoff_h_d2(t, eps) * std::pow(t, k - 1.0) +
                   2.0 * (k - 1.0) * cutoff_h_d1(t, eps) * std::pow(t, k - 2.0) +
                   (k - 1.0) * (k - 2.0) * cutoff_h(t, eps) * std::pow(t, k - 3.0);
        };
        c = [=, &g, &gp, &gpp](double r) {
            const double t = g(r);
            const double psi = H(t);
            const double dpsi = H1(t) * gp(r);
            double norm;
            if (order == 1) {
                norm = std::sqrt(dpsi * dpsi + (n - 1.0) * (psi / r) * (psi / r));
            } else {
                const double d2psi = H2(t) * gp(r) * gp(r) + H1(t) * gpp(r);
                const double chi1 = dpsi / r - psi / (r * r);
                const double chi2 = d2psi / r - 2.0 * dpsi / (r * r) + 2.0 * psi / (r * r * r);
                const double radial = 2.0 * chi1 + r * chi2;
                norm = std::sqrt(radial * radial + 3.0 * (n - 1.0) * chi1 * chi1);
            }
            return norm == 0.0 ? 0.0 : std::pow(norm, rexp);
        };
        if (eps > 0.0) {
            add_break_at_grad(eps);
            add_break_at_grad(2.0 * eps);
        }
        break;
    }
    case FunctionalKind::linearized_residual:
        throw DomainError("no radial oracle for linearized_residual");
    }
    if (eps > 0.0) add_break_at_grad(std::sqrt(eps));

    breaks.push_back(r0);
    breaks.push_back(R);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    boost::math::quadrature::tanh_sinh<double> integrator;
    auto shell = [&](double r) {
        if (r <= 0.0) return 0.0;
        const double v = c(r) * std::pow(r, n - 1.0);
        return std::isfinite(v) ? v : 0.0;
    };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) total += integrator.integrate(shell, breaks[i], breaks[i + 1], 1e-10);
    return angular * total;
}

Manufactured manufactured_poisson(const GridDomain& d)
{
    const double pi = std::numbers::pi;
    const int n = d.dim();
    auto u = ScalarField::sample(d, [n, pi](const Point& x) {
        double v = 1.0;
        for (int a = 0; a < n; ++a) v *= std::sin(pi * x[a]);
        return v;
    });
    std::vector<double> f(u.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = n * pi * pi * u[i];
    return {u, ScalarField(d, std::move(f))};
}

CzEstimate cz_constant_known(int n, double q)
{
    PLAP_REQUIRE(n >= 1 && n <= 3, "dimension must be 1, 2 or 3");
    if (q != 2.0)
        throw DomainError("C(n,q) is unknown for q != 2; use the estimate mode (a lower bound) or supply a value");
    CzEstimate e;
    e.value = 1.0;
    e.kind = CzKind::known;
    e.family = "exact identity at q = 2";
    return e;
}

double cz_ratio(const ScalarField& w, double q, const CellMask& exclude)
{
    PLAP_REQUIRE(q >= 1.0, "q must be at least 1");
    const JetField J = jet(w, 2, Exec::serial);
    const int n = J.dim();
    double top = 0.0, bottom = 0.0;
    for (std::size_t i = 0; i < J.node_count(); ++i) {
        if (J.boundary[i]) continue;
        if (exclude.size() != 0 && exclude[i]) continue;
        double lap = 0.0;
        for (int a = 0; a < n; ++a) lap += J.H(i, a, a);
        top += std::pow(J.hess_norm[i], q);
        bottom += std::pow(std::abs(lap), q);
    }
    PLAP_REQUIRE(bottom > 0.0, "test function has a vanishing discrete Laplacian");
    return std::pow(top / bottom, 1.0 / q);
}

namespace {

struct Bump {
    Point center{};
    Point radii{};
    double angle = 0.0;
    double amplitude = 1.0;
    // harmonic quadratic core a (y0^2 - y1^2) + b y0 y1; zero means a plain bump
    double core_a = 0.0;
    double core_b = 0.0;
    bool harmonic_core = false;
    // (|y|^2 + delta^2)^(beta/2 - 1) times the core: nearly harmonic, Hessian blows up like |y|^(beta-2)
    bool singular = false;
    double beta = 2.0;
    double delta = 0.0;
    int power = 3;
};

double eval_bump(const Bump& b, const Point& x, int n)
{
    Point y{};
    for (int a = 0; a < n; ++a) y[a] = x[a] - b.center[a];
    if (n >= 2) {
        const double c = std::cos(b.angle), s = std::sin(b.angle);
        const double y0 = c * y[0] - s * y[1];
        const double y1 = s * y[0] + c * y[1];
        y[0] = y0;
        y[1] = y1;
    }
    double rho2 = 0.0;
    for (int a = 0; a < n; ++a) rho2 += (y[a] / b.radii[a]) * (y[a] / b.radii[a]);
    if (rho2 >= 1.0) return 0.0;
    const double t = 1.0 - rho2;
    if (b.singular) {
        double r2 = 0.0;
        for (int a = 0; a < n; ++a) r2 += y[a] * y[a];
        const double core = b.core_a * (y[0] * y[0] - y[1] * y[1]) + b.core_b * y[0] * y[1];
        return b.amplitude * std::pow(t, b.power) * std::pow(r2 + b.delta * b.delta, 0.5 * b.beta - 1.0) * core;
    }
    double v = b.amplitude * t * t * t;
    if (b.harmonic_core && n >= 2) {
        // isotropic scaling keeps the quadratic harmonic
        const double s = 0.5 * (b.radii[0] + b.radii[1]);
        const double z0 = y[0] / s, z1 = y[1] / s;
        v *= b.core_a * (z0 * z0 - z1 * z1) + b.core_b * z0 * z1;
    }
    return v;
}

std::vector<std::vector<Bump>> make_family(int n, double q, double h, int family_size, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::vector<Bump>> family;
    for (int j = 0; j < family_size; ++j) {
        if (n >= 2 && j % 3 == 2) {
            Bump b;
            for (int a = 0; a < n; ++a) {
                b.center[a] = 0.45 + 0.1 * unit(rng);
                b.radii[a] = 0.3 + 0.1 * unit(rng);
            }
            b.radii.fill(b.radii[0]);
            b.angle = std::numbers::pi * unit(rng);
            b.core_a = 2.0 * unit(rng) - 1.0;
            b.core_b = 2.0 * unit(rng) - 1.0;
            b.singular = true;
            // just above the exponent where |D^2 w|^q stops being integrable
            b.beta = 2.0 - n / q - 0.25 * unit(rng);
            b.delta = (0.5 + unit(rng)) * h;
            b.power = 3 + static_cast<int>(unit(rng) * 4.0);
            family.push_back({b});
            continue;
        }
        const int count = 1 + static_cast<int>(unit(rng) * 3.0);
        std::vector<Bump> member;
        for (int k = 0; k < std::min(count, 3); ++k) {
            Bump b;
            for (int a = 0; a < n; ++a) {
                b.center[a] = 0.3 + 0.4 * unit(rng);
                b.radii[a] = 0.06 + 0.14 * unit(rng);
            }
            b.angle = std::numbers::pi * unit(rng);
            b.amplitude = 2.0 * unit(rng) - 1.0;
            b.harmonic_core = n >= 2 && (j % 3) == 1;
            b.core_a = 2.0 * unit(rng) - 1.0;
            b.core_b = 2.0 * unit(rng) - 1.0;
            member.push_back(b);
        }
        family.push_back(std::move(member));
    }
    return family;
}

} // namespace

std::vector<double> cz_family_ratios(int n, double q, int cells, int family_size, std::uint64_t seed)
{
    PLAP_REQUIRE(n >= 1 && n <= 3, "dimension must be 1, 2 or 3");
    PLAP_REQUIRE(q >= 2.0, "q must be at least 2");
    PLAP_REQUIRE(family_size >= 1, "family must be nonempty");
    const GridDomain d = GridDomain::cube(n, 0.0, 1.0, cells);
    std::vector<double> ratios;
    for (const auto& member : make_family(n, q, d.max_h(), family_size, seed)) {
        const auto w = ScalarField::sample(d, [&](const Point& x) {
            double v = 0.0;
            for (const auto& b : member) v += eval_bump(b, x, n);
            return v;
        });
        ratios.push_back(cz_ratio(w, q, CellMask{}));
    }
    return ratios;
}

CzEstimate cz_constant_estimate(int n, double q, int cells, int family_size, std::uint64_t seed)
{
    const auto ratios = cz_family_ratios(n, q, cells, family_size, seed);
    CzEstimate e;
    e.value = *std::max_element(ratios.begin(), ratios.end());
    e.kind = CzKind::lower_bound;
    e.seed = seed;
    e.family_size = family_size;
    e.cells = cells;
    e.family = "sums of 1-3 rotated anisotropic (1-rho^2)^3 bumps, with harmonic quadratic cores on every third member and "
               "near-singular (|x|^2+delta^2)^(beta/2-1) harmonic profiles on every third";
    return e;
}

} // namespace plap::oracles
