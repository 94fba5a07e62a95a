#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "plap/error.hpp"
#include "plap/functionals.hpp"
#include "plap/jet.hpp"
#include "plap/oracles.hpp"
#include "plap/quadrature.hpp"
#include "plap/truncation.hpp"

using namespace plap;

namespace {

constexpr double kPi = std::numbers::pi;

ScalarField random_smooth(const GridDomain& d, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ud(-1, 1);
    const double a = ud(rng), b = ud(rng), c = ud(rng), e = ud(rng);
    return ScalarField::sample(d, [=](const Point& x) {
        return a * std::sin(2 * x[0] + b) + c * x[0] * x[1] + e * std::cos(3 * x[1]) + 0.3 * x[1] * x[1] * x[1];
    });
}

WindowOptions ball(const GridDomain& d, double radius, double delta = 0.0)
{
    WindowOptions w;
    w.mask = outside_ball_mask(d, {0, 0, 0}, radius);
    w.delta = delta;
    return w;
}

FunctionalSpec spec(FunctionalKind k, std::map<std::string, double> params)
{
    FunctionalSpec s;
    s.kind = k;
    s.params = std::move(params);
    return s;
}

} // namespace

TEST(Truncation, GExamples)
{
    EXPECT_EQ(truncation_G(0.05, 0.1), 0.0);
    EXPECT_NEAR(truncation_G(0.15, 0.1), 0.1, 1e-15);
    EXPECT_EQ(truncation_G(0.3, 0.1), 0.3);
    EXPECT_EQ(truncation_G(-0.3, 0.1), -0.3);
    EXPECT_NEAR(truncation_G(-0.15, 0.1), -0.1, 1e-15);
    EXPECT_THROW((void)truncation_G(1.0, 0.0), DomainError);
}

TEST(Truncation, CutoffExamplesAndSmoothness)
{
    EXPECT_EQ(cutoff_h(0.05, 0.1), 0.0);
    EXPECT_EQ(cutoff_h(0.5, 0.1), 0.5);
    EXPECT_EQ(cutoff_h(0.3, 0.0), 0.3);
    const double eps = 0.2;
    for (double t : {eps, 2 * eps}) {
        const double dt = 1e-7;
        EXPECT_NEAR(cutoff_h(t - dt, eps), cutoff_h(t + dt, eps), 1e-6);
        EXPECT_NEAR(cutoff_h_d1(t - dt, eps), cutoff_h_d1(t + dt, eps), 1e-5);
        EXPECT_NEAR(cutoff_h_d2(t - dt, eps), cutoff_h_d2(t + dt, eps), 1e-3);
    }
    EXPECT_NEAR(cutoff_h_d1(2 * eps, eps), 1.0, 1e-12);
    EXPECT_NEAR(cutoff_h_d2(eps, eps), 0.0, 1e-12);
    double max_d2 = 0;
    for (int k = 0; k <= 1000; ++k) {
        const double t = eps * (1.0 + k / 1000.0);
        EXPECT_LE(cutoff_h(t, eps), t + 1e-15);
        EXPECT_NEAR(cutoff_h_d1(t, eps), (cutoff_h(t + 1e-7, eps) - cutoff_h(t - 1e-7, eps)) / 2e-7, 1e-5);
        max_d2 = std::max(max_d2, std::abs(cutoff_h_d2(t, eps)));
    }
    // h'' scales like 1/eps
    double max_d2_half = 0;
    for (int k = 0; k <= 1000; ++k) max_d2_half = std::max(max_d2_half, std::abs(cutoff_h_d2(0.5 * eps * (1.0 + k / 1000.0), 0.5 * eps)));
    EXPECT_NEAR(max_d2_half / max_d2, 2.0, 1e-9);
}

TEST(HessianEnergy, QuadraticOnUnitSquare)
{
    const GridDomain d(2, {0.25, 0.25, 0}, {1, 1, 0}, {32, 32, 1});
    const auto u = ScalarField::sample(d, [](const Point& x) { return 0.5 * (x[0] * x[0] + x[1] * x[1]); });
    const auto v = hessian_energy(u, 2.0, 0.0, 0.0);
    EXPECT_NEAR(v.value, 2.0, 1e-12);
    EXPECT_EQ(v.masked_fraction, 0.0);
    EXPECT_DOUBLE_EQ(v.grid_h, 1.0 / 32);
}

TEST(HessianEnergy, SingularWeightMatchesRadialOracle)
{
    const auto sol = oracles::radial_solution(2.0, 2, 0.5);
    const auto oracle = oracles::radial_functional_exact(
        spec(FunctionalKind::hessian_energy, {{"p", 2}, {"beta", 0.5}, {"epsilon", 0}}), sol, 0.0, 1.0);
    ASSERT_TRUE(oracle.has_value());
    EXPECT_NEAR(*oracle, 2.0 * 2 * kPi / 1.5, 1e-8);
    const auto d = GridDomain::cube(2, -1.25, 1.25, 320);
    const auto v = hessian_energy(sol.sample_u(d), 2.0, 0.5, 0.0, ball(d, 1.0));
    EXPECT_NEAR(v.value / *oracle, 1.0, 0.02);
    EXPECT_GT(v.masked_fraction, 0.0);
}

TEST(HessianEnergy, ContinuousInBeta)
{
    const auto d = GridDomain::cube(2, 0, 1, 24);
    const auto u = random_smooth(d, 5);
    const double a = hessian_energy(u, 2.0, 0.0, 1.0).value;
    const double b = hessian_energy(u, 2.0, 1e-6, 1.0).value;
    EXPECT_NEAR(a, b, 1e-5 * std::abs(a));
}

TEST(HessianEnergy, MaskedFractionShrinksUnderRefinement)
{
    const auto sol = oracles::radial_solution(1.5, 2);
    double prev = 1.0;
    for (int cells : {32, 64, 128}) {
        const auto d = GridDomain::cube(2, -1, 1, cells);
        const auto v = hessian_energy(sol.sample_u(d), 1.5, 0.5, 0.0);
        EXPECT_LT(v.masked_fraction, prev);
        prev = v.masked_fraction;
    }
}

TEST(HessianEnergy, PositiveEpsilonNeverMasks)
{
    const auto d = GridDomain::cube(2, -1, 1, 32);
    const auto u = oracles::radial_solution(1.5, 2).sample_u(d);
    EXPECT_EQ(hessian_energy(u, 1.5, 0.5, 1e-3).masked_fraction, 0.0);
    EXPECT_GT(hessian_energy(u, 1.5, 0.5, 0.0).masked_fraction, 0.0);
}

TEST(InverseWeightF, PTwoGivesSquareOfF)
{
    const auto d = GridDomain::cube(2, 0, 1, 16);
    const auto u = random_smooth(d, 1);
    const auto v = inverse_weight_f(u, ScalarField(d, 1.0), 2.0, 1.5, 0.0);
    EXPECT_NEAR(v.value, 1.0, 1e-12);
    EXPECT_TRUE(v.warnings.empty());
}

TEST(InverseWeightF, WarnsOutsideDualWindow)
{
    const auto d = GridDomain::cube(2, 0, 1, 16);
    const auto u = ScalarField::sample(d, [](const Point& x) { return x[0] + 2 * x[1]; });
    const ScalarField f(d, 1.0);
    EXPECT_TRUE(inverse_weight_f(u, f, 3.0, 1.5, 0.0).warnings.empty());
    EXPECT_FALSE(inverse_weight_f(u, f, 3.0, 2.5, 0.0).warnings.empty());
}

TEST(GradientInverse, LinearFieldGivesArea)
{
    const GridDomain d(2, {0, 0, 0}, {2, 1.5, 0}, {16, 12, 1});
    const auto u = ScalarField::sample(d, [](const Point& x) { return 0.6 * x[0] + 0.8 * x[1]; });
    for (double p : {1.3, 2.0, 3.5})
        for (double r : {0.2, 0.9}) EXPECT_NEAR(gradient_inverse(u, p, r).value, 3.0, 1e-12);
}

TEST(GradientInverse, RadialOracleAndWarning)
{
    const auto sol = oracles::radial_solution(1.5, 2);
    const auto fs = spec(FunctionalKind::gradient_inverse, {{"p", 1.5}, {"r", 0.9}});
    const auto oracle = oracles::radial_functional_exact(fs, sol, 0.0, 1.0);
    ASSERT_TRUE(oracle.has_value());
    EXPECT_NEAR(*oracle, 2 * kPi * std::pow(3.0, -0.45) / 1.1, 1e-8);
    const auto d = GridDomain::cube(2, -1, 1, 256);
    const auto v = gradient_inverse(sol.sample_u(d), 1.5, 0.9, ball(d, 1.0));
    EXPECT_NEAR(v.value / *oracle, 1.0, 0.02);
    EXPECT_TRUE(v.warnings.empty());
    EXPECT_FALSE(gradient_inverse(sol.sample_u(d), 1.5, 1.2, ball(d, 1.0)).warnings.empty());
}

TEST(GradientInverse, DivergentExponentGrowsUnderRefinement)
{
    const auto sol = oracles::radial_solution(1.5, 2);
    EXPECT_TRUE(oracles::predicts_divergence(spec(FunctionalKind::gradient_inverse, {{"p", 1.5}, {"r", 2.5}}), sol));
    double prev = 0;
    for (int cells : {32, 64, 128}) {
        const auto d = GridDomain::cube(2, -1, 1, cells);
        const double v = gradient_inverse(sol.sample_u(d), 1.5, 2.5, ball(d, 0.9)).value;
        if (prev > 0) EXPECT_GT(v / prev, 1.3) << cells;
        prev = v;
    }
}

TEST(ThirdOrder, CubicArithmeticCheck)
{
    const auto d = GridDomain::cube(2, 0, 1, 16);
    const auto u = ScalarField::sample(d, [](const Point& x) { return x[0] * x[0] * x[0]; });
    const auto v = third_order_functional(u, 2.0, 0.0, 1.0, 1.0);
    EXPECT_NEAR(v.value, 36.0, 1e-6);
}

TEST(ThirdOrder, RadialDivergenceAndConvergence)
{
    const auto sol = oracles::radial_solution(2.2, 2);
    const auto div = spec(FunctionalKind::third_order, {{"p", 2.2}, {"alpha", 0.1}, {"gamma", 1}, {"epsilon", 0}});
    EXPECT_NEAR(oracles::leading_exponent(div, sol).sigma, -2.0833333333333335, 1e-12);
    EXPECT_FALSE(oracles::radial_functional_exact(div, sol, 0.0, 0.9).has_value());

    const auto fin = spec(FunctionalKind::third_order, {{"p", 2.2}, {"alpha", 2}, {"gamma", 1}, {"epsilon", 0}});
    EXPECT_NEAR(oracles::leading_exponent(fin, sol).sigma, -0.5, 1e-12);
    const auto oracle = oracles::radial_functional_exact(fin, sol, 0.0, 0.9);
    ASSERT_TRUE(oracle.has_value());
    const auto d = GridDomain::cube(2, -1, 1, 256);
    const auto v = third_order_functional(sol.sample_u(d), 2.2, 2.0, 1.0, 0.0, MaskPolicy::exclude_Zu, ball(d, 0.9, 1e-12));
    EXPECT_NEAR(v.value / *oracle, 1.0, 0.05);
}

TEST(ThirdOrder, GammaBelowOneNeedsHessianPolicy)
{
    const auto d = GridDomain::cube(2, -1, 1, 16);
    const auto u = oracles::radial_solution(1.8, 2).sample_u(d);
    EXPECT_THROW((void)third_order_functional(u, 1.8, 2.0, 0.5, 0.0, MaskPolicy::exclude_Zu), DomainError);
    EXPECT_NO_THROW(
        (void)third_order_functional(u, 1.8, 2.0, 0.5, 0.0, MaskPolicy::exclude_Zu_and_degenerate_hessian));
    EXPECT_NO_THROW((void)third_order_functional(u, 1.8, 2.0, 0.5, 1e-2, MaskPolicy::exclude_Zu));
}

TEST(StressField, CollapsesToGradientAtPTwo)
{
    const auto d = GridDomain::cube(2, 0, 1, 16);
    const auto u = random_smooth(d, 9);
    const auto J = jet(u, 1, Exec::serial);
    for (double eps : {0.0, 0.3}) {
        const auto V = stress_field(u, 2.0, eps);
        for (std::size_t i = 0; i < d.node_count(); ++i)
            for (int a = 0; a < 2; ++a) EXPECT_NEAR(V.at(i, a), J.g(i, a), 1e-12 * std::abs(J.g(i, a)) + 1e-300);
    }
}

TEST(StressField, RadialAndPointExamples)
{
    const auto d = GridDomain::cube(2, -1, 1, 128);
    const auto V = stress_field(oracles::radial_solution(1.5, 2).sample_u(d), 1.5, 0.0);
    for (std::size_t i = 0; i < d.node_count(); ++i) {
        const auto x = d.coord(i);
        const double r = std::hypot(x[0], x[1]);
        if (r < 0.2 || d.on_boundary(i)) continue;
        // central differences of r^3 are off by O(h^2 / r^2) relative
        const double tol = d.max_h() * d.max_h() / (r * r);
        EXPECT_NEAR(std::hypot(V.at(i, 0), V.at(i, 1)) / (std::sqrt(3.0) * r), 1.0, tol);
        EXPECT_NEAR((V.at(i, 0) * x[1] - V.at(i, 1) * x[0]) / (std::sqrt(3.0) * r * r), 0.0, tol);
    }
    const auto lin = ScalarField::sample(d, [](const Point& x) { return 3 * x[0] + 4 * x[1]; });
    const auto W = stress_field(lin, 3.0, 0.0);
    EXPECT_NEAR(W.at(100, 0), 15.0, 1e-10);
    EXPECT_NEAR(W.at(100, 1), 20.0, 1e-10);
    const auto Z = stress_field(ScalarField(d, 0.0), 1.5, 0.0);
    for (double v : Z.values()) EXPECT_EQ(v, 0.0);
}

TEST(StressSeminorm, PTwoIdentities)
{
    const auto d = GridDomain::cube(2, 0, 1, 16);
    const auto half_x2 = ScalarField::sample(d, [](const Point& x) { return 0.5 * x[0] * x[0]; });
    const auto s1 = stress_sobolev_seminorm(half_x2, 2.0, 3.0, 0.0);
    EXPECT_NEAR(s1.direct.value, 1.0, 1e-10);
    EXPECT_NEAR(s1.expansion.value, 1.0, 1e-10);

    const auto q = ScalarField::sample(d, [](const Point& x) { return 0.5 * (x[0] * x[0] + x[1] * x[1]); });
    const auto s2 = stress_sobolev_seminorm(q, 2.0, 3.0, 0.0);
    EXPECT_NEAR(s2.entry_sum.value, 4.0, 1e-10);
    EXPECT_TRUE(s2.cross_check_ok);
}

TEST(StressSeminorm, DirectEqualsHessianNormAtPTwo)
{
    const auto d = GridDomain::cube(2, -1, 1, 64);
    const auto u = ScalarField::sample(d, [](const Point& x) { return 0.7 * x[0] * x[0] - 0.2 * x[0] * x[1] + 1.1 * x[1] * x[1] + x[0]; });
    const auto s = stress_sobolev_seminorm(u, 2.0, 3.0, 0.0);
    const double hess_norm = std::sqrt(2 * 0.7 * 2 * 0.7 + 2 * 0.2 * 0.2 + 2 * 1.1 * 2 * 1.1);
    EXPECT_NEAR(s.direct.value / (4.0 * std::pow(hess_norm, 3.0)), 1.0, 1e-10);
}

TEST(StressSeminorm, RadialCrossCheckAndStability)
{
    const auto sol = oracles::radial_solution(1.9, 2);
    std::vector<double> direct, entry;
    for (int cells : {128, 256}) {
        const auto d = GridDomain::cube(2, -1, 1, cells);
        const auto s = stress_sobolev_seminorm(sol.sample_u(d), 1.9, 3.0, 0.0, ball(d, 0.9));
        EXPECT_TRUE(s.cross_check_ok) << s.discrepancy;
        direct.push_back(s.direct.value);
        entry.push_back(s.entry_sum.value);
    }
    EXPECT_LT(std::abs(direct[1] / direct[0] - 1), 0.10);
    EXPECT_LT(std::abs(entry[1] / entry[0] - 1), 0.10);
}

TEST(PowerField, UnitPowerAwayFromTruncation)
{
    const auto d = GridDomain::cube(2, 0, 1, 16);
    const auto u = ScalarField::sample(d, [](const Point& x) { return 0.8 * x[0] * x[0] + x[1] + 1.0; });
    const auto J = jet(u, 1, Exec::serial);
    const auto V = power_vector_field(u, 1.0, 0.1);
    for (std::size_t i = 0; i < d.node_count(); ++i)
        for (int a = 0; a < 2; ++a) EXPECT_NEAR(V.at(i, a), J.g(i, a), 1e-14);
}

TEST(PowerField, LinearFieldHasZeroSeminorm)
{
    const auto d = GridDomain::cube(2, 0, 1, 16);
    const auto u = ScalarField::sample(d, [](const Point& x) { return 0.3 * x[0] - 0.4 * x[1]; });
    for (double k : {-0.5, 1.0, 2.7}) {
        EXPECT_NEAR(power_field_seminorm(u, k, 1.0, 1, 0.1).value, 0.0, 1e-12);
        EXPECT_NEAR(power_field_seminorm(u, k, 1.5, 2, 0.1).value, 0.0, 1e-10);
    }
}

TEST(PowerField, WarnsBelowProofCondition)
{
    const auto d = GridDomain::cube(2, -1, 1, 16);
    const auto u = oracles::radial_solution(2.2, 2).sample_u(d);
    EXPECT_TRUE(power_field_seminorm(u, 1.0, 1.0, 2, 0.0, 2.2).warnings.empty());
    EXPECT_FALSE(power_field_seminorm(u, 0.5, 1.0, 2, 0.0, 2.2).warnings.empty());
}

TEST(PowerField, RadialThresholdBehaviour)
{
    const auto sol = oracles::radial_solution(2.2, 2);
    const double k_ok = (2.0 + 1.0) / 2 + 0.1;
    std::vector<double> ok, bad;
    for (int cells : {64, 128, 256}) {
        const auto d = GridDomain::cube(2, -1, 1, cells);
        const auto u = sol.sample_u(d);
        ok.push_back(power_field_seminorm(u, k_ok, 1.0, 2, 0.0, 2.2, ball(d, 0.9, 1e-12)).value);
        bad.push_back(power_field_seminorm(u, -1.5, 1.0, 2, 0.0, 2.2, ball(d, 0.9, 1e-12)).value);
    }
    EXPECT_LE(*std::max_element(ok.begin(), ok.end()) / *std::min_element(ok.begin(), ok.end()), 1.25);
    EXPECT_GE(bad[1] / bad[0], 2.0);
    EXPECT_GE(bad[2] / bad[1], 2.0);
}

TEST(LinearizedResidual, PoissonDecaysWithH)
{
    std::vector<double> vals;
    for (int cells : {32, 64, 128}) {
        const auto d = GridDomain::cube(2, 0, 1, cells);
        const auto mf = oracles::manufactured_poisson(d);
        const auto phi = bump_function(d, {0.45, 0.55, 0}, 0.3);
        const auto r = linearized_residual(mf.u, mf.f, phi, 0, 1, 2.0);
        for (int t = 1; t < 5; ++t) EXPECT_EQ(r.terms[t], 0.0);
        vals.push_back(std::abs(r.value));
    }
    EXPECT_GE(std::log2(vals[0] / vals[1]), 1.0);
    EXPECT_GE(std::log2(vals[1] / vals[2]), 1.0);
}

TEST(LinearizedResidual, LinearInPhi)
{
    const auto d = GridDomain::cube(2, -1, 1, 64);
    const auto sol = oracles::radial_solution(1.7, 2);
    const auto u = sol.sample_u(d);
    const auto f = sol.sample_f(d);
    const auto phi = bump_function(d, {0.3, -0.2, 0}, 0.4);
    std::vector<double> two(phi.size());
    for (std::size_t i = 0; i < two.size(); ++i) two[i] = 2.0 * phi[i];
    const auto a = linearized_residual(u, f, phi, 0, 0, 1.7);
    const auto b = linearized_residual(u, f, ScalarField(d, two), 0, 0, 1.7);
    double scale = std::abs(a.rhs);
    for (double t : a.terms) scale += std::abs(t);
    EXPECT_LE(std::abs(b.value - 2.0 * a.value), 1e-12 * 2.0 * scale);
}

TEST(LinearizedResidual, OneDimensionalQuadraticSolution)
{
    // u = x^2/2 solves -div(|u_x|^{p-2} u_x) = -(p-1)|x|^{p-2}; away from x = 0 the residual vanishes
    const double p = 3.0;
    for (int cells : {32, 64}) {
        const auto d = GridDomain::cube(2, 0, 2, cells);
        const auto u = ScalarField::sample(d, [](const Point& x) { return 0.5 * x[0] * x[0]; });
        const auto f = ScalarField::sample(d, [&](const Point& x) { return -(p - 1) * std::pow(std::abs(x[0]), p - 2); });
        const auto phi = bump_function(d, {1.2, 1.0, 0}, 0.5);
        const auto r = linearized_residual(u, f, phi, 0, 0, p);
        EXPECT_EQ(r.terms[0], 0.0);
        EXPECT_EQ(r.terms[3], 0.0);
        EXPECT_EQ(r.masked_fraction, 0.0);
        EXPECT_NEAR(r.value, 0.0, 1e-12);
    }
}

TEST(LinearizedResidual, SupportTouchingBoundaryIsRejected)
{
    const auto d = GridDomain::cube(2, 0, 1, 32);
    const auto mf = oracles::manufactured_poisson(d);
    EXPECT_THROW((void)linearized_residual(mf.u, mf.f, bump_function(d, {0.1, 0.5, 0}, 0.2), 0, 0, 2.0), DomainError);
}

TEST(Invariants, PTwoCollapseOnRandomFields)
{
    const auto d = GridDomain::cube(2, 0, 1, 24);
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto u = random_smooth(d, seed);
        const auto f = random_smooth(d, seed + 100);
        const auto J = jet(u, 3, Exec::serial);
        // inverse weight integrand is f^2
        std::vector<double> f2(d.node_count());
        for (std::size_t i = 0; i < f2.size(); ++i) f2[i] = f[i] * f[i];
        const double want_f2 = integrate(d, f2, CellMask{}).value;
        EXPECT_NEAR(inverse_weight_f(u, f, 2.0, 1.5, 0.0).value, want_f2, 1e-12 * want_f2);
        // third-order weight is (eps + |grad u|^2)^{alpha/2}
        const double eps = 0.25, alpha = 1.7;
        std::vector<double> w(d.node_count());
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] = std::pow(eps + J.grad_norm[i] * J.grad_norm[i], alpha / 2) * J.third_norm[i] * J.third_norm[i];
        const double want_t = integrate(d, w, CellMask{}).value;
        EXPECT_NEAR(third_order_functional(u, 2.0, alpha, 1.0, eps).value, want_t, 1e-12 * want_t);
    }
}

TEST(Invariants, NegativeExponentsDecreaseInEpsilon)
{
    const auto d = GridDomain::cube(2, -1, 1, 48);
    const auto u = oracles::radial_solution(1.6, 2).sample_u(d);
    double h_prev = 1e300, t_prev = 1e300, s_prev = 1e300;
    for (double eps : {1e-4, 1e-3, 1e-2, 1e-1}) {
        const double h = hessian_energy(u, 1.6, 0.5, eps).value;
        const double t = third_order_functional(u, 1.6, 0.2, 1.0, eps).value;
        const double s = stress_sobolev_seminorm(u, 1.6, 3.0, eps).entry_sum.value;
        EXPECT_LE(h, h_prev);
        EXPECT_LE(t, t_prev);
        EXPECT_LE(s, s_prev);
        h_prev = h;
        t_prev = t;
        s_prev = s;
    }
}

TEST(Invariants, RadialOracleAgreementOnAnnulus)
{
    const auto sol = oracles::radial_solution(1.8, 2);
    const auto d = GridDomain::cube(2, -1, 1, 256);
    WindowOptions w;
    w.mask = outside_ball_mask(d, {0, 0, 0}, 0.9, 0.1);
    const auto u = sol.sample_u(d);
    const std::vector<FunctionalSpec> specs{
        spec(FunctionalKind::hessian_energy, {{"p", 1.8}, {"beta", 0.5}, {"epsilon", 0}}),
        spec(FunctionalKind::gradient_inverse, {{"p", 1.8}, {"r", 0.5}}),
        spec(FunctionalKind::third_order, {{"p", 1.8}, {"alpha", 1}, {"gamma", 2}, {"epsilon", 0}}),
        spec(FunctionalKind::stress_seminorm, {{"p", 1.8}, {"alpha_tilde", 3}, {"epsilon", 0}}),
        spec(FunctionalKind::power_field_seminorm, {{"k", 1.5}, {"r", 1}, {"order", 2}, {"epsilon", 0}}),
    };
    for (const auto& s : specs) {
        const auto oracle = oracles::radial_functional_exact(s, sol, 0.1, 0.9);
        ASSERT_TRUE(oracle.has_value());
        const auto v = evaluate(s, u, nullptr, w);
        EXPECT_NEAR(v.value / *oracle, 1.0, 0.02) << to_string(s.kind);
    }
}

TEST(Invariants, SerialEqualsParallel)
{
    const auto d = GridDomain::cube(2, -1, 1, 96);
    const auto sol = oracles::radial_solution(1.7, 2);
    const auto u = sol.sample_u(d);
    const auto f = sol.sample_f(d);
    WindowOptions ws, wp;
    ws.exec = Exec::serial;
    wp.exec = Exec::parallel;
    EXPECT_EQ(hessian_energy(u, 1.7, 0.5, 0.0, ws).value, hessian_energy(u, 1.7, 0.5, 0.0, wp).value);
    EXPECT_EQ(third_order_functional(u, 1.7, 1.5, 1.0, 0.0, MaskPolicy::exclude_Zu, ws).value,
              third_order_functional(u, 1.7, 1.5, 1.0, 0.0, MaskPolicy::exclude_Zu, wp).value);
    EXPECT_EQ(stress_sobolev_seminorm(u, 1.7, 3.0, 0.0, ws).direct.value,
              stress_sobolev_seminorm(u, 1.7, 3.0, 0.0, wp).direct.value);
    EXPECT_EQ(power_field_seminorm(u, 1.2, 1.0, 2, 0.0, 1.7, ws).value,
              power_field_seminorm(u, 1.2, 1.0, 2, 0.0, 1.7, wp).value);
    EXPECT_EQ(inverse_weight_f(u, f, 1.7, 1.5, 0.0, ws).value, inverse_weight_f(u, f, 1.7, 1.5, 0.0, wp).value);
}

TEST(Spec, KindsAndPolicies)
{
    for (auto k : {FunctionalKind::hessian_energy, FunctionalKind::inverse_weight_f, FunctionalKind::gradient_inverse,
                   FunctionalKind::third_order, FunctionalKind::stress_seminorm, FunctionalKind::power_field_seminorm,
                   FunctionalKind::linearized_residual})
        EXPECT_EQ(parse_functional_kind(to_string(k)), k);
    for (auto m : {MaskPolicy::exclude_Zu, MaskPolicy::exclude_Zu_and_degenerate_hessian, MaskPolicy::none})
        EXPECT_EQ(parse_mask_policy(to_string(m)), m);
    EXPECT_FALSE(parse_functional_kind("laplacian").has_value());
    const auto s = spec(FunctionalKind::third_order, {{"p", 2}});
    EXPECT_THROW(s.require({"p", "alpha"}), DomainError);
    EXPECT_EQ(s.get_or("gamma", 1.0), 1.0);
}

TEST(Evaluate, DispatchMatchesDirectCalls)
{
    const auto d = GridDomain::cube(2, -1, 1, 32);
    const auto sol = oracles::radial_solution(1.8, 2);
    const auto u = sol.sample_u(d);
    const auto f = sol.sample_f(d);
    EXPECT_EQ(evaluate(spec(FunctionalKind::hessian_energy, {{"p", 1.8}, {"beta", 0.5}, {"epsilon", 0}}), u, nullptr).value,
              hessian_energy(u, 1.8, 0.5, 0.0).value);
    const auto st = stress_sobolev_seminorm(u, 1.8, 3.0, 0.0);
    EXPECT_EQ(evaluate(spec(FunctionalKind::stress_seminorm, {{"p", 1.8}, {"alpha_tilde", 3}, {"variant", 1}}), u, nullptr).value,
              st.entry_sum.value);
    EXPECT_EQ(evaluate(spec(FunctionalKind::stress_seminorm, {{"p", 1.8}, {"alpha_tilde", 3}, {"variant", 2}}), u, nullptr).value,
              st.expansion.value);
    EXPECT_THROW((void)evaluate(spec(FunctionalKind::inverse_weight_f, {{"p", 1.8}, {"q", 1.5}}), u, nullptr), DomainError);
    EXPECT_NO_THROW((void)evaluate(spec(FunctionalKind::inverse_weight_f, {{"p", 1.8}, {"q", 1.5}}), u, &f));
    EXPECT_THROW((void)evaluate(spec(FunctionalKind::third_order, {{"p", 1.8}}), u, nullptr), DomainError);
}

TEST(FunctionalValue, Json)
{
    FunctionalValue v;
    v.value = 2.5;
    v.warnings = {"w"};
    const auto j = to_json(v);
    for (const char* key : {"value", "masked_fraction", "grid_h", "epsilon"}) EXPECT_TRUE(j.contains(key)) << key;
}
