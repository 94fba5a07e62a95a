#include "plap/truncation.hpp"

#include <cmath>

#include "plap/error.hpp"

namespace plap {

double truncation_G(double t, double epsilon)
{
    PLAP_REQUIRE(epsilon > 0.0, "G_eps needs epsilon > 0");
    if (t < 0.0) return -truncation_G(-t, epsilon);
    if (t <= epsilon) return 0.0;
    if (t <= 2.0 * epsilon) return 2.0 * t - 2.0 * epsilon;
    return t;
}

namespace {

// bridge on s = t - 1 in [0, 1]
double bridge(double s) { return s * s * s * (16.0 - 23.0 * s + 9.0 * s * s); }
double bridge_d1(double s) { return s * s * (48.0 - 92.0 * s + 45.0 * s * s); }
double bridge_d2(double s) { return s * (96.0 - 276.0 * s + 180.0 * s * s); }

} // namespace

double cutoff_h(double t, double epsilon)
{
    PLAP_REQUIRE(epsilon >= 0.0, "h_eps needs epsilon >= 0");
    if (epsilon == 0.0) return t;
    const double x = t / epsilon;
    if (x <= 1.0) return 0.0;
    if (x >= 2.0) return t;
    return epsilon * bridge(x - 1.0);
}

double cutoff_h_d1(double t, double epsilon)
{
    PLAP_REQUIRE(epsilon >= 0.0, "h_eps needs epsilon >= 0");
    if (epsilon == 0.0) return 1.0;
    const double x = t / epsilon;
    if (x <= 1.0) return 0.0;
    if (x >= 2.0) return 1.0;
    return bridge_d1(x - 1.0);
}

double cutoff_h_d2(double t, double epsilon)
{
    PLAP_REQUIRE(epsilon >= 0.0, "h_eps needs epsilon >= 0");
    if (epsilon == 0.0) return 0.0;
    const double x = t / epsilon;
    if (x <= 1.0 || x >= 2.0) return 0.0;
    return bridge_d2(x - 1.0) / epsilon;
}

} // namespace plap
