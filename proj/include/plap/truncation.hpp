#pragma once

// Scalar truncations used by the regularization arguments.
//
// G_eps(t) = 0 on [0, eps], 2t - 2eps on [eps, 2eps], t beyond; odd in t.
// h_eps(t) = eps * h(t / eps) with h = 0 on [0,1], h(t) = t on [2, inf) and the
// quintic bridge h(1 + s) = s^3 (16 - 23 s + 9 s^2) on [1,2], which matches
// value, slope and curvature at both ends (C^2) and stays below t.

namespace plap {

double truncation_G(double t, double epsilon);

/// h_eps(t) for t >= 0. epsilon = 0 is the untruncated limit h_0(t) = t.
double cutoff_h(double t, double epsilon);
double cutoff_h_d1(double t, double epsilon);
double cutoff_h_d2(double t, double epsilon);

} // namespace plap
