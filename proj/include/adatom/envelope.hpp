#pragma once

#include "adatom/density.hpp"

namespace adatom {

// b(s) = psi(s) - s*psi'(s). Positive margin means the tangent at s still has a
// nonnegative intercept; its unique sign change locates s0.
double parabolicity_margin(const EnergyDensity& psi, double s);

// Threshold density: sup{ s : psi(s) - s*psi'(s) > 0 }. Returns +inf when the
// margin is still positive at `cap`. The margin is nonincreasing, so a single
// geometric bracket expansion followed by bisection suffices.
double compute_s0(const EnergyDensity& psi, double cap = 1e12);

// (s0, Theta, base psi) realizing the convex subadditive envelope:
// equal to psi on [0, s0], linear with slope Theta = psi'(s0) past it.
struct Envelope {
    EnergyDensity base;
    double s0 = 0.0;     // may be +inf
    double theta = 0.0;  // energy per unit adatom mass in the linear tail
};

Envelope build_envelope(const EnergyDensity& psi, double cap = 1e12);

double eval_envelope(const Envelope& env, double s);
double eval_envelope_deriv(const Envelope& env, double s);
double recession_slope(const Envelope& env);

}  // namespace adatom
