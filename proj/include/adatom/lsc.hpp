#pragma once

#include "adatom/density.hpp"
#include "adatom/geometry.hpp"

namespace adatom {

// Parameters of one oscillation pattern: densities a, b on the two slope
// families alpha, -beta, with lambda the up-slope fraction.
struct WriggleTuple {
    double a = 0.0;
    double b = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double lambda = 0.5;
};

// RHS - LHS of the oscillation inequality. Nonnegative for every tuple is
// necessary for lower semicontinuity; a negative gap certifies failure.
double wriggle_inequality_gap(const EnergyDensity& psi, const WriggleTuple& t);
// Same inequality evaluated on an envelope, which must never violate it.
double wriggle_inequality_gap(const Envelope& psibar, const WriggleTuple& t);

// psi(a) + psi(b) - psi(a+b).
double subadditivity_gap(const EnergyDensity& psi, double a, double b);

// Density carried by the flat limit graph.
double sawtooth_limit_density(const WriggleTuple& t);

struct SawtoothFamily {
    DiscreteCouple couple_k;      // k-tooth subgraph, densities a / b / 0
    DiscreteCouple limit_couple;  // straight graph with the averaged density
    double energy_k = 0.0;        // F of the discrete k-tooth couple
    double energy_limit = 0.0;    // F of the discrete limit couple
    double energy_k_closed_form = 0.0;
    double energy_limit_closed_form = 0.0;
    double limit_density = 0.0;
    int k = 0;
};

// Subgraph of the k-tooth profile over [0,1] with densities a on up-slopes,
// b on down-slopes, 0 on the flat and side boundary.
SawtoothFamily build_sawtooth(const WriggleTuple& t, int k, const EnergyDensity& psi);

}  // namespace adatom
