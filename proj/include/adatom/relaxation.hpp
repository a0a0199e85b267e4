#pragma once

#include <optional>
#include <vector>

#include "adatom/ball.hpp"
#include "adatom/envelope.hpp"
#include "adatom/geometry.hpp"

namespace adatom {

// Diagnostics of one wriggled arc: the solved oscillation and the bounds the
// construction promises (amplitude tube, frequency growth).
struct WrigglePlan {
    double target_factor = 1.0;
    int k = 0;                  // effective refinement (input k times 2^halvings)
    int halvings = 0;           // automatic refinements applied for embeddability
    double amplitude = 0.0;     // <= 1/k
    double t = 0.0;             // solved frequency in the normalized phase
    Vec2 direction;             // phase direction before normalization
    double sigma = 1.0;         // phase rescale so |xi| < pi/2
    double collar = 0.0;        // cutoff width in arclength (0 on closed arcs)
    double freq_bound_c = 0.0;  // instance constant with t * amplitude <= C
    double bound_eps = 0.0;     // threshold realizing the bound
    double bound_delta = 0.0;   // sin(eps)
    double bound_lambda = 0.0;  // arclength of the nondegenerate phase set
    double base_length = 0.0;
    double achieved_length = 0.0;
};

// Frequency of the oscillation inflating the arc length of `segment` (an open
// polyline) by the factor r at amplitude 1/k. Scan then bisection on the
// arc-length integral; any crossing is a valid choice.
double solve_frequency(const std::vector<Vec2>& segment, double r, int k);

struct ArcWriggle {
    std::vector<Vec2> points;
    WrigglePlan plan;
};

// The perturbed open arc itself (endpoints pinned by the cutoff collar).
ArcWriggle wriggle_open_arc(const std::vector<Vec2>& segment, double r, int k);

// Uniform perimeter inflation by the factor r; the boundary is partitioned
// into cells so the inflation also holds per measurement window. Stays inside
// the 1/k tube of the input.
DiscreteCouple wriggle_uniform(const DiscreteCouple& c, double r, int k,
                               std::vector<WrigglePlan>* plans = nullptr);

// Per-window perimeter gain 1 + f, f given per edge (one vector per loop).
DiscreteCouple wriggle_weighted(const DiscreteCouple& c,
                                const std::vector<std::vector<double>>& f, int k,
                                std::vector<WrigglePlan>* plans = nullptr);
DiscreteCouple wriggle_weighted(const DiscreteCouple& c, const std::vector<double>& f, int k,
                                std::vector<WrigglePlan>* plans = nullptr);

// Absolutely continuous recovery: facets above s0 are clipped to s0 and their
// edges wriggled by u/s0, trading density for perimeter at equal mass.
DiscreteCouple recover_ac(const DiscreteCouple& c, const Envelope& env, int k,
                          std::vector<WrigglePlan>* plans = nullptr);

// Dyadic approximation of an area density by small density-loaded circles,
// one per dyadic cell of side 2^-k, preserving the total mass exactly.
DiscreteCouple dirac_approx(const RasterDensity& f, int k);
// Point atoms are first splatted with a bump kernel of radius delta.
DiscreteCouple dirac_approx(const std::vector<Atom>& atoms, double delta, int k);
RasterDensity splat_atoms(const std::vector<Atom>& atoms, double delta);

// Combined recovery of carrier + singular part: recover_ac on the carrier,
// one shrinking ball per atom (jittered off the boundary), then a global
// rescale restoring the relaxed mass rho*|E| + mu(R^2) exactly.
DiscreteCouple recover_general(const AtomMeasure& mu, const Envelope& env, int k,
                               std::vector<WrigglePlan>* plans = nullptr, double rho = 1.0);

struct MinCheckSample {
    double relaxed_energy = 0.0;
    double relaxed_mass = 0.0;
    double excess = 0.0;  // relaxed_energy - gamma_m
};

struct MinCheckReport {
    double gamma_m = 0.0;          // constrained minimum over the ball family
    double ball_value = 0.0;       // relaxed energy of the discretized minimizer
    double dirac_value = 0.0;      // Theta * m, the pure-atom competitor
    double min_excess = 0.0;       // min over samples of F_bar - gamma_m
    std::size_t samples = 0;
    std::vector<MinCheckSample> worst;  // five smallest-excess samples
};

// Randomized couples with atoms, mass-matched to m, checked against the ball
// minimum of the relaxed problem.
MinCheckReport relaxed_min_check(const BallProblem& pb, const Envelope& env,
                                 std::size_t samples = 100, unsigned seed = 12345);

}  // namespace adatom
