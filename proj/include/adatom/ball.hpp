#pragma once

#include <optional>
#include <vector>

#include "adatom/density.hpp"

namespace adatom {

// Constrained family (B_R, ubar(R)) with rho*|B_R| + ubar(R)*P(B_R) = m.
struct BallProblem {
    int n = 2;
    double rho = 1.0;
    double m = 1.0;
    double omega_n = 0.0;  // volume of the unit ball
    double rbar = 0.0;     // radius exhausting the mass with zero boundary density

    BallProblem(int n, double rho, double m);
};

enum class BallSolutionKind { InteriorMinimum, BoundaryZeroDensity, NoMinimizer };

std::string to_string(BallSolutionKind kind);

struct BallSolution {
    double radius = 0.0;
    double density = 0.0;
    double energy = 0.0;
    BallSolutionKind kind = BallSolutionKind::InteriorMinimum;
    // Equal-energy interval when the minimum is a plateau; both equal `radius`
    // for an isolated minimum.
    double plateau_lo = 0.0;
    double plateau_hi = 0.0;
    std::vector<double> critical_radii;  // every sign change of e' found by the scan
};

// ubar(R) = (m - rho*omega_n*R^n) / (n*omega_n*R^(n-1)) for R in (0, rbar].
double ubar(const BallProblem& pb, double R);

// e(R) = n*omega_n*R^(n-1) * psi(ubar(R)), and its analytic derivative.
double ball_energy(const BallProblem& pb, const EnergyDensity& psi, double R);
double ball_energy_derivative(const BallProblem& pb, const EnergyDensity& psi, double R);

enum class TriBool { False, True, Unknown };

struct HypothesesReport {
    bool a1 = false;        // psi'(0) < (n-1) (omega_n/m)^(1/n) rho^((1-n)/n) psi(0)
    bool a2a = false;       // superlinear growth of psi
    TriBool a2b = TriBool::Unknown;  // affine-tail decay condition
};

HypothesesReport check_hypotheses(const BallProblem& pb, const EnergyDensity& psi,
                                  double cap = 1e12);

// Log-spaced 4096-point bracket scan of e' followed by bisection. Degenerate
// outcomes (boundary minimum, Dirac escape) are encoded in the kind; plateaus
// report the full equal-energy interval.
BallSolution minimize_ball_energy(const BallProblem& pb, const EnergyDensity& psi);

// n = 2 closed form for psi(s) = 1 + gamma*s^2.
double closed_form_rstar(double gamma, double m, double rho);

// (psi(c) - c*psi'(c)) * H - rho * psi'(c); zero at regular critical points.
double critical_residual(const EnergyDensity& psi, double c, double H, double rho);

// Strictly convex density whose ball energy is flat on [r1, r2], decreasing
// before and increasing after. eps controls the perturbation away from the
// flat profile and is halved until the tabulated result is convex.
EnergyDensity build_plateau_density(double r1, double r2, const BallProblem& pb,
                                    double g_m, double eps);

}  // namespace adatom
