#include "adatom/ball.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "adatom/errors.hpp"
#include "adatom/numerics.hpp"

namespace adatom {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kScanPoints = 4096;
}  // namespace

BallProblem::BallProblem(int n_, double rho_, double m_) : n(n_), rho(rho_), m(m_) {
    if (n < 2) throw std::invalid_argument("BallProblem: n >= 2 required");
    if (!(rho > 0.0) || !(m > 0.0)) throw std::invalid_argument("BallProblem: rho, m > 0 required");
    omega_n = std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
    rbar = std::pow(m / (rho * omega_n), 1.0 / n);
}

std::string to_string(BallSolutionKind kind) {
    switch (kind) {
        case BallSolutionKind::InteriorMinimum: return "interior-minimum";
        case BallSolutionKind::BoundaryZeroDensity: return "boundary-zero-density";
        case BallSolutionKind::NoMinimizer: return "no-minimizer-flagged";
    }
    return "unknown";
}

double ubar(const BallProblem& pb, double R) {
    if (!(R > 0.0) || R > pb.rbar * (1.0 + 1e-12))
        throw std::domain_error("ubar: R outside (0, rbar]");
    const double value =
        (pb.m - pb.rho * pb.omega_n * std::pow(R, pb.n)) / (pb.n * pb.omega_n * std::pow(R, pb.n - 1));
    return std::max(0.0, value);  // clamp roundoff at R = rbar
}

double ball_energy(const BallProblem& pb, const EnergyDensity& psi, double R) {
    return pb.n * pb.omega_n * std::pow(R, pb.n - 1) * psi.eval(ubar(pb, R));
}

double ball_energy_derivative(const BallProblem& pb, const EnergyDensity& psi, double R) {
    const double u = ubar(pb, R);
    const double factor = pb.rho / pb.n + (pb.n - 1) * pb.m / (pb.n * pb.omega_n * std::pow(R, pb.n));
    return pb.n * pb.omega_n * std::pow(R, pb.n - 2) *
           ((pb.n - 1) * psi.eval(u) - R * psi.deriv(u) * factor);
}

HypothesesReport check_hypotheses(const BallProblem& pb, const EnergyDensity& psi, double cap) {
    HypothesesReport report;
    const double lhs = psi.deriv(0.0);
    const double rhs = (pb.n - 1) * std::pow(pb.omega_n / pb.m, 1.0 / pb.n) *
                       std::pow(pb.rho, (1.0 - pb.n) / static_cast<double>(pb.n)) * psi.eval(0.0);
    report.a1 = lhs < rhs;

    const double top = std::min(cap, psi.domain_max());
    const double s_lo = top / 100.0;
    report.a2a = psi.eval(top) / top > 10.0 * psi.eval(s_lo) / s_lo;

    const auto tail = psi.affine_tail();
    if (!tail) {
        report.a2b = (psi.kind() == DensityKind::Tabulated ||
                      psi.kind() == DensityKind::PlateauGenerated)
                         ? TriBool::Unknown
                         : TriBool::False;
        return report;
    }
    if (tail->b > 0.0) {
        report.a2b = TriBool::False;
        return report;
    }
    // decay grid capped at 1e6: past that the remainder g = psi - a s - b of a
    // slowly decaying tail falls below the rounding of psi itself
    const double p = 1.0 / (pb.n - 1);
    const double q = pb.n / static_cast<double>(pb.n - 1);
    double first_g = 0.0, last_g = 0.0, first_dg = 0.0, last_dg = 0.0;
    const double s_max = std::min(1e6, psi.domain_max());
    bool first = true;
    for (double s = 1e3; s <= s_max * (1.0 + 1e-9); s *= 10.0) {
        const double g = psi.eval(s) - tail->a * s - tail->b;
        const double dg = psi.deriv(s) - tail->a;
        const double wg = std::pow(s, p) * g;
        const double wdg = std::pow(s, q) * dg;
        if (first) {
            first_g = wg;
            first_dg = wdg;
            first = false;
        }
        last_g = wg;
        last_dg = wdg;
    }
    const double tol = 1e-6 * (std::abs(tail->a) + 1.0);
    const bool g_decays = std::abs(last_g) < tol || std::abs(last_g) < 0.1 * std::abs(first_g);
    const bool dg_decays = std::abs(last_dg) < tol || std::abs(last_dg) < 0.1 * std::abs(first_dg);
    report.a2b = (g_decays && dg_decays) ? TriBool::True : TriBool::False;
    return report;
}

namespace {

// Energy of the vanishing-radius tail: m * lim psi(s)/s, the Dirac escape value.
double escape_energy(const BallProblem& pb, const EnergyDensity& psi) {
    if (const auto tail = psi.affine_tail()) return pb.m * tail->a;
    const double s = std::min(1e12, psi.domain_max()) * 0.999;
    return pb.m * psi.eval(s) / s;
}

}  // namespace

BallSolution minimize_ball_energy(const BallProblem& pb, const EnergyDensity& psi) {
    double r_lo = pb.rbar * 1e-6;
    if (std::isfinite(psi.domain_max())) {
        // tabulated densities only reach down to the radius whose ubar hits the table end
        const double s_top = psi.domain_max();
        if (ubar(pb, r_lo) > s_top) {
            r_lo = bisect([&](double R) { return ubar(pb, R) - s_top; }, r_lo, pb.rbar, 1e-14) *
                   (1.0 + 1e-10);
        }
    }
    const double log_lo = std::log(r_lo);
    const double log_hi = std::log(pb.rbar);

    std::vector<double> radii(kScanPoints), deriv(kScanPoints);
    parallel_for(kScanPoints, [&](std::size_t i) {
        const double t = static_cast<double>(i) / (kScanPoints - 1);
        radii[i] = std::exp(log_lo + t * (log_hi - log_lo));
        if (i + 1 == kScanPoints) radii[i] = pb.rbar;
        deriv[i] = ball_energy_derivative(pb, psi, radii[i]);
    });

    // secant polish after bisection: the criticality residual divides by
    // psi'(c), which can make 1e-10 in R too coarse at small radii
    auto polish = [&](double lo, double hi, double root) {
        double x0 = root * (1.0 - 1e-9), x1 = root;
        double f0 = ball_energy_derivative(pb, psi, x0);
        for (int it = 0; it < 12; ++it) {
            const double f1 = ball_energy_derivative(pb, psi, x1);
            if (f1 == 0.0 || f1 == f0) break;
            const double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
            if (!(x2 > lo && x2 < hi)) break;
            x0 = x1;
            f0 = f1;
            x1 = x2;
            if (std::abs(x1 - x0) <= 1e-15 * std::abs(x1)) break;
        }
        return x1;
    };

    BallSolution sol;
    for (int i = 0; i + 1 < kScanPoints; ++i) {
        if (deriv[i] == 0.0) {
            sol.critical_radii.push_back(radii[i]);
        } else if ((deriv[i] < 0.0) != (deriv[i + 1] < 0.0)) {
            const double root =
                bisect([&](double R) { return ball_energy_derivative(pb, psi, R); }, radii[i],
                       radii[i + 1], 1e-10);
            sol.critical_radii.push_back(polish(radii[i], radii[i + 1], root));
        }
    }

    const bool all_negative = std::all_of(deriv.begin(), deriv.end(), [](double d) { return d < 0.0; });
    const bool all_positive = std::all_of(deriv.begin(), deriv.end(), [](double d) { return d > 0.0; });

    if (all_positive) {
        sol.kind = BallSolutionKind::NoMinimizer;
        sol.radius = 0.0;
        sol.density = kInf;
        sol.energy = escape_energy(pb, psi);
        sol.plateau_lo = sol.plateau_hi = 0.0;
        return sol;
    }
    if (all_negative) {
        sol.kind = BallSolutionKind::BoundaryZeroDensity;
        sol.radius = pb.rbar;
        sol.density = 0.0;
        sol.energy = ball_energy(pb, psi, pb.rbar);
        sol.plateau_lo = sol.plateau_hi = pb.rbar;
        return sol;
    }

    // candidates: interior criticals plus the boundary when e' ends nonpositive
    double best_r = pb.rbar;
    double best_e = ball_energy(pb, psi, pb.rbar);
    bool boundary_best = true;
    if (deriv.back() > 0.0) best_e = kInf;
    for (double r : sol.critical_radii) {
        const double e = ball_energy(pb, psi, r);
        if (e < best_e) {
            best_e = e;
            best_r = r;
            boundary_best = false;
        }
    }
    if (!std::isfinite(best_e)) {
        // e' ends positive but no bracketed root survived; fall back to grid argmin
        for (int i = 0; i < kScanPoints; ++i) {
            const double e = ball_energy(pb, psi, radii[i]);
            if (e < best_e) {
                best_e = e;
                best_r = radii[i];
                boundary_best = (i + 1 == kScanPoints);
            }
        }
    }

    if (escape_energy(pb, psi) < best_e * (1.0 - 1e-12)) {
        sol.kind = BallSolutionKind::NoMinimizer;
        sol.radius = 0.0;
        sol.density = kInf;
        sol.energy = escape_energy(pb, psi);
        sol.plateau_lo = sol.plateau_hi = 0.0;
        return sol;
    }

    sol.radius = best_r;
    sol.energy = best_e;
    if (boundary_best) {
        sol.kind = BallSolutionKind::BoundaryZeroDensity;
        sol.radius = pb.rbar;
        sol.density = 0.0;
    } else {
        sol.kind = BallSolutionKind::InteriorMinimum;
        sol.density = ubar(pb, best_r);
    }

    // Equal-energy plateau: contiguous band of grid radii within 1e-8 relative
    // of the minimum, endpoints refined by bisection on the band indicator.
    const double band = best_e * (1.0 + 1e-8);
    int i_best = 0;
    double d_best = kInf;
    for (int i = 0; i < kScanPoints; ++i) {
        const double d = std::abs(radii[i] - sol.radius);
        if (d < d_best) {
            d_best = d;
            i_best = i;
        }
    }
    int lo = i_best, hi = i_best;
    while (lo > 0 && ball_energy(pb, psi, radii[lo - 1]) <= band) --lo;
    while (hi + 1 < kScanPoints && ball_energy(pb, psi, radii[hi + 1]) <= band) ++hi;
    auto in_band = [&](double R) { return ball_energy(pb, psi, R) - band; };
    sol.plateau_lo = (lo == 0) ? radii[0]
                               : bisect(in_band, radii[lo - 1], radii[lo], 1e-10);
    sol.plateau_hi = (hi + 1 == kScanPoints)
                         ? radii[kScanPoints - 1]
                         : bisect(in_band, radii[hi + 1], radii[hi], 1e-10);
    // an isolated quadratic minimum produces a thin band at this tolerance;
    // only clearly wider intervals are genuine ties
    const double local_spacing = sol.radius * (log_hi - log_lo) / (kScanPoints - 1);
    if (sol.plateau_hi - sol.plateau_lo < std::max(8.0 * local_spacing, 1e-3 * pb.rbar))
        sol.plateau_lo = sol.plateau_hi = sol.radius;
    return sol;
}

double closed_form_rstar(double gamma, double m, double rho) {
    if (!(gamma > 0.0) || !(m > 0.0) || !(rho > 0.0))
        throw std::domain_error("closed_form_rstar: gamma, m, rho must be positive");
    const double gmr = gamma * m * rho;
    const double disc = gmr * gmr - M_PI * gmr + M_PI * M_PI;
    return std::sqrt((2.0 * std::sqrt(disc) + gmr - 2.0 * M_PI) / (3.0 * M_PI * gamma)) / rho;
}

double critical_residual(const EnergyDensity& psi, double c, double H, double rho) {
    return (psi.eval(c) - c * psi.deriv(c)) * H - rho * psi.deriv(c);
}

namespace {

struct PlateauProfile {
    double r1, r2, rbar, eps;
    int n;

    // f = h off [r1, r2]: lifted by a smoothstep above r2, lowered below r1 by a
    // perturbation vanishing at r1 and decaying like R^n toward 0.
    double f(double R) const {
        const double h = -(n - 1) / R;
        if (R > r2) {
            const double t = (R - r2) / (rbar - r2);
            return h + eps * smoothstep(t);
        }
        if (R < r1) {
            const double w = 0.5 * r1;
            const double t = std::min(1.0, (r1 - R) / w);
            return h - eps * smoothstep(t) * std::pow(R / r1, n);
        }
        return h;
    }
};

}  // namespace

EnergyDensity build_plateau_density(double r1, double r2, const BallProblem& pb,
                                    double g_m, double eps) {
    if (!(r1 > 0.0) || r2 < r1 || !(r2 < pb.rbar))
        throw std::domain_error("build_plateau_density: need 0 < r1 <= r2 < rbar");
    if (!(g_m > 0.0)) throw std::domain_error("build_plateau_density: g_m > 0 required");
    if (!(eps > 0.0)) throw std::domain_error("build_plateau_density: eps > 0 required");

    constexpr int kSteps = 100000;
    const double r_min = 1e-4 * pb.rbar;

    for (int attempt = 0; attempt < 20; ++attempt, eps *= 0.5) {
        PlateauProfile prof{r1, r2, pb.rbar, eps, pb.n};
        if (prof.f(pb.rbar) >= 0.0) continue;  // eps too large to keep f negative

        const double h = (pb.rbar - r_min) / kSteps;
        std::vector<double> s_grid(kSteps + 1), psi_grid(kSteps + 1);
        double g = g_m;
        double R = pb.rbar;
        s_grid[0] = 0.0;  // ubar(rbar) = 0 by construction
        psi_grid[0] = g;
        for (int i = 1; i <= kSteps; ++i) {
            const double k1 = prof.f(R) * g;
            const double k2 = prof.f(R - 0.5 * h) * (g - 0.5 * h * k1);
            const double k3 = prof.f(R - 0.5 * h) * (g - 0.5 * h * k2);
            const double k4 = prof.f(R - h) * (g - h * k3);
            g -= h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            R = pb.rbar - i * h;
            s_grid[i] = ubar(pb, R);
            psi_grid[i] = g;
        }

        bool convex = true;
        for (int i = 1; i < kSteps && convex; ++i) {
            const double d1 = (psi_grid[i] - psi_grid[i - 1]) / (s_grid[i] - s_grid[i - 1]);
            const double d2 = (psi_grid[i + 1] - psi_grid[i]) / (s_grid[i + 1] - s_grid[i]);
            if (!(d2 > d1)) convex = false;
        }
        if (!convex) continue;
        return EnergyDensity::tabulated(std::move(s_grid), std::move(psi_grid),
                                        DensityKind::PlateauGenerated);
    }
    throw ConstructionError("build_plateau_density: convexity not reached after 20 eps halvings");
}

}  // namespace adatom
