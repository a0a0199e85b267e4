// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Each check pins its tolerance in code; timed criteria enforce their budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "adatom/ball.hpp"
#include "adatom/envelope.hpp"
#include "adatom/geometry.hpp"
#include "adatom/lsc.hpp"
#include "adatom/relaxation.hpp"
#include "adatom/variation.hpp"
#include "test_support.hpp"

using namespace adatom;

namespace {

int failures = 0;

class Criterion {
  public:
    Criterion(int index, std::string label, double budget_seconds = 0.0)
        : index_(index), label_(std::move(label)), budget_(budget_seconds),
          start_(std::chrono::steady_clock::now()) {}

    void require(bool ok, const std::string& what) {
        if (!ok) issues_.push_back(what);
    }

    void finish() {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        if (budget_ > 0.0 && secs > budget_)
            issues_.push_back("runtime " + std::to_string(secs) + " s over budget " +
                              std::to_string(budget_) + " s");
        if (issues_.empty()) {
            std::printf("[PASS] %02d %-38s (%.2f s)\n", index_, label_.c_str(), secs);
        } else {
            ++failures;
            std::printf("[FAIL] %02d %-38s (%.2f s)\n", index_, label_.c_str(), secs);
            for (const auto& w : issues_) std::printf("       - %s\n", w.c_str());
        }
    }

  private:
    int index_;
    std::string label_;
    double budget_;
    std::chrono::steady_clock::time_point start_;
    std::vector<std::string> issues_;
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void criterion_01_envelope_ground_truth() {
    Criterion c(1, "envelope ground truth", 1.0);
    const auto env = build_envelope(EnergyDensity::half_quadratic());
    const double root2 = std::sqrt(2.0);
    c.require(std::abs(env.s0 - root2) <= 1e-9, "s0 = " + num(env.s0));
    c.require(std::abs(env.theta - root2) <= 1e-9, "theta = " + num(env.theta));
    c.finish();
}

// shared by criteria 2 and 4
struct GridSolution {
    double gamma, m, rho;
    BallSolution sol;
};

std::vector<GridSolution> solve_grid() {
    const double values[5] = {0.1, std::sqrt(0.1), 1.0, std::sqrt(10.0), 10.0};
    std::vector<GridSolution> out;
    for (double gamma : values)
        for (double m : values)
            for (double rho : values) {
                const BallProblem pb(2, rho, m);
                out.push_back({gamma, m, rho,
                               minimize_ball_energy(pb, EnergyDensity::quadratic(gamma))});
            }
    return out;
}

std::vector<GridSolution> criterion_02_closed_form_grid() {
    Criterion c(2, "closed form vs solver on 5x5x5 grid", 30.0);
    auto grid = solve_grid();
    double worst = 0.0;
    for (const auto& g : grid) {
        const double ref = closed_form_rstar(g.gamma, g.m, g.rho);
        worst = std::max(worst, std::abs(g.sol.radius - ref) / ref);
    }
    c.require(worst <= 1e-6, "worst relative radius mismatch " + num(worst));
    c.finish();
    return grid;
}

void criterion_03_asymptote() {
    Criterion c(3, "R* asymptote at large gamma");
    const BallProblem pb(2, 1.0, 1.0);
    const double r = closed_form_rstar(1e6, 1.0, 1.0);
    c.require(std::abs(r - pb.rbar) / pb.rbar <= 1e-3,
              "R*(1e6) = " + num(r) + " vs rbar " + num(pb.rbar));
    c.finish();
}

void criterion_04_criticality(const std::vector<GridSolution>& grid) {
    Criterion c(4, "criticality at every grid minimum");
    for (const auto& g : grid) {
        const auto psi = EnergyDensity::quadratic(g.gamma);
        const double H = 1.0 / g.sol.radius;  // (n-1)/R, n = 2
        const double resid = critical_residual(psi, g.sol.density, H, g.rho);
        const double budget = 1e-6 * g.rho * psi.deriv(g.sol.density);
        if (std::abs(resid) > budget) {
            c.require(false, "residual " + num(resid) + " at gamma=" + num(g.gamma) +
                                 " m=" + num(g.m) + " rho=" + num(g.rho));
            break;
        }
        const double s0 = 1.0 / std::sqrt(g.gamma);
        if (!(g.sol.density < s0)) {
            c.require(false, "density above threshold at gamma=" + num(g.gamma));
            break;
        }
    }
    c.finish();
}

void criterion_05_degenerate_linear() {
    Criterion c(5, "linear density: boundary solution");
    const BallProblem pb(2, 1.0, 1.0);
    const auto sol = minimize_ball_energy(pb, EnergyDensity::affine(1.0, 0.0));
    c.require(sol.kind == BallSolutionKind::BoundaryZeroDensity,
              "kind = " + to_string(sol.kind));
    c.require(sol.radius == pb.rbar, "radius not exactly rbar");
    c.require(sol.density == 0.0, "density not exactly zero");
    c.finish();
}

void criterion_06_plateau() {
    Criterion c(6, "plateau family of minimizers", 10.0);
    const BallProblem pb(2, 1.0, 1.0);
    const double r1 = 0.3 * pb.rbar, r2 = 0.6 * pb.rbar;
    const auto psi = build_plateau_density(r1, r2, pb, 1.0, 0.05);

    double worst = 0.0;
    for (int i = 0; i <= 2000; ++i)
        worst = std::max(worst, std::abs(ball_energy_derivative(pb, psi, r1 + (r2 - r1) * i / 2000.0)));
    const double budget = 1e-6 * std::abs(ball_energy(pb, psi, r1)) / pb.rbar;
    c.require(worst <= budget,
              "max |e'| on the plateau " + num(worst) + " over budget " + num(budget));

    bool below_ok = true, above_ok = true;
    for (int i = 1; i < 200; ++i) {
        const double rb = 0.05 * pb.rbar + (r1 - 0.05 * pb.rbar) * i / 200.0;
        if (ball_energy_derivative(pb, psi, rb) >= 0.0) below_ok = false;
        const double ra = r2 + (pb.rbar - r2) * i / 200.0;
        if (ball_energy_derivative(pb, psi, ra) <= 0.0) above_ok = false;
    }
    c.require(below_ok, "e' not negative below the plateau");
    c.require(above_ok, "e' not positive above the plateau");

    const auto& s = psi.table()->xs();
    const auto& p = psi.table()->ys();
    bool convex = true;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        const double d1 = (p[i] - p[i - 1]) / (s[i] - s[i - 1]);
        const double d2 = (p[i + 1] - p[i]) / (s[i + 1] - s[i]);
        if (!(d2 > d1)) convex = false;
    }
    c.require(convex, "psi'' not positive at every interior node");
    c.finish();
}

void criterion_07_wriggling() {
    Criterion c(7, "uniform wriggling of the circle", 10.0);
    const auto circ = circle_polygon({0.0, 0.0}, 1.0, 10000);
    const auto out = wriggle_uniform(circ, 2.0, 64);
    const double target = 4.0 * M_PI;
    const double per = perimeter(out);
    c.require(std::abs(per - target) / target <= 0.005,
              "perimeter " + num(per) + " vs " + num(target));
    const double haus = hausdorff_distance(circ, out);
    c.require(haus <= 1.0 / 64 + 1e-12, "hausdorff " + num(haus) + " above the 1/64 tube");
    c.finish();
}

void criterion_08_weighted_windows() {
    Criterion c(8, "localized gain on the square");
    const auto square = rectangle_polygon({0.0, 0.0, 1.0, 1.0});
    const double alpha = 0.5;
    const auto out = wriggle_weighted(square, std::vector<double>(4, alpha), 128);
    const Rect windows[4] = {{-0.1, -0.1, 1.1, 0.1},
                             {0.9, -0.1, 1.1, 1.1},
                             {-0.1, 0.9, 1.1, 1.1},
                             {-0.1, -0.1, 0.1, 1.1}};
    for (int i = 0; i < 4; ++i) {
        const auto base = relative_perimeter(square, windows[i]);
        const auto got = relative_perimeter(out, windows[i]);
        const double want = (1.0 + alpha) * base.length;
        if (std::abs(got.length - want) / want > 0.01)
            c.require(false, "window " + std::to_string(i) + ": " + num(got.length) + " vs " +
                                 num(want));
    }
    c.finish();
}

void criterion_09_dirac() {
    Criterion c(9, "dyadic ball approximation", 30.0);
    RasterDensity f;
    f.rect = {0.0, 0.0, 1.0, 1.0};
    f.nx = f.ny = 1;
    f.values = {1.0};
    const auto env = build_envelope(EnergyDensity::half_quadratic());
    WeakStarDictionary dict;
    const auto target = dict.moments(f);

    double prev_gap = -1.0, prev_dist = 1e300;
    for (int k = 2; k <= 6; ++k) {
        const auto balls = dirac_approx(f, k);
        AtomMeasure mu;
        mu.carrier = balls;
        const double m = mu.facet_mass();
        if (std::abs(m - 1.0) > 1e-12)
            c.require(false, "k=" + std::to_string(k) + " mass off by " + num(m - 1.0));
        const double gap = std::abs(energy(mu, env, 1.0).energy_fbar - env.theta);
        if (prev_gap >= 0.0 && gap > prev_gap && gap > 1e-9 * env.theta)
            c.require(false, "k=" + std::to_string(k) + " energy gap grew to " + num(gap));
        prev_gap = gap;
        const double dist = dict.distance(dict.moments(mu), target);
        if (!(dist < prev_dist))
            c.require(false, "k=" + std::to_string(k) + " weak* distance not decreasing");
        prev_dist = dist;
    }
    c.finish();
}

void criterion_10_lsc_failure() {
    Criterion c(10, "lower semicontinuity failure for 1+s^2");
    const auto psi = EnergyDensity::quadratic(1.0);

    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double min_gap = 1e300;
    for (int i = 0; i < 100000; ++i) {
        WriggleTuple t;
        t.a = std::pow(10.0, -3.0 + 6.0 * unit(rng));
        t.b = std::pow(10.0, -3.0 + 6.0 * unit(rng));
        t.alpha = 10.0 * unit(rng);
        t.beta = 10.0 * unit(rng);
        t.lambda = unit(rng);
        min_gap = std::min(min_gap, wriggle_inequality_gap(psi, t));
    }
    c.require(min_gap < -0.5, "sweep minimum gap " + num(min_gap));

    const WriggleTuple witness{1.0, 1.0, std::sqrt(3.0), std::sqrt(3.0), 0.5};
    const double wgap = wriggle_inequality_gap(psi, witness);
    c.require(std::abs(wgap + 1.0) <= 1e-9, "witness gap " + num(wgap));

    double quad_err = 0.0, margin = 1e300;
    for (int k : {8, 32, 128, 512}) {
        const auto fam = build_sawtooth(witness, k, psi);
        quad_err = std::max(quad_err, std::abs(fam.energy_k - fam.energy_k_closed_form) +
                                          std::abs(fam.energy_limit -
                                                   fam.energy_limit_closed_form));
        margin = std::min(margin, fam.energy_limit - fam.energy_k);
    }
    c.require(margin > 10.0 * quad_err,
              "margin " + num(margin) + " vs quadrature error " + num(quad_err));
    c.finish();
}

void criterion_11_lsc_pass() {
    Criterion c(11, "envelopes pass the tuple sweep");
    std::mt19937 rng(424242);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const auto& psi : {EnergyDensity::quadratic(1.0), EnergyDensity::half_quadratic(),
                            EnergyDensity::affine(1.0, 0.7), EnergyDensity::sqrt_shifted()}) {
        const Envelope env = build_envelope(psi);
        double min_gap = 1e300;
        for (int i = 0; i < 100000; ++i) {
            WriggleTuple t;
            t.a = std::pow(10.0, -3.0 + 6.0 * unit(rng));
            t.b = std::pow(10.0, -3.0 + 6.0 * unit(rng));
            t.alpha = 10.0 * unit(rng);
            t.beta = 10.0 * unit(rng);
            t.lambda = unit(rng);
            min_gap = std::min(min_gap, wriggle_inequality_gap(env, t));
        }
        if (min_gap < -1e-12)
            c.require(false, to_string(psi.kind()) + " envelope gap " + num(min_gap));
    }
    c.finish();
}

void criterion_12_first_variation() {
    Criterion c(12, "first variation vs finite difference");
    const auto psi = EnergyDensity::quadratic(0.8);
    const int n = 512;
    const double rho = 1.1;
    auto circ = circle_polygon({0.0, 0.0}, 1.0, n);
    Loop& loop = circ.loops[0];
    std::vector<double> v(n), w(n);
    for (int i = 0; i < n; ++i) {
        const double phi = 2.0 * M_PI * i / n;
        loop.density[i] = 1.0 + 0.4 * std::cos(phi);
        v[i] = std::cos(2.0 * phi);
        w[i] = std::sin(3.0 * phi);
    }
    // make the pair admissible for the discrete quadrature exactly
    const auto fv0 = first_variation(circ, v, w, psi, rho);
    double weight_total = 0.0;
    for (int i = 0; i < n; ++i)
        weight_total +=
            0.5 * (loop.edge_length((i + n - 1) % n) + loop.edge_length(i));
    for (auto& wi : w) wi -= fv0.admissibility_defect / weight_total;

    const auto fv = first_variation(circ, v, w, psi, rho);
    const double fd = testsupport::mass_preserving_fd(loop, v, w, psi, rho, 1e-4);
    c.require(std::abs(fv.value - fd) <= 1e-3 * std::abs(fd),
              "variation " + num(fv.value) + " vs difference " + num(fd));
    c.finish();
}

void criterion_13_recovery_energy() {
    Criterion c(13, "absolutely continuous recovery energy");
    const auto psi = EnergyDensity::half_quadratic();
    const auto env = build_envelope(psi);
    c.require(std::abs(eval_envelope(env, 2.0 * std::sqrt(2.0)) - 4.0) <= 1e-9,
              "envelope value at twice the threshold");

    const auto circ = circle_polygon({0.0, 0.0}, 1.0, 1024, 2.0 * env.s0);
    AtomMeasure mu;
    mu.carrier = circ;
    const double fbar_in = energy(mu, env, 1.0).energy_fbar;
    c.require(std::abs(fbar_in - 8.0 * M_PI) <= 1e-4 * 8.0 * M_PI,
              "relaxed input energy " + num(fbar_in) + " vs 8 pi");

    const auto out = recover_ac(circ, env, 64);
    const double f_out = energy(out, psi, 1.0).energy_f;
    c.require(std::abs(f_out - fbar_in) / fbar_in <= 0.01,
              "gap " + num(std::abs(f_out - fbar_in) / fbar_in) + " above 1%");
    c.finish();
}

}  // namespace

int main() {
    criterion_01_envelope_ground_truth();
    const auto grid = criterion_02_closed_form_grid();
    criterion_03_asymptote();
    criterion_04_criticality(grid);
    criterion_05_degenerate_linear();
    criterion_06_plateau();
    criterion_07_wriggling();
    criterion_08_weighted_windows();
    criterion_09_dirac();
    criterion_10_lsc_failure();
    criterion_11_lsc_pass();
    criterion_12_first_variation();
    criterion_13_recovery_energy();

    if (failures == 0)
        std::printf("all 13 acceptance criteria passed\n");
    else
        std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
