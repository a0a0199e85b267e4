#include <cmath>
#include <random>

#include "doctest.h"

#include "adatom/envelope.hpp"
#include "adatom/errors.hpp"
#include "adatom/geometry.hpp"
#include "adatom/lsc.hpp"

using namespace adatom;

namespace {
const double kSqrt3 = std::sqrt(3.0);
}

TEST_CASE("wriggle inequality gap") {
    const auto hq = EnergyDensity::half_quadratic();
    // flat slopes reduce to plain convexity
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        WriggleTuple t{5.0 * unit(rng), 5.0 * unit(rng), 0.0, 0.0, unit(rng)};
        const double direct = t.lambda * hq.eval(t.a) + (1.0 - t.lambda) * hq.eval(t.b) -
                              hq.eval(t.lambda * t.a + (1.0 - t.lambda) * t.b);
        CHECK(wriggle_inequality_gap(hq, t) == doctest::Approx(direct).epsilon(1e-12));
        CHECK(direct >= -1e-12);
    }

    // frozen example: equal densities 2 on symmetric slopes sqrt(3)
    CHECK(wriggle_inequality_gap(hq, {2.0, 2.0, kSqrt3, kSqrt3, 0.5}) ==
          doctest::Approx(-3.0).epsilon(1e-12));

    // the acceptance witness for 1 + s^2
    const auto q1 = EnergyDensity::quadratic(1.0);
    CHECK(wriggle_inequality_gap(q1, {1.0, 1.0, kSqrt3, kSqrt3, 0.5}) ==
          doctest::Approx(-1.0).epsilon(1e-12));

    // affine densities with flat slopes: the Jensen equality case
    const auto aff = EnergyDensity::affine(2.0, 1.0);
    std::uniform_real_distribution<double> lam(0.0, 1.0);
    for (double a : {0.3, 1.0, 4.0})
        CHECK(std::abs(wriggle_inequality_gap(aff, {a, 3.0 * a, 0.0, 0.0, lam(rng)})) < 1e-12);

    CHECK_THROWS_AS(wriggle_inequality_gap(hq, {-1.0, 1.0, 0.0, 0.0, 0.5}), std::domain_error);
    CHECK_THROWS_AS(wriggle_inequality_gap(hq, {1.0, 1.0, 0.0, 0.0, 1.5}), std::domain_error);
}

TEST_CASE("gap at the symmetric sqrt(3) tuple equals the subadditivity gap") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const auto& psi : {EnergyDensity::quadratic(1.0), EnergyDensity::half_quadratic(),
                            EnergyDensity::sqrt_shifted()}) {
        for (int i = 0; i < 300; ++i) {
            const double a = 4.0 * unit(rng), b = 4.0 * unit(rng);
            CHECK(wriggle_inequality_gap(psi, {a, b, kSqrt3, kSqrt3, 0.5}) ==
                  doctest::Approx(subadditivity_gap(psi, a, b)).epsilon(1e-10));
        }
    }
}

TEST_CASE("subadditivity gap examples") {
    CHECK(subadditivity_gap(EnergyDensity::quadratic(1.0), 1.0, 1.0) == doctest::Approx(-1.0));
    CHECK(std::abs(subadditivity_gap(EnergyDensity::half_quadratic(), 1.0, 1.0)) < 1e-14);
    for (const auto& psi : {EnergyDensity::half_quadratic(), EnergyDensity::quadratic(2.0)})
        CHECK(subadditivity_gap(psi, 3.0, 0.0) == doctest::Approx(psi.eval(0.0)));
    CHECK_THROWS_AS(subadditivity_gap(EnergyDensity::half_quadratic(), -1.0, 0.0),
                    std::domain_error);
}

TEST_CASE("envelopes never violate the inequality") {
    std::mt19937 rng(777);
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
        CHECK(min_gap >= -1e-12);
    }
}

TEST_CASE("sawtooth family") {
    const auto q1 = EnergyDensity::quadratic(1.0);
    const WriggleTuple t{1.0, 1.0, kSqrt3, kSqrt3, 0.5};

    CHECK_THROWS_AS(build_sawtooth(t, 0, q1), std::domain_error);

    for (int k : {1, 2, 8, 64, 512}) {
        const auto fam = build_sawtooth(t, k, q1);
        // discrete energy equals the closed form, independent of k
        CHECK(fam.energy_k == doctest::Approx(fam.energy_k_closed_form).epsilon(1e-9));
        CHECK(fam.energy_limit == doctest::Approx(fam.energy_limit_closed_form).epsilon(1e-9));
        validate_couple(fam.couple_k);
        validate_couple(fam.limit_couple);
    }

    // the counterexample: the limit costs strictly more than the oscillations
    const auto fam = build_sawtooth(t, 32, q1);
    const double quad_err = std::abs(fam.energy_k - fam.energy_k_closed_form) +
                            std::abs(fam.energy_limit - fam.energy_limit_closed_form);
    CHECK(fam.energy_limit - fam.energy_k > 10.0 * quad_err);
    CHECK(fam.energy_limit - fam.energy_k == doctest::Approx(1.0).epsilon(1e-9));

    // flat tuple: teeth collapse onto the limit graph
    const auto flat = build_sawtooth({1.0, 1.0, 0.0, 0.0, 0.5}, 16, q1);
    CHECK(perimeter(flat.couple_k) == doctest::Approx(perimeter(flat.limit_couple)).epsilon(1e-12));
    CHECK(flat.energy_k == doctest::Approx(flat.energy_limit).epsilon(1e-12));
}

TEST_CASE("sawtooth graph gap is exactly lambda(1-lambda)(alpha+beta)/k") {
    const WriggleTuple t{0.5, 2.0, 1.2, 0.8, 0.3};
    const auto q1 = EnergyDensity::quadratic(1.0);
    const double slope = t.lambda * t.alpha - (1.0 - t.lambda) * t.beta;
    for (int k : {4, 16, 64}) {
        const auto fam = build_sawtooth(t, k, q1);
        double worst = 0.0;
        for (const auto& p : fam.couple_k.loops[0].vertices) {
            if (p.y == 0.0) continue;  // base corners
            const double limit = slope * p.x + 1.0;
            worst = std::max(worst, std::abs(p.y - limit));
        }
        CHECK(worst == doctest::Approx(t.lambda * (1.0 - t.lambda) * (t.alpha + t.beta) / k)
                           .epsilon(1e-10));
    }
}

TEST_CASE("sawtooth facet measures converge weakly* at rate 1/k") {
    const auto q1 = EnergyDensity::quadratic(1.0);
    const WriggleTuple t{1.0, 2.0, 1.5, 0.5, 0.4};
    WeakStarDictionary dict;
    // strip the zero-density boundary: only the graph carries mass, so the
    // full couples integrate the same way
    auto limit_m = [&](const SawtoothFamily& fam) {
        AtomMeasure mu;
        mu.carrier = fam.limit_couple;
        return dict.moments(mu);
    };
    const auto fam0 = build_sawtooth(t, 8, q1);
    const auto target = limit_m(fam0);
    std::vector<double> dist;
    for (int k : {8, 16, 32, 64, 128}) {
        const auto fam = build_sawtooth(t, k, q1);
        AtomMeasure mu;
        mu.carrier = fam.couple_k;
        dist.push_back(dict.distance(dict.moments(mu), target));
    }
    // successive halving of k should at least nearly halve the distance
    for (std::size_t i = 0; i + 1 < dist.size(); ++i) {
        CHECK(dist[i + 1] < dist[i]);
        CHECK(dist[i + 1] <= 0.65 * dist[i]);
    }
    // fitted decay order close to 1
    const double order = std::log2(dist.front() / dist.back()) / (dist.size() - 1);
    CHECK(order > 0.7);
}
