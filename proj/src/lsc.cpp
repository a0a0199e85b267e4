#include "adatom/lsc.hpp"

#include <cmath>
#include <stdexcept>

#include "adatom/errors.hpp"

namespace adatom {

namespace {

void validate_tuple(const WriggleTuple& t) {
    if (t.a < 0.0 || t.b < 0.0 || t.alpha < 0.0 || t.beta < 0.0)
        throw std::domain_error("wriggle tuple entries must be nonnegative");
    if (t.lambda < 0.0 || t.lambda > 1.0)
        throw std::domain_error("wriggle tuple lambda must lie in [0,1]");
}

}  // namespace

double sawtooth_limit_density(const WriggleTuple& t) {
    const double up = t.lambda * std::sqrt(1.0 + t.alpha * t.alpha);
    const double down = (1.0 - t.lambda) * std::sqrt(1.0 + t.beta * t.beta);
    const double slope = t.lambda * t.alpha - (1.0 - t.lambda) * t.beta;
    return (t.a * up + t.b * down) / std::sqrt(1.0 + slope * slope);
}

namespace {

// Combination weights of the oscillation pattern. Extended precision: on the
// linear part of an envelope the two sides cancel exactly in real arithmetic,
// and the certified bound on the gap sits below plain double rounding at the
// sweep's density scale.
struct TupleWeights {
    long double up, down, denom, mixed;
};

TupleWeights tuple_weights(const WriggleTuple& t) {
    const long double l = t.lambda;
    const long double up = l * std::sqrt(1.0L + (long double)t.alpha * t.alpha);
    const long double down = (1.0L - l) * std::sqrt(1.0L + (long double)t.beta * t.beta);
    const long double slope = l * t.alpha - (1.0L - l) * t.beta;
    const long double denom = std::sqrt(1.0L + slope * slope);
    return {up, down, denom, ((long double)t.a * up + (long double)t.b * down) / denom};
}

}  // namespace

double wriggle_inequality_gap(const EnergyDensity& psi, const WriggleTuple& t) {
    validate_tuple(t);
    const TupleWeights w = tuple_weights(t);
    const long double lhs = psi.eval(static_cast<double>(w.mixed));
    const long double rhs =
        ((long double)psi.eval(t.a) * w.up + (long double)psi.eval(t.b) * w.down) / w.denom;
    return static_cast<double>(rhs - lhs);
}

double wriggle_inequality_gap(const Envelope& psibar, const WriggleTuple& t) {
    validate_tuple(t);
    const TupleWeights w = tuple_weights(t);
    auto envelope_ld = [&](long double s) -> long double {
        if (s < psibar.s0) return psibar.base.eval(static_cast<double>(s));
        return (long double)psibar.theta * s;
    };
    const long double lhs = envelope_ld(w.mixed);
    const long double rhs =
        (envelope_ld(t.a) * w.up + envelope_ld(t.b) * w.down) / w.denom;
    return static_cast<double>(rhs - lhs);
}

double subadditivity_gap(const EnergyDensity& psi, double a, double b) {
    if (a < 0.0 || b < 0.0) throw std::domain_error("subadditivity_gap: a, b >= 0 required");
    return psi.eval(a) + psi.eval(b) - psi.eval(a + b);
}

namespace {

// Tooth profile value at the breakpoints, evaluated from the closed form so
// roundoff does not accumulate across teeth.
double tooth_height_up_end(const WriggleTuple& t, int j, int k) {
    // value at s = (j + lambda)/k, top of tooth j
    const double s = (j + t.lambda) / k;
    return s * t.alpha + 1.0 - (1.0 - t.lambda) * j * (t.alpha + t.beta) / k;
}

double tooth_height_down_end(const WriggleTuple& t, int j, int k) {
    // value at s = (j+1)/k, bottom of tooth j
    const double s = (j + 1.0) / k;
    return -s * t.beta + 1.0 + t.lambda * (j + 1.0) * (t.alpha + t.beta) / k;
}

}  // namespace

SawtoothFamily build_sawtooth(const WriggleTuple& t, int k, const EnergyDensity& psi) {
    validate_tuple(t);
    if (k < 1) throw std::domain_error("build_sawtooth: k >= 1 required");

    const double h0 = 1.0;
    const double slope = t.lambda * t.alpha - (1.0 - t.lambda) * t.beta;
    const double h1 = 1.0 + slope;

    // graph breakpoints left to right: j/k, (j+lambda)/k, (j+1)/k, ...
    std::vector<Vec2> graph;
    std::vector<double> graph_density;  // density of the edge LEFT of each point
    graph.push_back({0.0, h0});
    for (int j = 0; j < k; ++j) {
        if (t.lambda > 0.0) {
            graph.push_back({(j + t.lambda) / k, tooth_height_up_end(t, j, k)});
            graph_density.push_back(t.a);
        }
        if (t.lambda < 1.0) {
            graph.push_back({(j + 1.0) / k, tooth_height_down_end(t, j, k)});
            graph_density.push_back(t.b);
        }
    }
    for (const auto& p : graph)
        if (!(p.y > 0.0)) throw GeometryError("sawtooth profile dips below the base line");

    // counterclockwise subgraph: base, right side, graph right-to-left, left side
    std::vector<Vec2> verts;
    std::vector<double> dens;
    verts.push_back({0.0, 0.0});
    dens.push_back(0.0);  // base
    verts.push_back({1.0, 0.0});
    dens.push_back(0.0);  // right side
    for (std::size_t i = graph.size(); i-- > 0;) {
        verts.push_back(graph[i]);
        dens.push_back(i > 0 ? graph_density[i - 1] : 0.0);  // last entry = left side
    }

    SawtoothFamily fam;
    fam.k = k;
    fam.couple_k = DiscreteCouple(std::move(verts), std::move(dens));
    fam.limit_density = sawtooth_limit_density(t);
    fam.limit_couple = DiscreteCouple({{0.0, 0.0}, {1.0, 0.0}, {1.0, h1}, {0.0, h0}},
                                      {0.0, 0.0, fam.limit_density, 0.0});

    const double rho = 1.0;  // mass plays no role in these energies
    fam.energy_k = energy(fam.couple_k, psi, rho).energy_f;
    fam.energy_limit = energy(fam.limit_couple, psi, rho).energy_f;

    const double up = t.lambda * std::sqrt(1.0 + t.alpha * t.alpha);
    const double down = (1.0 - t.lambda) * std::sqrt(1.0 + t.beta * t.beta);
    fam.energy_k_closed_form =
        psi.eval(0.0) * (1.0 + h0 + h1) + psi.eval(t.a) * up + psi.eval(t.b) * down;
    fam.energy_limit_closed_form = psi.eval(0.0) * (1.0 + h0 + h1) +
                                   psi.eval(fam.limit_density) * std::sqrt(1.0 + slope * slope);
    return fam;
}

}  // namespace adatom
