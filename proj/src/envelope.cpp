#include "adatom/envelope.hpp"

#include <cmath>
#include <limits>

#include "adatom/errors.hpp"
#include "adatom/numerics.hpp"

namespace adatom {

double parabolicity_margin(const EnergyDensity& psi, double s) {
    if (s < 0.0) throw std::domain_error("parabolicity_margin: s < 0");
    return psi.eval(s) - s * psi.deriv(s);
}

double compute_s0(const EnergyDensity& psi, double cap) {
    if (parabolicity_margin(psi, 0.0) < 0.0)
        throw InvalidDensityError("parabolicity margin negative at s = 0");
    cap = std::min(cap, psi.domain_max());

    // expand until the margin turns strictly negative: densities that stay
    // parabolic have margins decaying to zero without ever crossing
    double lo = 0.0;
    double hi = std::min(1.0, cap);
    while (parabolicity_margin(psi, hi) >= 0.0) {
        if (hi >= cap) return std::numeric_limits<double>::infinity();
        lo = hi;
        hi = std::min(2.0 * hi, cap);
    }
    return bisect([&](double s) { return parabolicity_margin(psi, s); }, lo, hi, 1e-12);
}

Envelope build_envelope(const EnergyDensity& psi, double cap) {
    Envelope env;
    env.base = psi;
    env.s0 = compute_s0(psi, cap);
    if (std::isfinite(env.s0)) {
        env.theta = psi.deriv(env.s0);
    } else {
        // slope of the supporting lines at infinity, approached from below
        const double s = std::min(cap, psi.domain_max());
        env.theta = (psi.eval(s) - psi.eval(0.0)) / s;
    }
    return env;
}

double eval_envelope(const Envelope& env, double s) {
    if (s < 0.0) throw std::domain_error("eval_envelope: s < 0");
    if (s < env.s0) return env.base.eval(s);
    return env.theta * s;
}

double eval_envelope_deriv(const Envelope& env, double s) {
    if (s < 0.0) throw std::domain_error("eval_envelope_deriv: s < 0");
    if (s < env.s0) return env.base.deriv(s);
    return env.theta;
}

double recession_slope(const Envelope& env) { return env.theta; }

}  // namespace adatom
