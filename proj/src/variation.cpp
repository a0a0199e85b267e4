#include "adatom/variation.hpp"

#include <cmath>
#include <stdexcept>

#include "adatom/errors.hpp"

namespace adatom {

std::vector<double> vertex_curvatures(const Loop& loop) {
    const std::size_t n = loop.size();
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 prev = loop.vertex(i + n - 1);
        const Vec2 cur = loop.vertex(i);
        const Vec2 next = loop.vertex(i + 1);
        const Vec2 d1 = cur - prev;
        const Vec2 d2 = next - cur;
        const double turning = std::atan2(cross(d1, d2), dot(d1, d2));
        const double avg_len = 0.5 * (norm(d1) + norm(d2));
        h[i] = turning / avg_len;
    }
    return h;
}

FirstVariation first_variation(const DiscreteCouple& c, const std::vector<double>& v,
                               const std::vector<double>& w, const EnergyDensity& psi,
                               double rho) {
    if (c.loops.size() != 1) throw GeometryError("first_variation: one closed loop expected");
    const Loop& loop = c.loops.front();
    const std::size_t n = loop.size();
    if (v.size() != n || w.size() != n)
        throw std::invalid_argument("first_variation: v, w must be sampled at every vertex");

    const std::vector<double> curv = vertex_curvatures(loop);
    FirstVariation out;
    for (std::size_t i = 0; i < n; ++i) {
        const double len_prev = loop.edge_length((i + n - 1) % n);
        const double len_next = loop.edge_length(i);
        const double weight = 0.5 * (len_prev + len_next);
        // vertex density: length-weighted average of the adjacent facets
        const double u = (loop.density[(i + n - 1) % n] * len_prev + loop.density[i] * len_next) /
                         (len_prev + len_next);
        out.value += weight * (psi.deriv(u) * w[i] + psi.eval(u) * v[i] * curv[i]);
        out.admissibility_defect += weight * (w[i] + v[i] * (u * curv[i] + rho));
    }
    return out;
}

}  // namespace adatom
