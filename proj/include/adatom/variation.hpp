#pragma once

#include <vector>

#include "adatom/density.hpp"
#include "adatom/geometry.hpp"

namespace adatom {

// Turning angle divided by the average adjacent edge length, one value per
// vertex. Positive on counterclockwise convex boundaries.
std::vector<double> vertex_curvatures(const Loop& loop);

struct FirstVariation {
    double value = 0.0;
    // quadrature of w + v*(u*H + rho); zero for admissible velocity pairs
    double admissibility_defect = 0.0;
};

// Derivative of the surface energy along a normal speed v and density speed w
// sampled at the vertices of a single closed loop.
FirstVariation first_variation(const DiscreteCouple& c, const std::vector<double>& v,
                               const std::vector<double>& w, const EnergyDensity& psi,
                               double rho);

}  // namespace adatom
