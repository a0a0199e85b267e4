#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "adatom/numerics.hpp"

#include "json.hpp"

namespace adatom {

enum class DensityKind {
    Quadratic,        // 1 + gamma*s^2
    HalfQuadratic,    // 1 + s^2/2
    Affine,           // a*s + b
    SqrtShifted,      // sqrt(1 + s^2)
    Tabulated,
    PlateauGenerated  // tabulated output of the plateau construction
};

std::string to_string(DensityKind kind);

// Asymptotic decomposition psi(s) = a*s + b + g(s) with g -> 0, when the kind exposes one.
struct AffineTail {
    double a = 0.0;
    double b = 0.0;
};

// Surface energy per unit area as a function of the adatom density s >= 0.
// Builtin kinds carry analytic derivatives; tabulated kinds interpolate with
// a monotone cubic and differentiate the interpolant.
class EnergyDensity {
  public:
    EnergyDensity() = default;  // half-quadratic

    static EnergyDensity quadratic(double gamma);
    static EnergyDensity half_quadratic();
    static EnergyDensity affine(double a, double b);
    static EnergyDensity sqrt_shifted();
    static EnergyDensity tabulated(std::vector<double> s, std::vector<double> psi,
                                   DensityKind tag = DensityKind::Tabulated);

    double eval(double s) const;
    double deriv(double s) const;

    DensityKind kind() const { return kind_; }
    std::optional<AffineTail> affine_tail() const;
    // Largest density the kind can evaluate (table end, or +inf for builtins).
    double domain_max() const;

    double gamma() const { return gamma_; }
    double a() const { return a_; }
    double b() const { return b_; }
    const MonotoneCubic* table() const { return table_.get(); }

    nlohmann::json to_json() const;
    static EnergyDensity from_json(const nlohmann::json& spec);

  private:
    DensityKind kind_ = DensityKind::HalfQuadratic;
    double gamma_ = 0.0;
    double a_ = 0.0, b_ = 0.0;
    std::shared_ptr<const MonotoneCubic> table_;
};

// Accepts a compact spec ("quadratic:1", "halfquad", "affine:2,0.5",
// "sqrt-shifted"), an inline JSON object, or "@path" to a JSON file.
EnergyDensity density_from_spec(const std::string& spec);

struct AdmissibilityReport {
    bool ok = true;
    std::string reason;
};

// Sampled check of the admissibility requirements: psi(0) > 0, psi >= psi(0),
// convexity, and a nonnegative nondecreasing derivative.
AdmissibilityReport check_admissible(const EnergyDensity& psi, double s_max = 1e3,
                                     int points = 256);

}  // namespace adatom
