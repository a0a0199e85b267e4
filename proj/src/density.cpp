#include "adatom/density.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "adatom/errors.hpp"

namespace adatom {

std::string to_string(DensityKind kind) {
    switch (kind) {
        case DensityKind::Quadratic: return "quadratic";
        case DensityKind::HalfQuadratic: return "half-quadratic";
        case DensityKind::Affine: return "affine";
        case DensityKind::SqrtShifted: return "sqrt-shifted";
        case DensityKind::Tabulated: return "tabulated";
        case DensityKind::PlateauGenerated: return "plateau-generated";
    }
    return "unknown";
}

EnergyDensity EnergyDensity::quadratic(double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("quadratic density needs gamma > 0");
    EnergyDensity d;
    d.kind_ = DensityKind::Quadratic;
    d.gamma_ = gamma;
    return d;
}

EnergyDensity EnergyDensity::half_quadratic() {
    EnergyDensity d;
    d.kind_ = DensityKind::HalfQuadratic;
    return d;
}

EnergyDensity EnergyDensity::affine(double a, double b) {
    if (a < 0.0) throw std::invalid_argument("affine density needs a >= 0");
    EnergyDensity d;
    d.kind_ = DensityKind::Affine;
    d.a_ = a;
    d.b_ = b;
    return d;
}

EnergyDensity EnergyDensity::sqrt_shifted() {
    EnergyDensity d;
    d.kind_ = DensityKind::SqrtShifted;
    return d;
}

EnergyDensity EnergyDensity::tabulated(std::vector<double> s, std::vector<double> psi,
                                       DensityKind tag) {
    if (s.size() != psi.size() || s.size() < 2)
        throw std::invalid_argument("tabulated density needs matching s/psi arrays with >= 2 nodes");
    if (s.front() != 0.0) throw std::invalid_argument("tabulated density must start at s = 0");
    EnergyDensity d;
    d.kind_ = (tag == DensityKind::PlateauGenerated) ? tag : DensityKind::Tabulated;
    d.table_ = std::make_shared<MonotoneCubic>(std::move(s), std::move(psi));
    return d;
}

double EnergyDensity::eval(double s) const {
    if (s < 0.0) throw std::domain_error("energy density evaluated at s < 0");
    switch (kind_) {
        case DensityKind::Quadratic: return 1.0 + gamma_ * s * s;
        case DensityKind::HalfQuadratic: return 1.0 + 0.5 * s * s;
        case DensityKind::Affine: return a_ * s + b_;
        case DensityKind::SqrtShifted: return std::sqrt(1.0 + s * s);
        case DensityKind::Tabulated:
        case DensityKind::PlateauGenerated:
            if (s > table_->x_max())
                throw std::domain_error("tabulated density evaluated outside its table");
            return table_->eval(s);
    }
    throw std::logic_error("unreachable density kind");
}

double EnergyDensity::deriv(double s) const {
    if (s < 0.0) throw std::domain_error("energy density derivative at s < 0");
    switch (kind_) {
        case DensityKind::Quadratic: return 2.0 * gamma_ * s;
        case DensityKind::HalfQuadratic: return s;
        case DensityKind::Affine: return a_;
        case DensityKind::SqrtShifted: return s / std::sqrt(1.0 + s * s);
        case DensityKind::Tabulated:
        case DensityKind::PlateauGenerated:
            if (s > table_->x_max())
                throw std::domain_error("tabulated density evaluated outside its table");
            return table_->deriv(s);
    }
    throw std::logic_error("unreachable density kind");
}

std::optional<AffineTail> EnergyDensity::affine_tail() const {
    switch (kind_) {
        case DensityKind::Affine: return AffineTail{a_, b_};
        case DensityKind::SqrtShifted: return AffineTail{1.0, 0.0};
        default: return std::nullopt;
    }
}

double EnergyDensity::domain_max() const {
    if (table_) return table_->x_max();
    return std::numeric_limits<double>::infinity();
}

nlohmann::json EnergyDensity::to_json() const {
    nlohmann::json j;
    j["kind"] = to_string(kind_);
    switch (kind_) {
        case DensityKind::Quadratic: j["gamma"] = gamma_; break;
        case DensityKind::Affine:
            j["a"] = a_;
            j["b"] = b_;
            break;
        case DensityKind::Tabulated:
        case DensityKind::PlateauGenerated:
            j["s"] = table_->xs();
            j["psi"] = table_->ys();
            break;
        default: break;
    }
    return j;
}

EnergyDensity EnergyDensity::from_json(const nlohmann::json& spec) {
    if (!spec.is_object() || !spec.contains("kind"))
        throw std::invalid_argument("density spec must be an object with a \"kind\" field");
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "quadratic") return quadratic(spec.at("gamma").get<double>());
    if (kind == "half-quadratic" || kind == "halfquad") return half_quadratic();
    if (kind == "affine") return affine(spec.at("a").get<double>(), spec.at("b").get<double>());
    if (kind == "sqrt-shifted") return sqrt_shifted();
    if (kind == "tabulated" || kind == "plateau-generated") {
        auto s = spec.at("s").get<std::vector<double>>();
        auto psi = spec.at("psi").get<std::vector<double>>();
        return tabulated(std::move(s), std::move(psi),
                         kind == "plateau-generated" ? DensityKind::PlateauGenerated
                                                     : DensityKind::Tabulated);
    }
    throw std::invalid_argument("unknown density kind: " + kind);
}

EnergyDensity density_from_spec(const std::string& spec) {
    if (spec.empty()) throw std::invalid_argument("empty density spec");
    if (spec[0] == '{') return EnergyDensity::from_json(nlohmann::json::parse(spec));
    if (spec[0] == '@') {
        std::ifstream in(spec.substr(1));
        if (!in) throw std::invalid_argument("cannot open density file: " + spec.substr(1));
        nlohmann::json j;
        in >> j;
        return EnergyDensity::from_json(j);
    }
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    std::vector<double> args;
    if (colon != std::string::npos) {
        std::stringstream ss(spec.substr(colon + 1));
        std::string tok;
        while (std::getline(ss, tok, ',')) args.push_back(std::stod(tok));
    }
    auto want = [&](std::size_t n) {
        if (args.size() != n)
            throw std::invalid_argument("density spec \"" + name + "\" takes " +
                                        std::to_string(n) + " parameter(s)");
    };
    if (name == "quadratic") {
        want(1);
        return EnergyDensity::quadratic(args[0]);
    }
    if (name == "halfquad" || name == "half-quadratic") {
        want(0);
        return EnergyDensity::half_quadratic();
    }
    if (name == "affine") {
        want(2);
        return EnergyDensity::affine(args[0], args[1]);
    }
    if (name == "sqrt-shifted") {
        want(0);
        return EnergyDensity::sqrt_shifted();
    }
    throw std::invalid_argument("unknown density spec: " + spec);
}

AdmissibilityReport check_admissible(const EnergyDensity& psi, double s_max, int points) {
    AdmissibilityReport report;
    s_max = std::min(s_max, psi.domain_max());
    const double psi0 = psi.eval(0.0);
    if (!(psi0 > 0.0)) return {false, "psi(0) <= 0"};

    std::vector<double> grid(points), vals(points), ders(points);
    for (int i = 0; i < points; ++i) {
        grid[i] = s_max * i / (points - 1);
        vals[i] = psi.eval(grid[i]);
        ders[i] = psi.deriv(grid[i]);
    }
    const double scale = std::abs(vals.back()) + 1.0;
    for (int i = 0; i < points; ++i) {
        if (vals[i] < psi0 - 1e-12 * scale) return {false, "psi < psi(0) on the grid"};
        if (ders[i] < -1e-12 * scale) return {false, "psi' < 0 on the grid"};
        if (i > 0 && ders[i] < ders[i - 1] - 1e-9 * (std::abs(ders[i - 1]) + 1.0))
            return {false, "psi' decreasing on the grid"};
    }
    for (int i = 1; i + 1 < points; ++i) {
        const double lam = (grid[i] - grid[i - 1]) / (grid[i + 1] - grid[i - 1]);
        const double chord = (1.0 - lam) * vals[i - 1] + lam * vals[i + 1];
        if (vals[i] > chord + 1e-9 * scale) return {false, "convexity violated on the grid"};
    }
    return report;
}

}  // namespace adatom
