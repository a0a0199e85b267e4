#pragma once

#include <string>

#include "adatom/geometry.hpp"

#include "json.hpp"

namespace adatom {

// Polygon file: CSV rows "x,y", closed implicitly (single loop).
DiscreteCouple load_polygon_csv(const std::string& path);
void save_polygon_csv(const std::string& path, const DiscreteCouple& c);

// Density file: CSV, one value per edge.
std::vector<double> load_density_csv(const std::string& path);

nlohmann::json couple_to_json(const DiscreteCouple& c);
DiscreteCouple couple_from_json(const nlohmann::json& j);

nlohmann::json measure_to_json(const AtomMeasure& mu);
AtomMeasure measure_from_json(const nlohmann::json& j);
AtomMeasure load_measure_json(const std::string& path);

struct SvgOptions {
    double stroke_width_frac = 0.002;  // relative to the drawing diagonal
    bool timestamp = true;
    double density_max = 0.0;  // 0 = autoscale color range
};

// Density-colored boundary plot; atoms drawn as filled dots.
void write_svg(const std::string& path, const AtomMeasure& mu, const SvgOptions& opt = {});
void write_svg(const std::string& path, const DiscreteCouple& c, const SvgOptions& opt = {});

std::string format_double(double v);  // round-trip precision

}  // namespace adatom
