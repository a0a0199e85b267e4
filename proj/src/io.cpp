#include "adatom/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "adatom/errors.hpp"

namespace adatom {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

DiscreteCouple load_polygon_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open polygon file: " + path);
    std::vector<Vec2> pts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        Vec2 p;
        if (!(ss >> p.x >> p.y)) throw std::runtime_error("bad polygon row: " + line);
        pts.push_back(p);
    }
    if (pts.size() >= 2 && pts.front().x == pts.back().x && pts.front().y == pts.back().y)
        pts.pop_back();  // tolerate an explicitly closed ring
    return DiscreteCouple(std::move(pts), {});
}

void save_polygon_csv(const std::string& path, const DiscreteCouple& c) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write polygon file: " + path);
    for (const auto& loop : c.loops)
        for (const auto& v : loop.vertices)
            out << format_double(v.x) << "," << format_double(v.y) << "\n";
}

std::vector<double> load_density_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open density file: " + path);
    std::vector<double> vals;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        vals.push_back(std::stod(line));
    }
    return vals;
}

nlohmann::json couple_to_json(const DiscreteCouple& c) {
    nlohmann::json loops = nlohmann::json::array();
    for (const auto& loop : c.loops) {
        nlohmann::json jl;
        nlohmann::json verts = nlohmann::json::array();
        for (const auto& v : loop.vertices) verts.push_back({v.x, v.y});
        jl["vertices"] = std::move(verts);
        jl["density"] = loop.density;
        loops.push_back(std::move(jl));
    }
    return nlohmann::json{{"loops", std::move(loops)}};
}

static Loop loop_from_json(const nlohmann::json& jl) {
    Loop loop;
    for (const auto& v : jl.at("vertices")) loop.vertices.push_back({v.at(0), v.at(1)});
    if (jl.contains("density"))
        loop.density = jl.at("density").get<std::vector<double>>();
    else
        loop.density.assign(loop.vertices.size(), 0.0);
    return loop;
}

DiscreteCouple couple_from_json(const nlohmann::json& j) {
    DiscreteCouple c;
    if (j.contains("loops")) {
        for (const auto& jl : j.at("loops")) c.loops.push_back(loop_from_json(jl));
    } else {
        c.loops.push_back(loop_from_json(j));  // single-loop shorthand
    }
    return c;
}

nlohmann::json measure_to_json(const AtomMeasure& mu) {
    nlohmann::json j;
    j["couple"] = couple_to_json(mu.carrier);
    nlohmann::json atoms = nlohmann::json::array();
    for (const auto& a : mu.atoms)
        atoms.push_back({{"x", a.position.x}, {"y", a.position.y}, {"mass", a.mass}});
    j["atoms"] = std::move(atoms);
    return j;
}

AtomMeasure measure_from_json(const nlohmann::json& j) {
    AtomMeasure mu;
    if (j.contains("couple")) mu.carrier = couple_from_json(j.at("couple"));
    if (j.contains("atoms"))
        for (const auto& ja : j.at("atoms")) {
            Atom a;
            a.position = {ja.at("x").get<double>(), ja.at("y").get<double>()};
            a.mass = ja.at("mass").get<double>();
            if (!(a.mass > 0.0)) throw std::runtime_error("atom masses must be positive");
            mu.atoms.push_back(a);
        }
    return mu;
}

AtomMeasure load_measure_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open measure file: " + path);
    nlohmann::json j;
    in >> j;
    return measure_from_json(j);
}

namespace {

std::string density_color(double u, double umax) {
    const double t = umax > 0.0 ? std::clamp(u / umax, 0.0, 1.0) : 0.0;
    const int r = static_cast<int>(std::lround(31 + t * (214 - 31)));
    const int g = static_cast<int>(std::lround(119 + t * (39 - 119)));
    const int b = static_cast<int>(std::lround(180 + t * (40 - 180)));
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

}  // namespace

void write_svg(const std::string& path, const AtomMeasure& mu, const SvgOptions& opt) {
    Rect box = mu.carrier.loops.empty() ? Rect{-1, -1, 1, 1} : bounding_box(mu.carrier);
    for (const auto& a : mu.atoms) {
        box.xmin = std::min(box.xmin, a.position.x);
        box.xmax = std::max(box.xmax, a.position.x);
        box.ymin = std::min(box.ymin, a.position.y);
        box.ymax = std::max(box.ymax, a.position.y);
    }
    const double pad = 0.05 * std::max({box.width(), box.height(), 1e-9});
    box = {box.xmin - pad, box.ymin - pad, box.xmax + pad, box.ymax + pad};
    const double diag = std::hypot(box.width(), box.height());

    double umax = opt.density_max;
    if (umax == 0.0)
        for (const auto& loop : mu.carrier.loops)
            for (double u : loop.density) umax = std::max(umax, u);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write svg file: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << format_double(box.xmin)
        << " " << format_double(-box.ymax) << " " << format_double(box.width()) << " "
        << format_double(box.height()) << "\" width=\"800\" height=\""
        << static_cast<int>(800 * box.height() / box.width()) << "\">\n";
    if (opt.timestamp) {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        out << "<!-- generated " << now << " -->\n";
    }
    const double sw = opt.stroke_width_frac * diag;
    for (const auto& loop : mu.carrier.loops) {
        for (std::size_t i = 0; i < loop.size(); ++i) {
            const Vec2 a = loop.vertex(i), b = loop.vertex(i + 1);
            out << "<line x1=\"" << format_double(a.x) << "\" y1=\"" << format_double(-a.y)
                << "\" x2=\"" << format_double(b.x) << "\" y2=\"" << format_double(-b.y)
                << "\" stroke=\"" << density_color(loop.density[i], umax)
                << "\" stroke-width=\"" << format_double(sw) << "\" stroke-linecap=\"round\"/>\n";
        }
    }
    for (const auto& a : mu.atoms) {
        out << "<circle cx=\"" << format_double(a.position.x) << "\" cy=\""
            << format_double(-a.position.y) << "\" r=\"" << format_double(2.5 * sw)
            << "\" fill=\"#2ca02c\"><title>mass " << format_double(a.mass)
            << "</title></circle>\n";
    }
    out << "</svg>\n";
}

void write_svg(const std::string& path, const DiscreteCouple& c, const SvgOptions& opt) {
    AtomMeasure mu;
    mu.carrier = c;
    write_svg(path, mu, opt);
}

}  // namespace adatom
