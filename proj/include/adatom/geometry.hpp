#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adatom/density.hpp"
#include "adatom/envelope.hpp"

namespace adatom {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

struct Rect {
    double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;
    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    bool contains(Vec2 p) const {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }
};

// One closed polygonal boundary component with a constant adatom density per
// edge. Edge i joins vertices[i] to vertices[(i+1) % size].
struct Loop {
    std::vector<Vec2> vertices;
    std::vector<double> density;

    std::size_t size() const { return vertices.size(); }
    Vec2 vertex(std::size_t i) const { return vertices[i % vertices.size()]; }
    double edge_length(std::size_t i) const {
        return norm(vertex(i + 1) - vertex(i));
    }
};

// Set of finite perimeter at desk scale: outer components counterclockwise,
// holes clockwise, all boundaries carrying facet densities.
struct DiscreteCouple {
    std::vector<Loop> loops;

    DiscreteCouple() = default;
    DiscreteCouple(std::vector<Vec2> vertices, std::vector<double> density);

    const Loop& single() const;  // throws unless exactly one loop
};

struct Atom {
    Vec2 position;
    double mass = 0.0;
};

// mu = u H^1 on the boundary plus point atoms (the singular part).
struct AtomMeasure {
    DiscreteCouple carrier;
    std::vector<Atom> atoms;

    double facet_mass() const;
    double singular_mass() const;
    double total_mass() const { return facet_mass() + singular_mass(); }
};

// Piecewise-constant area density on a rectangle (row-major, ny rows of nx).
struct RasterDensity {
    Rect rect;
    int nx = 1, ny = 1;
    std::vector<double> values;

    double cell_value(int ix, int iy) const { return values[iy * nx + ix]; }
    double total_mass() const;
    // integral over the intersection with an axis-aligned rectangle
    double integral(const Rect& r) const;
};

// ---- validation --------------------------------------------------------

// Checks vertex counts, density sizes and signs, simplicity of every loop,
// pairwise disjointness, and (for single-loop couples) ccw orientation.
void validate_couple(const DiscreteCouple& c, bool require_ccw = true);
bool is_simple(const DiscreteCouple& c);

// ---- basic quantities ---------------------------------------------------

double signed_area(const Loop& loop);
double area(const DiscreteCouple& c);       // signed sum: holes subtract
double perimeter(const DiscreteCouple& c);  // total boundary length

struct WindowedLength {
    double length = 0.0;
    bool vertex_on_boundary = false;  // window edge passes through a vertex
};

// Relative perimeter: edge lengths clipped to the window.
WindowedLength relative_perimeter(const DiscreteCouple& c, const Rect& window);

// rho*|E| + integral of the facet density over the boundary.
double mass(const DiscreteCouple& c, double rho);
// Relaxed mass rho*|E| + mu(R^2), atoms included.
double relaxed_mass(const AtomMeasure& mu, double rho);

struct EnergyReport {
    double perimeter = 0.0;
    double area = 0.0;
    double mass = 0.0;  // relaxed mass when atoms are present
    double energy_f = 0.0;      // +inf when the measure has a singular part
    double energy_fbar = std::numeric_limits<double>::quiet_NaN();
    double singular_mass = 0.0;
};

EnergyReport energy(const DiscreteCouple& c, const EnergyDensity& psi, double rho);
EnergyReport energy(const AtomMeasure& mu, const Envelope& env, double rho);

// ---- metric helpers -----------------------------------------------------

double hausdorff_distance(const DiscreteCouple& a, const DiscreteCouple& b);

Rect bounding_box(const DiscreteCouple& c);

// Regular n-gon inscribed in the circle of given center/radius, ccw.
DiscreteCouple circle_polygon(Vec2 center, double radius, int n, double density = 0.0);
DiscreteCouple rectangle_polygon(const Rect& r, double density = 0.0);

// ---- weak* distance ------------------------------------------------------

// Metrizes weak* convergence on a fixed frame: tensor-product cubic bumps on
// three dyadic scales (2x2, 4x4, 8x8 grid of supports), scale j weighted 2^-j.
// The default frame is deliberately incommensurate with the unit dyadic
// lattice; aligned supports would integrate dyadic ball families exactly and
// report zero distance.
class WeakStarDictionary {
  public:
    explicit WeakStarDictionary(Rect frame = {-2.56, -2.56, 2.56, 2.56});

    std::size_t size() const { return bumps_.size(); }
    const Rect& frame() const { return frame_; }

    std::vector<double> moments(const AtomMeasure& mu) const;
    std::vector<double> moments(const RasterDensity& f) const;

    double distance(const std::vector<double>& m1, const std::vector<double>& m2) const;

  private:
    struct Bump {
        Rect support;
        int level;
    };
    double bump_eval(const Bump& b, Vec2 p) const;
    double line_moment(const Bump& b, Vec2 a, Vec2 c) const;
    double raster_moment(const Bump& b, const RasterDensity& f) const;
    void require_in_frame(const Rect& bbox) const;

    Rect frame_;
    std::vector<Bump> bumps_;
};

double weakstar_distance(const AtomMeasure& a, const AtomMeasure& b,
                         const Rect& frame = {-2.56, -2.56, 2.56, 2.56});
double weakstar_distance(const AtomMeasure& a, const RasterDensity& b,
                         const Rect& frame = {-2.56, -2.56, 2.56, 2.56});

}  // namespace adatom
