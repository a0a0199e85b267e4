#include "adatom/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "adatom/errors.hpp"
#include "adatom/numerics.hpp"

namespace adatom {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Compensated accumulator; mass identities are asserted at 1e-12 over
// hundreds of thousands of facets, plain summation drifts past that.
struct KahanSum {
    double sum = 0.0, carry = 0.0;
    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};
}

DiscreteCouple::DiscreteCouple(std::vector<Vec2> vertices, std::vector<double> density) {
    Loop loop;
    loop.vertices = std::move(vertices);
    if (density.empty()) density.assign(loop.vertices.size(), 0.0);
    loop.density = std::move(density);
    loops.push_back(std::move(loop));
}

const Loop& DiscreteCouple::single() const {
    if (loops.size() != 1) throw GeometryError("expected a single-loop couple");
    return loops.front();
}

double AtomMeasure::facet_mass() const {
    KahanSum total;
    for (const auto& loop : carrier.loops)
        for (std::size_t i = 0; i < loop.size(); ++i)
            total.add(loop.edge_length(i) * loop.density[i]);
    return total.sum;
}

double AtomMeasure::singular_mass() const {
    double total = 0.0;
    for (const auto& a : atoms) total += a.mass;
    return total;
}

double RasterDensity::total_mass() const {
    const double cell = (rect.width() / nx) * (rect.height() / ny);
    double total = 0.0;
    for (double v : values) total += v;
    return total * cell;
}

double RasterDensity::integral(const Rect& r) const {
    const double dx = rect.width() / nx;
    const double dy = rect.height() / ny;
    double total = 0.0;
    for (int iy = 0; iy < ny; ++iy) {
        const double y0 = rect.ymin + iy * dy;
        const double oy = std::max(0.0, std::min(r.ymax, y0 + dy) - std::max(r.ymin, y0));
        if (oy <= 0.0) continue;
        for (int ix = 0; ix < nx; ++ix) {
            const double x0 = rect.xmin + ix * dx;
            const double ox = std::max(0.0, std::min(r.xmax, x0 + dx) - std::max(r.xmin, x0));
            if (ox <= 0.0) continue;
            total += cell_value(ix, iy) * ox * oy;
        }
    }
    return total;
}

// ---- segment grid (broad phase for intersection and distance queries) ----

namespace {

struct Segment {
    Vec2 a, b;
    int loop;
    int index;
};

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return norm(p - a);
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return norm(p - (a + t * ab));
}

int orientation_sign(Vec2 a, Vec2 b, Vec2 c) {
    const double v = cross(b - a, c - a);
    if (v > 0.0) return 1;
    if (v < 0.0) return -1;
    return 0;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    const int o1 = orientation_sign(p1, p2, q1);
    const int o2 = orientation_sign(p1, p2, q2);
    const int o3 = orientation_sign(q1, q2, p1);
    const int o4 = orientation_sign(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(p1, p2, q1)) return true;
    if (o2 == 0 && on_segment(p1, p2, q2)) return true;
    if (o3 == 0 && on_segment(q1, q2, p1)) return true;
    if (o4 == 0 && on_segment(q1, q2, p2)) return true;
    return false;
}

class SegmentGrid {
  public:
    explicit SegmentGrid(std::vector<Segment> segments) : segments_(std::move(segments)) {
        double total = 0.0;
        Rect box{kInf, kInf, -kInf, -kInf};
        for (const auto& s : segments_) {
            total += norm(s.b - s.a);
            box.xmin = std::min({box.xmin, s.a.x, s.b.x});
            box.xmax = std::max({box.xmax, s.a.x, s.b.x});
            box.ymin = std::min({box.ymin, s.a.y, s.b.y});
            box.ymax = std::max({box.ymax, s.a.y, s.b.y});
        }
        origin_ = {box.xmin, box.ymin};
        const double mean = segments_.empty() ? 1.0 : total / segments_.size();
        cell_ = std::max(mean * 2.0, 1e-12);
        for (int i = 0; i < static_cast<int>(segments_.size()); ++i) insert(i);
    }

    template <typename Fn>
    void for_candidates(const Segment& s, Fn&& fn) const {
        auto [lo, hi] = cell_range(s);
        for (std::int64_t cy = lo.second; cy <= hi.second; ++cy)
            for (std::int64_t cx = lo.first; cx <= hi.first; ++cx) {
                auto it = cells_.find(key(cx, cy));
                if (it == cells_.end()) continue;
                for (int idx : it->second) fn(idx);
            }
    }

    double nearest_distance(Vec2 p) const {
        const std::int64_t px = static_cast<std::int64_t>(std::floor((p.x - origin_.x) / cell_));
        const std::int64_t py = static_cast<std::int64_t>(std::floor((p.y - origin_.y) / cell_));
        double best = kInf;
        for (std::int64_t ring = 0; ring < 1 << 20; ++ring) {
            if (best < (ring - 1) * cell_ && ring > 1) break;
            bool any = false;
            for (std::int64_t cy = py - ring; cy <= py + ring; ++cy)
                for (std::int64_t cx = px - ring; cx <= px + ring; ++cx) {
                    if (std::max(std::abs(cx - px), std::abs(cy - py)) != ring) continue;
                    auto it = cells_.find(key(cx, cy));
                    if (it == cells_.end()) continue;
                    any = true;
                    for (int idx : it->second) {
                        const auto& s = segments_[idx];
                        best = std::min(best, point_segment_distance(p, s.a, s.b));
                    }
                }
            if (!any && std::isfinite(best) && best < (ring - 1) * cell_) break;
            if (ring * cell_ > extent_guard_ && std::isfinite(best)) break;
        }
        return best;
    }

    const std::vector<Segment>& segments() const { return segments_; }
    void set_extent_guard(double g) { extent_guard_ = g; }

  private:
    static std::int64_t key(std::int64_t cx, std::int64_t cy) {
        return (cx << 26) ^ (cy & ((1 << 26) - 1));
    }

    std::pair<std::pair<std::int64_t, std::int64_t>, std::pair<std::int64_t, std::int64_t>>
    cell_range(const Segment& s) const {
        const double xmin = std::min(s.a.x, s.b.x), xmax = std::max(s.a.x, s.b.x);
        const double ymin = std::min(s.a.y, s.b.y), ymax = std::max(s.a.y, s.b.y);
        return {{static_cast<std::int64_t>(std::floor((xmin - origin_.x) / cell_)),
                 static_cast<std::int64_t>(std::floor((ymin - origin_.y) / cell_))},
                {static_cast<std::int64_t>(std::floor((xmax - origin_.x) / cell_)),
                 static_cast<std::int64_t>(std::floor((ymax - origin_.y) / cell_))}};
    }

    void insert(int i) {
        auto [lo, hi] = cell_range(segments_[i]);
        for (std::int64_t cy = lo.second; cy <= hi.second; ++cy)
            for (std::int64_t cx = lo.first; cx <= hi.first; ++cx)
                cells_[key(cx, cy)].push_back(i);
    }

    std::vector<Segment> segments_;
    Vec2 origin_;
    double cell_ = 1.0;
    double extent_guard_ = 1e30;
    std::unordered_map<std::int64_t, std::vector<int>> cells_;
};

std::vector<Segment> collect_segments(const DiscreteCouple& c) {
    std::vector<Segment> segs;
    for (int li = 0; li < static_cast<int>(c.loops.size()); ++li) {
        const Loop& loop = c.loops[li];
        for (int i = 0; i < static_cast<int>(loop.size()); ++i)
            segs.push_back({loop.vertex(i), loop.vertex(i + 1), li, i});
    }
    return segs;
}

}  // namespace

bool is_simple(const DiscreteCouple& c) {
    auto segs = collect_segments(c);
    SegmentGrid grid(segs);
    for (int i = 0; i < static_cast<int>(segs.size()); ++i) {
        const Segment& s = segs[i];
        const int n = static_cast<int>(c.loops[s.loop].size());
        bool bad = false;
        grid.for_candidates(s, [&](int j) {
            if (j <= i || bad) return;
            const Segment& t = grid.segments()[j];
            if (t.loop == s.loop) {
                const int d = std::abs(t.index - s.index);
                if (d == 1 || d == n - 1) return;  // adjacent edges share a vertex
            }
            if (segments_intersect(s.a, s.b, t.a, t.b)) bad = true;
        });
        if (bad) return false;
    }
    return true;
}

void validate_couple(const DiscreteCouple& c, bool require_ccw) {
    if (c.loops.empty()) return;  // empty set is legal
    for (const auto& loop : c.loops) {
        if (loop.size() < 3) throw GeometryError("loop needs at least 3 vertices");
        if (loop.density.size() != loop.size())
            throw GeometryError("facet density count must match edge count");
        for (double u : loop.density)
            if (u < 0.0) throw GeometryError("facet densities must be nonnegative");
        for (std::size_t i = 0; i < loop.size(); ++i)
            if (loop.edge_length(i) == 0.0) throw GeometryError("zero-length edge");
    }
    if (require_ccw && c.loops.size() == 1 && signed_area(c.loops[0]) <= 0.0)
        throw GeometryError("single-loop couple must be counterclockwise");
    if (!is_simple(c)) throw GeometryError("boundary is self-intersecting");
}

double signed_area(const Loop& loop) {
    double acc = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i)
        acc += cross(loop.vertex(i), loop.vertex(i + 1));
    return 0.5 * acc;
}

double area(const DiscreteCouple& c) {
    double acc = 0.0;
    for (const auto& loop : c.loops) acc += signed_area(loop);
    return acc;
}

double perimeter(const DiscreteCouple& c) {
    KahanSum acc;
    for (const auto& loop : c.loops)
        for (std::size_t i = 0; i < loop.size(); ++i) acc.add(loop.edge_length(i));
    return acc.sum;
}

namespace {

// Liang-Barsky: fraction of the segment [a,b] inside the window.
double clipped_fraction(Vec2 a, Vec2 b, const Rect& w) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    double t0 = 0.0, t1 = 1.0;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {a.x - w.xmin, w.xmax - a.x, a.y - w.ymin, w.ymax - a.y};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) return 0.0;
        } else {
            const double r = q[i] / p[i];
            if (p[i] < 0.0)
                t0 = std::max(t0, r);
            else
                t1 = std::min(t1, r);
        }
    }
    return std::max(0.0, t1 - t0);
}

bool vertex_on_window_boundary(Vec2 p, const Rect& w, double tol) {
    const bool in_x = p.x >= w.xmin - tol && p.x <= w.xmax + tol;
    const bool in_y = p.y >= w.ymin - tol && p.y <= w.ymax + tol;
    const bool on_vertical = (std::abs(p.x - w.xmin) <= tol || std::abs(p.x - w.xmax) <= tol) && in_y;
    const bool on_horizontal = (std::abs(p.y - w.ymin) <= tol || std::abs(p.y - w.ymax) <= tol) && in_x;
    return on_vertical || on_horizontal;
}

}  // namespace

WindowedLength relative_perimeter(const DiscreteCouple& c, const Rect& window) {
    WindowedLength out;
    const double scale =
        std::max({std::abs(window.xmin), std::abs(window.xmax), std::abs(window.ymin),
                  std::abs(window.ymax), 1.0});
    const double tol = 1e-12 * scale;
    for (const auto& loop : c.loops) {
        for (std::size_t i = 0; i < loop.size(); ++i) {
            const Vec2 a = loop.vertex(i), b = loop.vertex(i + 1);
            out.length += clipped_fraction(a, b, window) * norm(b - a);
            if (vertex_on_window_boundary(a, window, tol)) out.vertex_on_boundary = true;
        }
    }
    return out;
}

double mass(const DiscreteCouple& c, double rho) {
    KahanSum acc;
    acc.add(rho * area(c));
    for (const auto& loop : c.loops)
        for (std::size_t i = 0; i < loop.size(); ++i)
            acc.add(loop.edge_length(i) * loop.density[i]);
    return acc.sum;
}

double relaxed_mass(const AtomMeasure& mu, double rho) {
    return rho * area(mu.carrier) + mu.total_mass();
}

EnergyReport energy(const DiscreteCouple& c, const EnergyDensity& psi, double rho) {
    EnergyReport rep;
    rep.perimeter = perimeter(c);
    rep.area = area(c);
    rep.mass = mass(c, rho);
    KahanSum f;
    for (const auto& loop : c.loops)
        for (std::size_t i = 0; i < loop.size(); ++i)
            f.add(loop.edge_length(i) * psi.eval(loop.density[i]));
    rep.energy_f = f.sum;
    return rep;
}

EnergyReport energy(const AtomMeasure& mu, const Envelope& env, double rho) {
    EnergyReport rep;
    rep.perimeter = perimeter(mu.carrier);
    rep.area = area(mu.carrier);
    rep.mass = relaxed_mass(mu, rho);
    rep.singular_mass = mu.singular_mass();
    KahanSum f, fbar;
    fbar.add(env.theta * rep.singular_mass);
    for (const auto& loop : mu.carrier.loops)
        for (std::size_t i = 0; i < loop.size(); ++i) {
            const double len = loop.edge_length(i);
            f.add(len * env.base.eval(loop.density[i]));
            fbar.add(len * eval_envelope(env, loop.density[i]));
        }
    rep.energy_f = f.sum;
    rep.energy_fbar = fbar.sum;
    if (!mu.atoms.empty()) rep.energy_f = kInf;
    return rep;
}

double hausdorff_distance(const DiscreteCouple& a, const DiscreteCouple& b) {
    auto one_sided = [](const DiscreteCouple& from, const DiscreteCouple& to) {
        SegmentGrid grid(collect_segments(to));
        const Rect bb = bounding_box(to);
        grid.set_extent_guard(2.0 * (bb.width() + bb.height()) + 1.0);
        double worst = 0.0;
        for (const auto& loop : from.loops)
            for (const auto& v : loop.vertices) worst = std::max(worst, grid.nearest_distance(v));
        return worst;
    };
    return std::max(one_sided(a, b), one_sided(b, a));
}

Rect bounding_box(const DiscreteCouple& c) {
    Rect box{kInf, kInf, -kInf, -kInf};
    for (const auto& loop : c.loops)
        for (const auto& v : loop.vertices) {
            box.xmin = std::min(box.xmin, v.x);
            box.xmax = std::max(box.xmax, v.x);
            box.ymin = std::min(box.ymin, v.y);
            box.ymax = std::max(box.ymax, v.y);
        }
    return box;
}

DiscreteCouple circle_polygon(Vec2 center, double radius, int n, double density) {
    if (n < 3) throw std::invalid_argument("circle_polygon: n >= 3");
    std::vector<Vec2> pts(n);
    for (int i = 0; i < n; ++i) {
        const double phi = 2.0 * M_PI * i / n;
        pts[i] = {center.x + radius * std::cos(phi), center.y + radius * std::sin(phi)};
    }
    return DiscreteCouple(std::move(pts), std::vector<double>(n, density));
}

DiscreteCouple rectangle_polygon(const Rect& r, double density) {
    std::vector<Vec2> pts = {{r.xmin, r.ymin}, {r.xmax, r.ymin}, {r.xmax, r.ymax}, {r.xmin, r.ymax}};
    return DiscreteCouple(std::move(pts), std::vector<double>(4, density));
}

// ---- weak* dictionary -----------------------------------------------------

WeakStarDictionary::WeakStarDictionary(Rect frame) : frame_(frame) {
    for (int level = 0; level < 3; ++level) {
        const int cells = 2 << level;  // 2, 4, 8 per axis
        const double w = frame.width() / cells;
        const double h = frame.height() / cells;
        for (int iy = 0; iy < cells; ++iy)
            for (int ix = 0; ix < cells; ++ix) {
                Rect support{frame.xmin + ix * w, frame.ymin + iy * h,
                             frame.xmin + (ix + 1) * w, frame.ymin + (iy + 1) * h};
                bumps_.push_back({support, level});
            }
    }
}

namespace {
// C1 cubic bump on [-1,1]: 1 at the center, 0 with zero slope at the edges.
double cubic_bump(double t) {
    t = std::abs(t);
    if (t >= 1.0) return 0.0;
    return (1.0 - t) * (1.0 - t) * (1.0 + 2.0 * t);
}
}  // namespace

double WeakStarDictionary::bump_eval(const Bump& b, Vec2 p) const {
    const double cx = 0.5 * (b.support.xmin + b.support.xmax);
    const double cy = 0.5 * (b.support.ymin + b.support.ymax);
    const double tx = 2.0 * (p.x - cx) / b.support.width();
    const double ty = 2.0 * (p.y - cy) / b.support.height();
    return cubic_bump(tx) * cubic_bump(ty);
}

double WeakStarDictionary::line_moment(const Bump& b, Vec2 a, Vec2 c) const {
    // parameter range inside the support
    double t0 = 0.0, t1 = 1.0;
    const double frac = clipped_fraction(a, c, b.support);
    if (frac == 0.0) return 0.0;
    {
        const double dx = c.x - a.x, dy = c.y - a.y;
        const double p[4] = {-dx, dx, -dy, dy};
        const double q[4] = {a.x - b.support.xmin, b.support.xmax - a.x, a.y - b.support.ymin,
                             b.support.ymax - a.y};
        for (int i = 0; i < 4; ++i) {
            if (p[i] == 0.0) continue;
            const double r = q[i] / p[i];
            if (p[i] < 0.0)
                t0 = std::max(t0, r);
            else
                t1 = std::min(t1, r);
        }
        if (t1 <= t0) return 0.0;
    }
    // split at the center lines where the bump has a derivative kink
    std::vector<double> knots = {t0, t1};
    const double cx = 0.5 * (b.support.xmin + b.support.xmax);
    const double cy = 0.5 * (b.support.ymin + b.support.ymax);
    if (c.x != a.x) {
        const double t = (cx - a.x) / (c.x - a.x);
        if (t > t0 && t < t1) knots.push_back(t);
    }
    if (c.y != a.y) {
        const double t = (cy - a.y) / (c.y - a.y);
        if (t > t0 && t < t1) knots.push_back(t);
    }
    std::sort(knots.begin(), knots.end());
    const double speed = norm(c - a);
    const QuadRule& rule = gauss_legendre(4);
    double acc = 0.0;
    for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
        const double mid = 0.5 * (knots[s] + knots[s + 1]);
        const double half = 0.5 * (knots[s + 1] - knots[s]);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double t = mid + half * rule.nodes[q];
            acc += rule.weights[q] * half * bump_eval(b, a + t * (c - a));
        }
    }
    return acc * speed;
}

double WeakStarDictionary::raster_moment(const Bump& b, const RasterDensity& f) const {
    const double dx = f.rect.width() / f.nx;
    const double dy = f.rect.height() / f.ny;
    const double cx = 0.5 * (b.support.xmin + b.support.xmax);
    const double cy = 0.5 * (b.support.ymin + b.support.ymax);
    const QuadRule& rule = gauss_legendre(4);
    double acc = 0.0;
    for (int iy = 0; iy < f.ny; ++iy) {
        const double y0 = f.rect.ymin + iy * dy;
        const double ylo = std::max(y0, b.support.ymin), yhi = std::min(y0 + dy, b.support.ymax);
        if (yhi <= ylo) continue;
        for (int ix = 0; ix < f.nx; ++ix) {
            const double x0 = f.rect.xmin + ix * dx;
            const double xlo = std::max(x0, b.support.xmin), xhi = std::min(x0 + dx, b.support.xmax);
            if (xhi <= xlo) continue;
            const double value = f.cell_value(ix, iy);
            if (value == 0.0) continue;
            std::vector<double> xs = {xlo, xhi}, ys = {ylo, yhi};
            if (cx > xlo && cx < xhi) xs.insert(xs.begin() + 1, cx);
            if (cy > ylo && cy < yhi) ys.insert(ys.begin() + 1, cy);
            for (std::size_t sy = 0; sy + 1 < ys.size(); ++sy)
                for (std::size_t sx = 0; sx + 1 < xs.size(); ++sx) {
                    const double mx = 0.5 * (xs[sx] + xs[sx + 1]), hx = 0.5 * (xs[sx + 1] - xs[sx]);
                    const double my = 0.5 * (ys[sy] + ys[sy + 1]), hy = 0.5 * (ys[sy + 1] - ys[sy]);
                    double cellacc = 0.0;
                    for (std::size_t qy = 0; qy < rule.nodes.size(); ++qy)
                        for (std::size_t qx = 0; qx < rule.nodes.size(); ++qx)
                            cellacc += rule.weights[qx] * rule.weights[qy] *
                                       bump_eval(b, {mx + hx * rule.nodes[qx],
                                                     my + hy * rule.nodes[qy]});
                    acc += value * cellacc * hx * hy;
                }
        }
    }
    return acc;
}

void WeakStarDictionary::require_in_frame(const Rect& bbox) const {
    if (bbox.xmin < frame_.xmin || bbox.xmax > frame_.xmax || bbox.ymin < frame_.ymin ||
        bbox.ymax > frame_.ymax)
        throw FrameError("measure supported outside the weak* frame");
}

std::vector<double> WeakStarDictionary::moments(const AtomMeasure& mu) const {
    if (!mu.carrier.loops.empty()) require_in_frame(bounding_box(mu.carrier));
    for (const auto& a : mu.atoms)
        if (!frame_.contains(a.position)) throw FrameError("atom outside the weak* frame");

    std::vector<double> out(bumps_.size(), 0.0);
    parallel_for(bumps_.size(), [&](std::size_t bi) {
        const Bump& b = bumps_[bi];
        double acc = 0.0;
        for (const auto& loop : mu.carrier.loops)
            for (std::size_t i = 0; i < loop.size(); ++i) {
                if (loop.density[i] == 0.0) continue;
                acc += loop.density[i] * line_moment(b, loop.vertex(i), loop.vertex(i + 1));
            }
        for (const auto& a : mu.atoms) acc += a.mass * bump_eval(b, a.position);
        out[bi] = acc;
    });
    return out;
}

std::vector<double> WeakStarDictionary::moments(const RasterDensity& f) const {
    require_in_frame(f.rect);
    std::vector<double> out(bumps_.size(), 0.0);
    parallel_for(bumps_.size(), [&](std::size_t bi) { out[bi] = raster_moment(bumps_[bi], f); });
    return out;
}

double WeakStarDictionary::distance(const std::vector<double>& m1,
                                    const std::vector<double>& m2) const {
    double worst = 0.0;
    for (std::size_t i = 0; i < bumps_.size(); ++i)
        worst = std::max(worst, std::ldexp(std::abs(m1[i] - m2[i]), -bumps_[i].level));
    return worst;
}

double weakstar_distance(const AtomMeasure& a, const AtomMeasure& b, const Rect& frame) {
    WeakStarDictionary dict(frame);
    return dict.distance(dict.moments(a), dict.moments(b));
}

double weakstar_distance(const AtomMeasure& a, const RasterDensity& b, const Rect& frame) {
    WeakStarDictionary dict(frame);
    return dict.distance(dict.moments(a), dict.moments(b));
}

}  // namespace adatom
