#include "adatom/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include "adatom/errors.hpp"
#include "adatom/numerics.hpp"

namespace adatom {

namespace {

constexpr double kPi = M_PI;

// ---- arcs ----------------------------------------------------------------

struct ArcSpec {
    std::vector<Vec2> pts;        // open: edges i -> i+1; closed: wraps at the end
    std::vector<double> density;  // per edge
    bool closed = false;
    double factor = 1.0;
};

struct ArcFrame {
    std::vector<double> s;        // cumulative arclength per vertex (+ total for closed)
    std::vector<Vec2> tangent;    // per edge, unit
    std::vector<Vec2> normal;     // per edge, unit, right of travel
    std::vector<Vec2> vnormal;    // per vertex: averaged adjacent normals
    double length = 0.0;
    Vec2 direction;               // phase direction v
    double sigma = 1.0;           // phase rescale
    double phase_center = 0.0;
    double xi(Vec2 p) const { return sigma * (dot(p, direction) - phase_center); }
};

std::size_t arc_edge_count(const ArcSpec& arc) {
    return arc.closed ? arc.pts.size() : arc.pts.size() - 1;
}

ArcFrame make_frame(const ArcSpec& arc) {
    const std::size_t ne = arc_edge_count(arc);
    ArcFrame fr;
    fr.s.resize(ne + 1);
    fr.tangent.resize(ne);
    fr.normal.resize(ne);
    fr.s[0] = 0.0;
    for (std::size_t e = 0; e < ne; ++e) {
        const Vec2 a = arc.pts[e];
        const Vec2 b = arc.pts[(e + 1) % arc.pts.size()];
        const double len = norm(b - a);
        fr.tangent[e] = (1.0 / len) * (b - a);
        fr.normal[e] = {fr.tangent[e].y, -fr.tangent[e].x};
        fr.s[e + 1] = fr.s[e] + len;
    }
    fr.length = fr.s.back();

    fr.vnormal.resize(arc.pts.size());
    for (std::size_t i = 0; i < arc.pts.size(); ++i) {
        Vec2 n{0.0, 0.0};
        if (arc.closed || i > 0) n = n + fr.normal[(i + ne - 1) % ne];
        if (arc.closed || i < ne) n = n + fr.normal[i % ne];
        const double len = norm(n);
        fr.vnormal[i] = len > 0.0 ? (1.0 / len) * n : fr.normal[std::min(i, ne - 1)];
    }

    // phase direction: the chord for open arcs, the widest centroid ray for
    // closed ones (also the fallback when an open arc nearly closes up)
    Vec2 v = arc.closed ? Vec2{0.0, 0.0} : arc.pts.back() - arc.pts.front();
    if (norm(v) < 0.1 * fr.length) {
        Vec2 centroid{0.0, 0.0};
        for (const auto& p : arc.pts) centroid = centroid + p;
        centroid = (1.0 / arc.pts.size()) * centroid;
        double best = -1.0;
        for (const auto& p : arc.pts) {
            const double d = norm(p - centroid);
            if (d > best) {
                best = d;
                v = p - centroid;
            }
        }
    }
    const double vlen = norm(v);
    fr.direction = vlen > 1e-300 ? (1.0 / vlen) * v : Vec2{1.0, 0.0};

    double pmin = 1e300, pmax = -1e300;
    for (const auto& p : arc.pts) {
        const double t = dot(p, fr.direction);
        pmin = std::min(pmin, t);
        pmax = std::max(pmax, t);
    }
    fr.phase_center = 0.5 * (pmin + pmax);
    const double extent = pmax - pmin;
    fr.sigma = extent > 0.0 ? std::min(1.0, (kPi - 0.2) / extent) : 1.0;
    return fr;
}

struct Cutoff {
    double collar = 0.0;  // 0 = no cutoff (closed arcs)
    double length = 0.0;

    double phi(double s) const {
        if (collar <= 0.0) return 1.0;
        return smoothstep(s / collar) * smoothstep((length - s) / collar);
    }
    double dphi(double s) const {
        if (collar <= 0.0) return 0.0;
        return smoothstep_deriv(s / collar) / collar * smoothstep((length - s) / collar) -
               smoothstep(s / collar) * smoothstep_deriv((length - s) / collar) / collar;
    }
};

// Arc length of the perturbed arc x + A sin(t xi(x)) phi(s) n(x).
double perturbed_length(const ArcSpec& arc, const ArcFrame& fr, const Cutoff& cut, double amp,
                        double t, double stop_above = 1e300) {
    const QuadRule& rule = gauss_legendre(8);
    const std::size_t ne = arc_edge_count(arc);
    double total = 0.0;
    for (std::size_t e = 0; e < ne; ++e) {
        const double sa = fr.s[e], sb = fr.s[e + 1];
        const double dxids = fr.sigma * dot(fr.tangent[e], fr.direction);
        const double xia = fr.xi(arc.pts[e]);
        // split at the collar boundaries, then by oscillation count
        std::vector<double> splits = {sa, sb};
        if (cut.collar > 0.0) {
            if (cut.collar > sa && cut.collar < sb) splits.push_back(cut.collar);
            const double s2 = fr.length - cut.collar;
            if (s2 > sa && s2 < sb) splits.push_back(s2);
        }
        std::sort(splits.begin(), splits.end());
        for (std::size_t sp = 0; sp + 1 < splits.size(); ++sp) {
            const double u0 = splits[sp], u1 = splits[sp + 1];
            const double dxi = std::abs(t * dxids) * (u1 - u0);
            const int pieces = std::max(1, static_cast<int>(std::ceil(dxi / (2.0 * kPi) * 4.0)));
            const double hp = (u1 - u0) / pieces;
            for (int p = 0; p < pieces; ++p) {
                const double mid = u0 + (p + 0.5) * hp;
                double acc = 0.0;
                for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                    const double s = mid + 0.5 * hp * rule.nodes[q];
                    const double xi = xia + (s - sa) * dxids;
                    const double dD = amp * (t * dxids * std::cos(t * xi) * cut.phi(s) +
                                             std::sin(t * xi) * cut.dphi(s));
                    acc += rule.weights[q] * std::sqrt(1.0 + dD * dD);
                }
                total += 0.5 * hp * acc;
            }
        }
        if (total > stop_above) return total;
    }
    return total;
}

// Instance constants of the frequency growth bound t * amplitude <= C. The
// threshold eps defines the set where the phase direction is nondegenerate
// and away from the phase endpoints; the best eps on a small grid wins.
struct FrequencyBound {
    double c = std::numeric_limits<double>::infinity();
    double eps = 0.0;
    double delta = 0.0;
    double lambda = 0.0;
};

FrequencyBound frequency_bound(const ArcSpec& arc, const ArcFrame& fr, double r) {
    const std::size_t ne = arc_edge_count(arc);
    FrequencyBound best;
    for (double eps : {0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4}) {
        const double delta = std::sin(eps);
        double lambda = 0.0;
        for (std::size_t e = 0; e < ne; ++e) {
            const double tv = fr.sigma * dot(fr.tangent[e], fr.direction);
            if (!(tv * tv > eps * eps)) continue;
            const double xa = fr.xi(arc.pts[e]);
            const double xb = xa + (fr.s[e + 1] - fr.s[e]) * tv;
            const double lo = std::min(xa, xb), hi = std::max(xa, xb);
            const double bound = kPi / 2.0 - eps;
            const double overlap = std::max(0.0, std::min(hi, bound) - std::max(lo, -bound));
            if (hi > lo) lambda += overlap / (hi - lo) * (fr.s[e + 1] - fr.s[e]);
        }
        if (lambda <= 0.0) continue;
        const double L = fr.length;
        const double num = std::sqrt(std::max(0.0, 4.0 * r * r * L * L - lambda * lambda));
        const double c = num / (lambda * delta * eps);
        if (c < best.c) best = {c, eps, delta, lambda};
    }
    return best;
}

struct FrequencySolve {
    double t = 0.0;
    double achieved = 0.0;
};

FrequencySolve solve_arc(const ArcSpec& arc, const ArcFrame& fr, const Cutoff& cut, double amp) {
    const double target = arc.factor * fr.length;
    FrequencySolve out;
    out.achieved = fr.length;
    if (target <= fr.length * (1.0 + 1e-14)) return out;

    double diam = 0.0;
    for (const auto& p : arc.pts) diam = std::max(diam, std::abs(fr.xi(p)));
    diam = std::max(2.0 * diam, 1e-9);
    const double step = kPi / (4.0 * diam);

    double t_prev = 0.0;
    double t_cur = step;
    bool found = false;
    for (long iter = 0; iter < 2'000'000; ++iter) {
        const double val = perturbed_length(arc, fr, cut, amp, t_cur, target);
        if (val >= target) {
            found = true;
            break;
        }
        t_prev = t_cur;
        t_cur += step;
    }
    if (!found) throw FrequencyError("frequency scan hit the iteration cap before the target length");
    out.t = bisect(
        [&](double t) { return perturbed_length(arc, fr, cut, amp, t) - target; }, t_prev, t_cur,
        1e-10);
    out.achieved = perturbed_length(arc, fr, cut, amp, out.t);
    return out;
}

struct WriggledArc {
    std::vector<Vec2> pts;        // closed: cycle without repeated first point
    std::vector<double> density;  // per edge
    WrigglePlan plan;
};

WriggledArc wriggle_arc(const ArcSpec& arc, int k, int halvings) {
    WriggledArc out;
    out.plan.target_factor = arc.factor;
    out.plan.halvings = halvings;
    const int keff = k << halvings;
    out.plan.k = keff;

    const ArcFrame fr = make_frame(arc);
    out.plan.direction = fr.direction;
    out.plan.sigma = fr.sigma;
    out.plan.base_length = fr.length;

    if (arc.factor <= 1.0 + 1e-14) {
        out.pts = arc.pts;
        out.density = arc.density;
        out.plan.achieved_length = fr.length;
        return out;
    }

    double amp = 1.0 / keff;
    if (arc.closed) {
        Vec2 centroid{0.0, 0.0};
        for (const auto& p : arc.pts) centroid = centroid + p;
        centroid = (1.0 / arc.pts.size()) * centroid;
        double rmin = 1e300;
        for (const auto& p : arc.pts) rmin = std::min(rmin, norm(p - centroid));
        amp = std::min(amp, 0.5 * rmin);
    } else {
        amp = std::min(amp, 0.25 * fr.length);
    }
    Cutoff cut;
    cut.length = fr.length;
    cut.collar = arc.closed ? 0.0 : std::min(fr.length / 4.0, 1.0 / keff);

    const FrequencySolve solve = solve_arc(arc, fr, cut, amp);
    out.plan.t = solve.t;
    out.plan.amplitude = amp;
    out.plan.collar = cut.collar;
    out.plan.achieved_length = solve.achieved;
    const FrequencyBound fb = frequency_bound(arc, fr, arc.factor);
    out.plan.freq_bound_c = fb.c;
    out.plan.bound_eps = fb.eps;
    out.plan.bound_delta = fb.delta;
    out.plan.bound_lambda = fb.lambda;

    // resample so every oscillation wavelength gets enough segments, finer as k grows
    const int nodes_per_wave = std::max(24, static_cast<int>(std::ceil(4.0 * std::pow(keff, 0.75))));
    const std::size_t ne = arc_edge_count(arc);
    for (std::size_t e = 0; e < ne; ++e) {
        const Vec2 a = arc.pts[e];
        const Vec2 b = arc.pts[(e + 1) % arc.pts.size()];
        const double sa = fr.s[e];
        const double elen = fr.s[e + 1] - sa;
        const double dxids = fr.sigma * dot(fr.tangent[e], fr.direction);
        const double waves = std::abs(solve.t * dxids) * elen / (2.0 * kPi);
        int nseg = std::max(1, static_cast<int>(std::ceil(waves * nodes_per_wave)));
        if (cut.collar > 0.0 && (sa < cut.collar || fr.s[e + 1] > fr.length - cut.collar))
            nseg = std::max(nseg, std::min(1024, static_cast<int>(std::ceil(elen / cut.collar * 8.0))));
        nseg = std::min(nseg, 32768);
        for (int j = 0; j < nseg; ++j) {
            const double frac = static_cast<double>(j) / nseg;
            const Vec2 base = a + frac * (b - a);
            const double s = sa + frac * elen;
            const Vec2 n = (j == 0) ? fr.vnormal[e] : fr.normal[e];
            const double disp = amp * std::sin(solve.t * fr.xi(base)) * cut.phi(s);
            out.pts.push_back(base + disp * n);
            out.density.push_back(arc.density[e]);
        }
    }
    if (!arc.closed) {
        out.pts.push_back(arc.pts.back());  // endpoint pinned by the cutoff
    }
    return out;
}

// ---- loop partition into cell pieces --------------------------------------

struct SubEdge {
    Vec2 a, b;
    double density = 0.0;
    double weight = 0.0;  // f value driving the local factor
    long cx = 0, cy = 0;
    bool sharp_junction = false;  // original vertex with a large turn starts here
};

std::vector<SubEdge> split_loop(const Loop& loop, const std::vector<double>& weights,
                                Vec2 origin, double h) {
    const std::size_t n = loop.size();
    std::vector<bool> sharp(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 d1 = loop.vertex(i) - loop.vertex(i + n - 1);
        const Vec2 d2 = loop.vertex(i + 1) - loop.vertex(i);
        const double turn = std::abs(std::atan2(cross(d1, d2), dot(d1, d2)));
        sharp[i] = turn > kPi / 8.0;
    }
    std::vector<SubEdge> out;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = loop.vertex(i), b = loop.vertex(i + 1);
        std::vector<double> ts = {0.0, 1.0};
        auto add_crossings = [&](double pa, double pb, double o) {
            if (pa == pb) return;
            const double lo = std::min(pa, pb), hi = std::max(pa, pb);
            for (long idx = static_cast<long>(std::ceil((lo - o) / h));
                 o + idx * h < hi; ++idx) {
                const double c = o + idx * h;
                if (c <= lo || c >= hi) continue;
                ts.push_back((c - pa) / (pb - pa));
            }
        };
        add_crossings(a.x, b.x, origin.x);
        add_crossings(a.y, b.y, origin.y);
        std::sort(ts.begin(), ts.end());
        bool first = true;
        for (std::size_t s = 0; s + 1 < ts.size(); ++s) {
            if (ts[s + 1] - ts[s] < 1e-13) continue;
            SubEdge se;
            se.a = a + ts[s] * (b - a);
            se.b = a + ts[s + 1] * (b - a);
            se.density = loop.density[i];
            se.weight = weights.empty() ? 0.0 : weights[i];
            const Vec2 mid = 0.5 * (se.a + se.b);
            se.cx = static_cast<long>(std::floor((mid.x - origin.x) / h));
            se.cy = static_cast<long>(std::floor((mid.y - origin.y) / h));
            se.sharp_junction = first && sharp[i];
            first = false;
            out.push_back(se);
        }
    }
    return out;
}

std::vector<ArcSpec> pieces_from_subedges(const std::vector<SubEdge>& se) {
    const std::size_t m = se.size();
    std::vector<std::size_t> breaks;
    for (std::size_t i = 0; i < m; ++i) {
        const SubEdge& prev = se[(i + m - 1) % m];
        if (se[i].sharp_junction || prev.cx != se[i].cx || prev.cy != se[i].cy) breaks.push_back(i);
    }
    std::vector<ArcSpec> pieces;
    if (breaks.empty()) {
        ArcSpec arc;
        arc.closed = true;
        for (const auto& e : se) {
            arc.pts.push_back(e.a);
            arc.density.push_back(e.density);
        }
        pieces.push_back(std::move(arc));
        return pieces;
    }
    for (std::size_t bi = 0; bi < breaks.size(); ++bi) {
        const std::size_t start = breaks[bi];
        const std::size_t stop = breaks[(bi + 1) % breaks.size()];
        ArcSpec arc;
        arc.closed = false;
        std::size_t i = start;
        while (true) {
            arc.pts.push_back(se[i].a);
            arc.density.push_back(se[i].density);
            i = (i + 1) % m;
            if (i == stop) break;
        }
        arc.pts.push_back(se[stop].a);
        pieces.push_back(std::move(arc));
    }
    return pieces;
}

double piece_weight_average(const std::vector<SubEdge>& se, std::size_t start, std::size_t count) {
    double wsum = 0.0, lsum = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
        const SubEdge& e = se[(start + j) % se.size()];
        const double len = norm(e.b - e.a);
        wsum += e.weight * len;
        lsum += len;
    }
    return lsum > 0.0 ? wsum / lsum : 0.0;
}

// per-piece factors mirroring pieces_from_subedges order
std::vector<double> piece_factors(const std::vector<SubEdge>& se, bool uniform, double r) {
    const std::size_t m = se.size();
    std::vector<std::size_t> breaks;
    for (std::size_t i = 0; i < m; ++i) {
        const SubEdge& prev = se[(i + m - 1) % m];
        if (se[i].sharp_junction || prev.cx != se[i].cx || prev.cy != se[i].cy) breaks.push_back(i);
    }
    std::vector<double> factors;
    if (breaks.empty()) {
        factors.push_back(uniform ? r : 1.0 + piece_weight_average(se, 0, m));
        return factors;
    }
    for (std::size_t bi = 0; bi < breaks.size(); ++bi) {
        const std::size_t start = breaks[bi];
        const std::size_t stop = breaks[(bi + 1) % breaks.size()];
        const std::size_t count = (stop + m - start) % m;
        factors.push_back(uniform ? r : 1.0 + piece_weight_average(se, start, count ? count : m));
    }
    return factors;
}

DiscreteCouple assemble(const std::vector<std::vector<WriggledArc>>& loops) {
    DiscreteCouple out;
    for (const auto& arcs : loops) {
        Loop loop;
        for (const auto& wa : arcs) {
            const bool closed_piece = arcs.size() == 1 && wa.pts.size() == wa.density.size();
            const std::size_t keep = closed_piece ? wa.pts.size() : wa.pts.size() - 1;
            for (std::size_t i = 0; i < keep; ++i) {
                loop.vertices.push_back(wa.pts[i]);
                loop.density.push_back(wa.density[i]);
            }
        }
        out.loops.push_back(std::move(loop));
    }
    return out;
}

DiscreteCouple wriggle_cells(const DiscreteCouple& c, bool uniform, double r,
                             const std::vector<std::vector<double>>& f, int k,
                             std::vector<WrigglePlan>* plans) {
    if (k < 1) throw std::domain_error("wriggle: k >= 1 required");
    const Rect box = bounding_box(c);
    const double h = std::max(box.width(), box.height()) / k;
    const Vec2 origin{box.xmin, box.ymin};

    for (int halv = 0; halv <= 8; ++halv) {
        std::vector<std::vector<WriggledArc>> out_loops(c.loops.size());
        std::vector<WrigglePlan> out_plans;
        for (std::size_t li = 0; li < c.loops.size(); ++li) {
            const auto weights = uniform ? std::vector<double>() : f[li];
            auto se = split_loop(c.loops[li], weights, origin, h);
            auto pieces = pieces_from_subedges(se);
            auto factors = piece_factors(se, uniform, r);
            for (std::size_t pi = 0; pi < pieces.size(); ++pi) pieces[pi].factor = factors[pi];
            out_loops[li].resize(pieces.size());
            parallel_for(pieces.size(), [&](std::size_t pi) {
                out_loops[li][pi] = wriggle_arc(pieces[pi], k, halv);
            });
            for (const auto& wa : out_loops[li]) out_plans.push_back(wa.plan);
        }
        DiscreteCouple result = assemble(out_loops);
        if (is_simple(result)) {
            if (plans) *plans = std::move(out_plans);
            return result;
        }
    }
    throw GeometryError("wriggle: self-intersection persists after 8 automatic refinements");
}

}  // namespace

double solve_frequency(const std::vector<Vec2>& segment, double r, int k) {
    if (segment.size() < 2) throw std::domain_error("solve_frequency: segment needs >= 2 points");
    if (r < 1.0) throw std::domain_error("solve_frequency: r >= 1 required");
    if (k < 1) throw std::domain_error("solve_frequency: k >= 1 required");
    ArcSpec arc;
    arc.pts = segment;
    arc.density.assign(segment.size() - 1, 0.0);
    arc.factor = r;
    const ArcFrame fr = make_frame(arc);
    if (fr.length <= 0.0) throw std::domain_error("solve_frequency: degenerate segment");
    Cutoff cut;
    cut.length = fr.length;  // bare integrand: no collar
    return solve_arc(arc, fr, cut, 1.0 / k).t;
}

ArcWriggle wriggle_open_arc(const std::vector<Vec2>& segment, double r, int k) {
    if (segment.size() < 2) throw std::domain_error("wriggle_open_arc: segment needs >= 2 points");
    if (r < 1.0) throw std::domain_error("wriggle_open_arc: r >= 1 required");
    ArcSpec arc;
    arc.pts = segment;
    arc.density.assign(segment.size() - 1, 0.0);
    arc.factor = r;
    WriggledArc wa = wriggle_arc(arc, k, 0);
    return {std::move(wa.pts), wa.plan};
}

DiscreteCouple wriggle_uniform(const DiscreteCouple& c, double r, int k,
                               std::vector<WrigglePlan>* plans) {
    if (r < 1.0) throw std::domain_error("wriggle_uniform: r >= 1 required");
    if (r == 1.0) {
        if (plans) plans->clear();
        return c;
    }
    return wriggle_cells(c, true, r, {}, k, plans);
}

DiscreteCouple wriggle_weighted(const DiscreteCouple& c,
                                const std::vector<std::vector<double>>& f, int k,
                                std::vector<WrigglePlan>* plans) {
    if (f.size() != c.loops.size())
        throw std::invalid_argument("wriggle_weighted: one factor vector per loop expected");
    bool all_zero = true;
    for (std::size_t li = 0; li < c.loops.size(); ++li) {
        if (f[li].size() != c.loops[li].size())
            throw std::invalid_argument("wriggle_weighted: per-edge factors expected");
        for (double v : f[li]) {
            if (v < 0.0) throw std::domain_error("wriggle_weighted: f >= 0 required");
            if (v != 0.0) all_zero = false;
        }
    }
    if (all_zero) {
        if (plans) plans->clear();
        return c;
    }
    return wriggle_cells(c, false, 0.0, f, k, plans);
}

DiscreteCouple wriggle_weighted(const DiscreteCouple& c, const std::vector<double>& f, int k,
                                std::vector<WrigglePlan>* plans) {
    return wriggle_weighted(c, std::vector<std::vector<double>>{f}, k, plans);
}

DiscreteCouple recover_ac(const DiscreteCouple& c, const Envelope& env, int k,
                          std::vector<WrigglePlan>* plans) {
    if (k < 1) throw std::domain_error("recover_ac: k >= 1 required");
    if (!std::isfinite(env.s0)) {
        if (plans) plans->clear();
        return c;  // psi equals its envelope; nothing to trade
    }
    bool touched = false;
    for (const auto& loop : c.loops)
        for (double u : loop.density)
            if (u > env.s0) touched = true;
    if (!touched) {
        if (plans) plans->clear();
        return c;
    }

    for (int halv = 0; halv <= 8; ++halv) {
        std::vector<std::vector<WriggledArc>> out_loops(c.loops.size());
        std::vector<WrigglePlan> out_plans;
        for (std::size_t li = 0; li < c.loops.size(); ++li) {
            const Loop& loop = c.loops[li];
            const std::size_t n = loop.size();
            std::vector<ArcSpec> arcs(n);
            for (std::size_t i = 0; i < n; ++i) {
                ArcSpec& arc = arcs[i];
                arc.pts = {loop.vertex(i), loop.vertex(i + 1)};
                const double u = loop.density[i];
                arc.factor = std::max(1.0, u / env.s0);
                arc.density = {std::min(env.s0, u)};
            }
            out_loops[li].resize(n);
            parallel_for(n, [&](std::size_t i) { out_loops[li][i] = wriggle_arc(arcs[i], k, halv); });
            for (const auto& wa : out_loops[li])
                if (wa.plan.target_factor > 1.0) out_plans.push_back(wa.plan);
        }
        DiscreteCouple result = assemble(out_loops);
        if (is_simple(result)) {
            if (plans) *plans = std::move(out_plans);
            return result;
        }
    }
    throw GeometryError("recover_ac: self-intersection persists after 8 automatic refinements");
}

// ---- dyadic Dirac approximation -------------------------------------------

namespace {

// Largest refinement whose cell lattice stays enumerable and whose ball radius
// stays above the underflow floor, given a bound on the cell mass.
int usable_dirac_k(const RasterDensity& f) {
    double sup = 0.0;
    for (double v : f.values) sup = std::max(sup, v);
    const double extent = std::max({f.rect.width(), f.rect.height(), 1e-9});
    int k = 0;
    while (k < 60) {
        const double h2 = std::ldexp(1.0, -(k + 1));
        const double cells = (extent / h2 + 2.0) * (extent / h2 + 2.0);
        const double rmax = sup * h2 * h2 * std::ldexp(1.0, -2 * (k + 1));
        if (cells > 4e6 || rmax < 1e-13 * h2) break;
        ++k;
    }
    return k;
}

}  // namespace

DiscreteCouple dirac_approx(const RasterDensity& f, int k) {
    if (k < 0) throw std::domain_error("dirac_approx: k >= 0 required");
    const double h = std::ldexp(1.0, -k);
    const int k_usable = usable_dirac_k(f);
    if (k > k_usable)
        throw ResolutionError("dirac_approx: refinement exceeds the usable dyadic depth",
                              k_usable);

    // cell mass accumulation on the absolute dyadic lattice
    std::map<std::pair<long, long>, double> cells;
    const double dx = f.rect.width() / f.nx;
    const double dy = f.rect.height() / f.ny;
    for (int iy = 0; iy < f.ny; ++iy)
        for (int ix = 0; ix < f.nx; ++ix) {
            const double value = f.cell_value(ix, iy);
            if (value <= 0.0) continue;
            const double x0 = f.rect.xmin + ix * dx, x1 = x0 + dx;
            const double y0 = f.rect.ymin + iy * dy, y1 = y0 + dy;
            const long cx0 = static_cast<long>(std::floor(x0 / h));
            const long cx1 = static_cast<long>(std::floor((x1 - 1e-300) / h));
            const long cy0 = static_cast<long>(std::floor(y0 / h));
            const long cy1 = static_cast<long>(std::floor((y1 - 1e-300) / h));
            for (long cy = cy0; cy <= cy1; ++cy)
                for (long cx = cx0; cx <= cx1; ++cx) {
                    const double ox =
                        std::max(0.0, std::min(x1, (cx + 1) * h) - std::max(x0, cx * h));
                    const double oy =
                        std::max(0.0, std::min(y1, (cy + 1) * h) - std::max(y0, cy * h));
                    if (ox > 0.0 && oy > 0.0) cells[{cx, cy}] += value * ox * oy;
                }
        }

    DiscreteCouple out;
    double max_mass = 0.0;
    for (const auto& [key, mass] : cells) max_mass = std::max(max_mass, mass);
    if (max_mass <= 0.0) return out;  // zero measure

    // merge sliver cells (support boundary grazing a cell) into their nearest
    // substantial neighbor; keeps the total mass exact without letting an
    // arbitrarily small cell drive the common ball radius to underflow
    const double floor_mass = 1e-6 * max_mass;
    for (auto& [key, mass] : cells) {
        if (mass <= 0.0 || mass >= floor_mass) continue;
        std::pair<long, long> nearest = key;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [other, omass] : cells) {
            if (omass < floor_mass) continue;
            const double dx = static_cast<double>(other.first - key.first);
            const double dy = static_cast<double>(other.second - key.second);
            const double d2 = dx * dx + dy * dy;
            if (d2 < best) {
                best = d2;
                nearest = other;
            }
        }
        if (nearest != key) {
            cells[nearest] += mass;
            mass = 0.0;
        }
    }

    double min_mass = std::numeric_limits<double>::infinity();
    for (const auto& [key, mass] : cells)
        if (mass > 0.0) min_mass = std::min(min_mass, mass);
    if (!std::isfinite(min_mass)) return out;

    const double radius = min_mass * std::ldexp(1.0, -2 * k);
    if (radius < 1e-13 * h) {
        int usable = k;
        while (usable > 0) {
            --usable;
            // masses grow ~4x per coarsening step; recompute cheaply via scaling bound
            const double r2 = min_mass * std::pow(4.0, k - usable) *
                              std::ldexp(1.0, -2 * usable);
            if (r2 >= 1e-13 * std::ldexp(1.0, -usable)) break;
        }
        throw ResolutionError("dirac_approx: ball radius underflows at this refinement", usable);
    }
    if (radius >= 0.5 * h)
        throw GeometryError("dirac_approx: refinement too coarse, balls do not fit their cells");

    for (const auto& [key, mass] : cells) {
        if (mass <= 0.0) continue;
        const Vec2 center{(key.first + 0.5) * h, (key.second + 0.5) * h};
        Loop ball = circle_polygon(center, radius, 64).loops[0];
        // divide by the perimeter the facets will actually measure, so the
        // discrete measure reproduces the cell mass exactly
        double perim = 0.0;
        for (std::size_t i = 0; i < ball.size(); ++i) perim += ball.edge_length(i);
        std::fill(ball.density.begin(), ball.density.end(), mass / perim);
        out.loops.push_back(std::move(ball));
    }
    return out;
}

RasterDensity splat_atoms(const std::vector<Atom>& atoms, double delta) {
    if (atoms.empty()) throw std::invalid_argument("splat_atoms: no atoms");
    if (!(delta > 0.0)) throw std::domain_error("splat_atoms: delta > 0 required");
    Rect box{1e300, 1e300, -1e300, -1e300};
    double total = 0.0;
    for (const auto& a : atoms) {
        box.xmin = std::min(box.xmin, a.position.x - delta);
        box.xmax = std::max(box.xmax, a.position.x + delta);
        box.ymin = std::min(box.ymin, a.position.y - delta);
        box.ymax = std::max(box.ymax, a.position.y + delta);
        total += a.mass;
    }
    RasterDensity f;
    f.rect = box;
    f.nx = std::max(1, static_cast<int>(std::ceil(box.width() / (delta / 8.0))));
    f.ny = std::max(1, static_cast<int>(std::ceil(box.height() / (delta / 8.0))));
    f.values.assign(static_cast<std::size_t>(f.nx) * f.ny, 0.0);
    const double norm_c = 10.0 / (3.0 * kPi * delta * delta);  // unit-mass radial cubic bump
    const double dx = box.width() / f.nx, dy = box.height() / f.ny;
    for (int iy = 0; iy < f.ny; ++iy)
        for (int ix = 0; ix < f.nx; ++ix) {
            const Vec2 p{box.xmin + (ix + 0.5) * dx, box.ymin + (iy + 0.5) * dy};
            double v = 0.0;
            for (const auto& a : atoms) {
                const double t = norm(p - a.position) / delta;
                if (t >= 1.0) continue;
                v += a.mass * norm_c * (1.0 - t) * (1.0 - t) * (1.0 + 2.0 * t);
            }
            f.values[static_cast<std::size_t>(iy) * f.nx + ix] = v;
        }
    const double raster_total = f.total_mass();
    if (raster_total <= 0.0) throw ConstructionError("splat_atoms: splatted mass vanished");
    for (auto& v : f.values) v *= total / raster_total;  // exact mass conservation
    return f;
}

DiscreteCouple dirac_approx(const std::vector<Atom>& atoms, double delta, int k) {
    return dirac_approx(splat_atoms(atoms, delta), k);
}

// ---- combined recovery -----------------------------------------------------

namespace {

bool point_in_couple(const DiscreteCouple& c, Vec2 p) {
    bool inside = false;
    for (const auto& loop : c.loops)
        for (std::size_t i = 0; i < loop.size(); ++i) {
            const Vec2 a = loop.vertex(i), b = loop.vertex(i + 1);
            if ((a.y > p.y) != (b.y > p.y)) {
                const double x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if (x > p.x) inside = !inside;
            }
        }
    return inside;
}

double distance_to_couple(const DiscreteCouple& c, Vec2 p) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& loop : c.loops)
        for (std::size_t i = 0; i < loop.size(); ++i) {
            const Vec2 a = loop.vertex(i), b = loop.vertex(i + 1);
            const Vec2 ab = b - a;
            const double len2 = dot(ab, ab);
            const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
            best = std::min(best, norm(p - (a + t * ab)));
        }
    return best;
}

}  // namespace

DiscreteCouple recover_general(const AtomMeasure& mu, const Envelope& env, int k,
                               std::vector<WrigglePlan>* plans, double rho) {
    if (k < 1) throw std::domain_error("recover_general: k >= 1 required");
    if (!(rho > 0.0)) throw std::domain_error("recover_general: rho > 0 required");
    const double target = rho * area(mu.carrier) + mu.total_mass();

    DiscreteCouple base = mu.carrier.loops.empty()
                              ? DiscreteCouple{}
                              : recover_ac(mu.carrier, env, k, plans);

    if (!mu.atoms.empty()) {
        Rect box = base.loops.empty() ? Rect{0, 0, 0, 0} : bounding_box(base);
        for (const auto& a : mu.atoms) {
            box.xmin = std::min(box.xmin, a.position.x);
            box.xmax = std::max(box.xmax, a.position.x);
            box.ymin = std::min(box.ymin, a.position.y);
            box.ymax = std::max(box.ymax, a.position.y);
        }
        const double diam = std::max(1e-9, std::hypot(box.width(), box.height()));
        const double jit = std::ldexp(diam, -std::min(k, 60));

        // dyadic level: balls small, but dense enough to sit in the linear range
        int kd = std::max(2, (k <= 2) ? 2 : static_cast<int>(std::ceil(std::log2(k) / 2.0)));
        if (std::isfinite(env.s0))
            while (std::ldexp(1.0, 2 * kd) / (2.0 * kPi) < env.s0) ++kd;

        std::vector<Atom> placed;
        for (const auto& atom : mu.atoms) {
            const double radius = atom.mass * std::ldexp(1.0, -2 * kd);
            const double clearance = radius + 1.0 / k + jit;
            Vec2 p = atom.position;
            for (int tries = 0; tries < 64; ++tries) {
                bool ok = true;
                if (!base.loops.empty() && distance_to_couple(base, p) < clearance) ok = false;
                for (const auto& other : placed) {
                    const double need =
                        radius + other.mass * std::ldexp(1.0, -2 * kd) + 2.0 / k + jit;
                    if (norm(p - other.position) < need) ok = false;
                }
                if (ok) break;
                p.x += clearance + jit;
                if (tries == 63)
                    throw GeometryError("recover_general: could not place an atom ball");
            }
            placed.push_back({p, atom.mass});
        }
        for (const auto& a : placed) {
            const double radius = a.mass * std::ldexp(1.0, -2 * kd);
            Loop ball = circle_polygon(a.position, radius, 64).loops[0];
            double perim = 0.0;
            for (std::size_t i = 0; i < ball.size(); ++i) perim += ball.edge_length(i);
            std::fill(ball.density.begin(), ball.density.end(), a.mass / perim);
            if (!base.loops.empty() && point_in_couple(base, a.position)) {
                std::reverse(ball.vertices.begin(), ball.vertices.end());
                std::reverse(ball.density.begin(), ball.density.end());
                // edge i after reversal joins reversed[i] -> reversed[i+1]; densities stay uniform
            }
            base.loops.push_back(std::move(ball));
        }
        std::vector<WrigglePlan> ball_plans;
        base = recover_ac(base, env, k, &ball_plans);
        if (plans) plans->insert(plans->end(), ball_plans.begin(), ball_plans.end());
    }

    // mass-restoring rescale: rho*A*eps^2 + M*eps = target
    const double A = area(base);
    double M = 0.0;
    for (const auto& loop : base.loops)
        for (std::size_t i = 0; i < loop.size(); ++i) M += loop.edge_length(i) * loop.density[i];
    double eps = 1.0;
    if (A > 0.0)
        eps = (-M + std::sqrt(M * M + 4.0 * rho * A * target)) / (2.0 * rho * A);
    else if (M > 0.0)
        eps = target / M;
    for (auto& loop : base.loops)
        for (auto& v : loop.vertices) v = eps * v;
    return base;
}

MinCheckReport relaxed_min_check(const BallProblem& pb, const Envelope& env,
                                 std::size_t samples, unsigned seed) {
    if (pb.n != 2) throw std::invalid_argument("relaxed_min_check: planar couples need n = 2");
    MinCheckReport report;
    report.gamma_m = minimize_ball_energy(pb, env.base).energy;
    report.dirac_value = env.theta * pb.m;
    report.samples = samples;

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<MinCheckSample> all;

    // sample 0: the minimizing ball itself, discretized and mass-matched
    {
        const BallSolution sol = minimize_ball_energy(pb, env.base);
        const double R = sol.kind == BallSolutionKind::NoMinimizer ? 0.5 * pb.rbar : sol.radius;
        DiscreteCouple poly = circle_polygon({0.0, 0.0}, R, 8192);
        const double rem = pb.m - pb.rho * area(poly);
        const double u = std::max(0.0, rem) / perimeter(poly);
        for (auto& loop : poly.loops) std::fill(loop.density.begin(), loop.density.end(), u);
        AtomMeasure m0;
        m0.carrier = poly;
        report.ball_value = energy(m0, env, pb.rho).energy_fbar;
        all.push_back({report.ball_value, relaxed_mass(m0, pb.rho),
                       report.ball_value - report.gamma_m});
    }

    for (std::size_t si = all.size(); si < samples; ++si) {
        const int nv = 24 + static_cast<int>(unit(rng) * 40);
        std::vector<Vec2> pts(nv);
        for (int i = 0; i < nv; ++i) {
            const double phi = 2.0 * kPi * i / nv;
            const double r = 0.6 + 0.8 * unit(rng);
            pts[i] = {r * std::cos(phi), r * std::sin(phi)};
        }
        DiscreteCouple poly(std::move(pts), {});
        const double frac = 0.2 + 0.6 * unit(rng);
        const double scale = std::sqrt(frac * pb.m / (pb.rho * area(poly)));
        for (auto& loop : poly.loops)
            for (auto& v : loop.vertices) v = scale * v;

        const double rem = pb.m - pb.rho * area(poly);
        double eta = unit(rng);
        const int natoms = static_cast<int>(unit(rng) * 3.999) % 4;
        if (natoms == 0) eta = 1.0;

        Loop& loop = poly.loops[0];
        std::vector<double> w(loop.size());
        double wl = 0.0;
        for (std::size_t e = 0; e < loop.size(); ++e) {
            w[e] = 0.05 + unit(rng);
            wl += w[e] * loop.edge_length(e);
        }
        for (std::size_t e = 0; e < loop.size(); ++e) loop.density[e] = eta * rem * w[e] / wl;

        AtomMeasure mu;
        mu.carrier = poly;
        if (natoms > 0) {
            std::vector<double> am(natoms);
            double asum = 0.0;
            for (auto& a : am) {
                a = 0.1 + unit(rng);
                asum += a;
            }
            for (int ai = 0; ai < natoms; ++ai) {
                const double phi = 2.0 * kPi * unit(rng);
                const double r = 2.0 + unit(rng);
                mu.atoms.push_back({{r * std::cos(phi), r * std::sin(phi)},
                                    (1.0 - eta) * rem * am[ai] / asum});
            }
        }
        const double fbar = energy(mu, env, pb.rho).energy_fbar;
        all.push_back({fbar, relaxed_mass(mu, pb.rho), fbar - report.gamma_m});
    }

    report.min_excess = std::numeric_limits<double>::infinity();
    for (const auto& s : all) report.min_excess = std::min(report.min_excess, s.excess);
    std::sort(all.begin(), all.end(),
              [](const MinCheckSample& a, const MinCheckSample& b) { return a.excess < b.excess; });
    report.worst.assign(all.begin(), all.begin() + std::min<std::size_t>(5, all.size()));
    return report;
}

}  // namespace adatom
