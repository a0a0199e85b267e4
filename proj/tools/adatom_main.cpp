// Batch front end: envelope/equilibria/lsc/geometry/relax subcommands with
// JSON reports on stdout, CSV sweep tables, and SVG boundary plots.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "adatom/ball.hpp"
#include "adatom/density.hpp"
#include "adatom/envelope.hpp"
#include "adatom/errors.hpp"
#include "adatom/geometry.hpp"
#include "adatom/io.hpp"
#include "adatom/lsc.hpp"
#include "adatom/numerics.hpp"
#include "adatom/relaxation.hpp"
#include "adatom/variation.hpp"

using nlohmann::json;
using namespace adatom;

namespace {

constexpr int kExitParse = 2;
constexpr int kExitNumeric = 3;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string config_hash(const json& config) {
    std::ostringstream ss;
    ss << std::hex << fnv1a(config.dump());
    return ss.str();
}

json provenance(const std::string& operation, const std::string& method, const json& config,
                const json& tolerances = json::object()) {
    json p;
    p["operation"] = operation;
    p["method"] = method;
    p["config"] = config;
    p["config_hash"] = config_hash(config);
    if (!tolerances.empty()) p["tolerances"] = tolerances;
    return p;
}

void emit(const json& report, const std::string& out_path) {
    const std::string text = report.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write report: " + out_path);
        out << text;
    }
}

json finite_or_string(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

std::string tri_string(TriBool t) {
    switch (t) {
        case TriBool::True: return "true";
        case TriBool::False: return "false";
        default: return "unknown";
    }
}

DiscreteCouple load_couple(const std::string& polygon_path, const std::string& density_path) {
    DiscreteCouple c = load_polygon_csv(polygon_path);
    if (!density_path.empty()) {
        auto d = load_density_csv(density_path);
        if (d.size() != c.loops[0].size())
            throw std::runtime_error("density file entries must match polygon edge count");
        c.loops[0].density = std::move(d);
    }
    validate_couple(c);
    return c;
}

json plans_summary(const std::vector<WrigglePlan>& plans) {
    json j;
    j["arcs"] = plans.size();
    double tmax = 0.0, cmax = 0.0, amp_min = 1e300;
    bool bound_ok = true;
    for (const auto& p : plans) {
        tmax = std::max(tmax, p.t);
        cmax = std::max(cmax, p.freq_bound_c);
        amp_min = std::min(amp_min, p.amplitude);
        if (std::isfinite(p.freq_bound_c) && p.t * p.amplitude > p.freq_bound_c * (1.0 + 1e-9))
            bound_ok = false;
    }
    j["max_frequency"] = tmax;
    j["max_bound_constant"] = cmax;
    j["min_amplitude"] = plans.empty() ? 0.0 : amp_min;
    j["frequency_bound_respected"] = bound_ok;
    return j;
}

// ---- subcommand payloads ---------------------------------------------------

struct EnvelopeCmd {
    std::string density, out;
    double cap = 1e12;
};

struct SolveCmd {
    std::string density, out;
    int n = 2;
    double rho = 1.0, m = 1.0;
};

struct SweepCmd {
    std::string density, out_csv = "sweep.csv", out;
    int n = 2, points = 512;
    double rho = 1.0, m = 1.0, rmin_frac = 0.01, rmax_frac = 1.0;
};

struct PlateauCmd {
    std::string density_out, out;
    int n = 2;
    double rho = 1.0, m = 1.0, r1_frac = 0.3, r2_frac = 0.6, gm = 1.0, eps = 0.05;
};

struct LscSweepCmd {
    std::string density, out_csv = "lsc_sweep.csv", out;
    long tuples = 1000;
    unsigned seed = 12345;
};

struct SawtoothCmd {
    std::string density = "quadratic:1", out_svg, out;
    int k = 16;
    double a = 1.0, b = 1.0, alpha = 1.7320508075688772, beta = 1.7320508075688772,
           lambda = 0.5;
};

struct GeometryCmd {
    std::string polygon, density_file, measure, density = "halfquad", out;
    double rho = 1.0;
};

struct WriggleCmd {
    std::string polygon, density_file, f_file, out_svg, out, sweep_csv, density = "halfquad";
    std::vector<int> sweep_ks;
    double r = 2.0;
    int k = 64;
};

struct DiracCmd {
    std::string measure, out_svg, out, sweep_csv;
    std::vector<int> sweep_ks;
    double square_mass = 0.0, delta = 0.125;
    int k = 4;
};

struct RecoverCmd {
    std::string measure, density = "halfquad", out_svg, out;
    int k = 64;
    double rho = 1.0;
};

struct MinCheckCmd {
    std::string density, out;
    int n = 2;
    double rho = 1.0, m = 1.0;
    std::size_t samples = 100;
    unsigned seed = 12345;
};

int run_envelope(const EnvelopeCmd& cmd) {
    const EnergyDensity psi = density_from_spec(cmd.density);
    const Envelope env = build_envelope(psi, cmd.cap);
    json config{{"command", "envelope"}, {"density", cmd.density}, {"cap", cmd.cap}};
    json report;
    report["kind"] = to_string(psi.kind());
    report["psi0"] = psi.eval(0.0);
    report["s0"] = finite_or_string(env.s0);
    report["theta"] = env.theta;
    report["provenance"] = provenance(
        "envelope", "bracketed bisection on the parabolicity margin", config,
        {{"s0_rel_tol", 1e-12}});
    emit(report, cmd.out);
    return 0;
}

json solution_to_json(const BallProblem& pb, const EnergyDensity& psi, const BallSolution& sol) {
    json j;
    j["R"] = sol.radius;
    j["c"] = finite_or_string(sol.density);
    j["energy"] = sol.energy;
    j["kind"] = to_string(sol.kind);
    j["rbar"] = pb.rbar;
    j["plateau"] = {sol.plateau_lo, sol.plateau_hi};
    j["critical_radii"] = sol.critical_radii;
    if (sol.kind != BallSolutionKind::NoMinimizer) {
        const double H = (pb.n - 1) / sol.radius;
        j["residual"] = critical_residual(psi, sol.density, H, pb.rho);
    } else {
        j["residual"] = nullptr;
    }
    return j;
}

int run_solve(const SolveCmd& cmd) {
    const EnergyDensity psi = density_from_spec(cmd.density);
    const BallProblem pb(cmd.n, cmd.rho, cmd.m);
    const BallSolution sol = minimize_ball_energy(pb, psi);
    const HypothesesReport hyp = check_hypotheses(pb, psi);
    json config{{"command", "equilibria solve"}, {"density", cmd.density}, {"n", cmd.n},
                {"rho", cmd.rho},                {"m", cmd.m}};
    json report = solution_to_json(pb, psi, sol);
    report["hypotheses"] = {{"A1", hyp.a1}, {"A2a", hyp.a2a}, {"A2b", tri_string(hyp.a2b)}};
    report["provenance"] = provenance(
        "minimize_ball_energy", "log-spaced 4096-point derivative scan + bisection", config,
        {{"radius_rel_tol", 1e-10}});
    emit(report, cmd.out);
    return 0;
}

int run_sweep(const SweepCmd& cmd) {
    const EnergyDensity psi = density_from_spec(cmd.density);
    const BallProblem pb(cmd.n, cmd.rho, cmd.m);
    if (cmd.points < 2 || cmd.rmin_frac <= 0.0 || cmd.rmax_frac > 1.0 ||
        cmd.rmin_frac >= cmd.rmax_frac)
        throw std::domain_error("sweep: need 0 < rmin-frac < rmax-frac <= 1 and points >= 2");
    std::ofstream csv(cmd.out_csv);
    if (!csv) throw std::runtime_error("cannot write csv: " + cmd.out_csv);
    csv << "R,ubar,e,eprime\n";
    std::vector<std::array<double, 4>> rows(cmd.points);
    parallel_for(rows.size(), [&](std::size_t i) {
        const double frac =
            cmd.rmin_frac + (cmd.rmax_frac - cmd.rmin_frac) * static_cast<double>(i) /
                                (rows.size() - 1);
        const double R = frac * pb.rbar;
        rows[i] = {R, ubar(pb, R), ball_energy(pb, psi, R), ball_energy_derivative(pb, psi, R)};
    });
    for (const auto& row : rows)
        csv << format_double(row[0]) << "," << format_double(row[1]) << ","
            << format_double(row[2]) << "," << format_double(row[3]) << "\n";
    json config{{"command", "equilibria sweep"}, {"density", cmd.density}, {"n", cmd.n},
                {"rho", cmd.rho},                {"m", cmd.m},             {"points", cmd.points},
                {"rmin_frac", cmd.rmin_frac},    {"rmax_frac", cmd.rmax_frac}};
    json report{{"csv", cmd.out_csv},
                {"rows", cmd.points},
                {"provenance", provenance("ball_energy sweep", "analytic e and e'", config)}};
    emit(report, cmd.out);
    return 0;
}

int run_plateau(const PlateauCmd& cmd) {
    const BallProblem pb(cmd.n, cmd.rho, cmd.m);
    const double r1 = cmd.r1_frac * pb.rbar;
    const double r2 = cmd.r2_frac * pb.rbar;
    const EnergyDensity psi = build_plateau_density(r1, r2, pb, cmd.gm, cmd.eps);
    if (!cmd.density_out.empty()) {
        std::ofstream out(cmd.density_out);
        if (!out) throw std::runtime_error("cannot write density: " + cmd.density_out);
        out << psi.to_json().dump() << "\n";
    }
    const BallSolution sol = minimize_ball_energy(pb, psi);
    double worst = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double R = r1 + (r2 - r1) * i / 1000.0;
        worst = std::max(worst, std::abs(ball_energy_derivative(pb, psi, R)));
    }
    json config{{"command", "equilibria plateau"}, {"n", cmd.n},   {"rho", cmd.rho},
                {"m", cmd.m},                      {"r1", r1},     {"r2", r2},
                {"gm", cmd.gm},                    {"eps", cmd.eps}};
    json report;
    report["r1"] = r1;
    report["r2"] = r2;
    report["table_nodes"] = psi.table()->xs().size();
    report["max_abs_eprime_on_plateau"] = worst;
    report["solution"] = solution_to_json(pb, psi, sol);
    if (!cmd.density_out.empty()) report["density_file"] = cmd.density_out;
    report["provenance"] = provenance(
        "build_plateau_density", "backward marching of g' = f g, tabulated psi(ubar^-1)", config);
    emit(report, cmd.out);
    return 0;
}

int run_lsc_sweep(const LscSweepCmd& cmd) {
    const EnergyDensity psi = density_from_spec(cmd.density);
    std::ofstream csv(cmd.out_csv);
    if (!csv) throw std::runtime_error("cannot write csv: " + cmd.out_csv);
    csv << "a,b,alpha,beta,lambda,gap\n";
    std::mt19937 rng(cmd.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double min_gap = std::numeric_limits<double>::infinity();
    WriggleTuple argmin;
    for (long i = 0; i < cmd.tuples; ++i) {
        WriggleTuple t;
        t.a = std::pow(10.0, -3.0 + 6.0 * unit(rng));
        t.b = std::pow(10.0, -3.0 + 6.0 * unit(rng));
        t.alpha = 10.0 * unit(rng);
        t.beta = 10.0 * unit(rng);
        t.lambda = unit(rng);
        const double gap = wriggle_inequality_gap(psi, t);
        if (gap < min_gap) {
            min_gap = gap;
            argmin = t;
        }
        csv << format_double(t.a) << "," << format_double(t.b) << "," << format_double(t.alpha)
            << "," << format_double(t.beta) << "," << format_double(t.lambda) << ","
            << format_double(gap) << "\n";
    }
    json config{{"command", "lsc sweep"},
                {"density", cmd.density},
                {"tuples", cmd.tuples},
                {"seed", cmd.seed}};
    json report;
    report["csv"] = cmd.out_csv;
    report["min_gap"] = min_gap;
    report["argmin"] = {{"a", argmin.a},
                        {"b", argmin.b},
                        {"alpha", argmin.alpha},
                        {"beta", argmin.beta},
                        {"lambda", argmin.lambda}};
    report["provenance"] =
        provenance("wriggle_inequality_gap sweep",
                   "log-uniform densities in [1e-3,1e3], slopes in [0,10]", config);
    emit(report, cmd.out);
    return 0;
}

int run_sawtooth(const SawtoothCmd& cmd) {
    const EnergyDensity psi = density_from_spec(cmd.density);
    const WriggleTuple t{cmd.a, cmd.b, cmd.alpha, cmd.beta, cmd.lambda};
    const SawtoothFamily fam = build_sawtooth(t, cmd.k, psi);
    if (!cmd.out_svg.empty()) write_svg(cmd.out_svg, fam.couple_k);
    json config{{"command", "lsc sawtooth"}, {"density", cmd.density}, {"k", cmd.k},
                {"a", cmd.a},                {"b", cmd.b},             {"alpha", cmd.alpha},
                {"beta", cmd.beta},          {"lambda", cmd.lambda}};
    json report;
    report["k"] = cmd.k;
    report["energy_k"] = fam.energy_k;
    report["energy_limit"] = fam.energy_limit;
    report["energy_k_closed_form"] = fam.energy_k_closed_form;
    report["energy_limit_closed_form"] = fam.energy_limit_closed_form;
    report["limit_density"] = fam.limit_density;
    report["lsc_defect"] = fam.energy_limit - fam.energy_k;
    if (!cmd.out_svg.empty()) report["svg"] = cmd.out_svg;
    report["provenance"] =
        provenance("build_sawtooth", "k-tooth subgraph with facet densities a/b/0", config);
    emit(report, cmd.out);
    return 0;
}

int run_geometry(const GeometryCmd& cmd, bool energy_mode) {
    const EnergyDensity psi = density_from_spec(cmd.density);
    const Envelope env = build_envelope(psi);
    AtomMeasure mu;
    if (!cmd.measure.empty()) {
        mu = load_measure_json(cmd.measure);
        validate_couple(mu.carrier, false);
    } else {
        mu.carrier = load_couple(cmd.polygon, cmd.density_file);
    }
    const EnergyReport rep = energy(mu, env, cmd.rho);
    json config{{"command", energy_mode ? "geometry energy" : "geometry mass"},
                {"density", cmd.density},
                {"rho", cmd.rho}};
    json report;
    report["perimeter"] = rep.perimeter;
    report["area"] = rep.area;
    report["mass"] = rep.mass;
    if (energy_mode) {
        report["energy_F"] = finite_or_string(rep.energy_f);
        report["energy_Fbar"] = rep.energy_fbar;
        report["singular_mass"] = rep.singular_mass;
        report["theta"] = env.theta;
        report["s0"] = finite_or_string(env.s0);
    }
    report["provenance"] =
        provenance(energy_mode ? "energy" : "mass",
                   "facet sums with shoelace area; envelope for the relaxed energy", config);
    emit(report, cmd.out);
    return 0;
}

int run_wriggle(const WriggleCmd& cmd, bool weighted) {
    DiscreteCouple c = load_couple(cmd.polygon, cmd.density_file);
    std::vector<WrigglePlan> plans;
    DiscreteCouple out;
    json config{{"command", weighted ? "relax weighted" : "relax wriggle"},
                {"polygon", cmd.polygon},
                {"k", cmd.k}};

    if (!weighted && !cmd.sweep_ks.empty()) {
        // convergence sweep: perimeter, energy and weak* distance per refinement
        const EnergyDensity psi = density_from_spec(cmd.density);
        AtomMeasure input;
        input.carrier = c;
        WeakStarDictionary dict;
        const auto target = dict.moments(input);
        std::ofstream csv(cmd.sweep_csv.empty() ? "wriggle_sweep.csv" : cmd.sweep_csv);
        if (!csv) throw std::runtime_error("cannot write sweep csv");
        csv << "k,perimeter,energy,weakstar_distance\n";
        for (int kk : cmd.sweep_ks) {
            const auto wk = wriggle_uniform(c, cmd.r, kk);
            AtomMeasure mk;
            mk.carrier = wk;
            csv << kk << "," << format_double(perimeter(wk)) << ","
                << format_double(energy(wk, psi, 1.0).energy_f) << ","
                << format_double(dict.distance(dict.moments(mk), target)) << "\n";
        }
    }

    if (weighted) {
        auto f = load_density_csv(cmd.f_file);
        if (f.size() != c.loops[0].size())
            throw std::runtime_error("factor file entries must match polygon edge count");
        config["f_file"] = cmd.f_file;
        out = wriggle_weighted(c, f, cmd.k, &plans);
    } else {
        config["r"] = cmd.r;
        out = wriggle_uniform(c, cmd.r, cmd.k, &plans);
    }
    if (!cmd.out_svg.empty()) write_svg(cmd.out_svg, out);
    json report;
    report["input_perimeter"] = perimeter(c);
    report["output_perimeter"] = perimeter(out);
    report["ratio"] = perimeter(out) / perimeter(c);
    report["hausdorff"] = hausdorff_distance(c, out);
    report["tube"] = 1.0 / cmd.k;
    report["output_vertices"] = out.loops.empty() ? 0 : out.loops[0].size();
    report["plans"] = plans_summary(plans);
    if (!cmd.out_svg.empty()) report["svg"] = cmd.out_svg;
    report["provenance"] = provenance(
        weighted ? "wriggle_weighted" : "wriggle_uniform",
        "cell-partitioned oscillation, per-arc frequency solve", config,
        {{"frequency_rel_tol", 1e-10}});
    emit(report, cmd.out);
    return 0;
}

int run_dirac(const DiracCmd& cmd) {
    json config{{"command", "relax dirac"}, {"k", cmd.k}};
    RasterDensity f;
    if (cmd.square_mass > 0.0) {
        f.rect = {0.0, 0.0, 1.0, 1.0};
        f.nx = f.ny = 1;
        f.values = {cmd.square_mass};
        config["square_mass"] = cmd.square_mass;
    } else if (!cmd.measure.empty()) {
        const AtomMeasure mu = load_measure_json(cmd.measure);
        if (mu.atoms.empty()) throw std::runtime_error("relax dirac: measure has no atoms");
        f = splat_atoms(mu.atoms, cmd.delta);
        config["measure"] = cmd.measure;
        config["delta"] = cmd.delta;
    } else {
        throw std::runtime_error("relax dirac: provide --measure or --square-mass");
    }
    const DiscreteCouple balls = dirac_approx(f, cmd.k);
    AtomMeasure out;
    out.carrier = balls;
    if (!cmd.out_svg.empty()) write_svg(cmd.out_svg, out);

    const EnergyDensity hq = EnergyDensity::half_quadratic();
    const Envelope env = build_envelope(hq);

    if (!cmd.sweep_ks.empty()) {
        WeakStarDictionary dict;
        const auto target = dict.moments(f);
        std::ofstream csv(cmd.sweep_csv.empty() ? "dirac_sweep.csv" : cmd.sweep_csv);
        if (!csv) throw std::runtime_error("cannot write sweep csv");
        csv << "k,perimeter,energy,weakstar_distance\n";
        for (int kk : cmd.sweep_ks) {
            const auto bk = dirac_approx(f, kk);
            AtomMeasure mk;
            mk.carrier = bk;
            csv << kk << "," << format_double(perimeter(bk)) << ","
                << format_double(energy(mk, env, 1.0).energy_fbar) << ","
                << format_double(dict.distance(dict.moments(mk), target)) << "\n";
        }
    }
    json report;
    report["balls"] = balls.loops.size();
    report["input_mass"] = f.total_mass();
    report["output_mass"] = out.facet_mass();
    report["area"] = area(balls);
    report["energy_Fbar_halfquad"] = energy(out, env, 1.0).energy_fbar;
    report["theta_times_mass"] = env.theta * f.total_mass();
    report["weakstar_distance_to_input"] = weakstar_distance(out, f);
    if (!cmd.out_svg.empty()) report["svg"] = cmd.out_svg;
    report["provenance"] = provenance(
        "dirac_approx", "dyadic cells, one density-loaded 64-gon ball per cell", config);
    emit(report, cmd.out);
    return 0;
}

int run_recover(const RecoverCmd& cmd) {
    const EnergyDensity psi = density_from_spec(cmd.density);
    const Envelope env = build_envelope(psi);
    AtomMeasure mu = load_measure_json(cmd.measure);
    validate_couple(mu.carrier, false);
    std::vector<WrigglePlan> plans;
    const DiscreteCouple out = recover_general(mu, env, cmd.k, &plans, cmd.rho);
    if (!cmd.out_svg.empty()) write_svg(cmd.out_svg, out);
    const double fbar_in = energy(mu, env, cmd.rho).energy_fbar;
    const double f_out = energy(out, psi, cmd.rho).energy_f;
    json config{{"command", "relax recover"},
                {"measure", cmd.measure},
                {"density", cmd.density},
                {"k", cmd.k},
                {"rho", cmd.rho}};
    json report;
    report["energy_Fbar_input"] = fbar_in;
    report["energy_F_output"] = f_out;
    report["relative_gap"] = std::abs(f_out - fbar_in) / std::abs(fbar_in);
    report["relaxed_mass_input"] = relaxed_mass(mu, cmd.rho);
    report["mass_output"] = mass(out, cmd.rho);
    report["loops"] = out.loops.size();
    report["plans"] = plans_summary(plans);
    if (!cmd.out_svg.empty()) report["svg"] = cmd.out_svg;
    report["provenance"] = provenance(
        "recover_general", "clip+wriggle carrier, shrinking atom balls, exact mass rescale",
        config);
    emit(report, cmd.out);
    return 0;
}

int run_mincheck(const MinCheckCmd& cmd) {
    const EnergyDensity psi = density_from_spec(cmd.density);
    const Envelope env = build_envelope(psi);
    const BallProblem pb(cmd.n, cmd.rho, cmd.m);
    const MinCheckReport rep = relaxed_min_check(pb, env, cmd.samples, cmd.seed);
    json config{{"command", "relax mincheck"}, {"density", cmd.density}, {"n", cmd.n},
                {"rho", cmd.rho},              {"m", cmd.m},             {"samples", cmd.samples},
                {"seed", cmd.seed}};
    json report;
    report["gamma_m"] = rep.gamma_m;
    report["ball_value"] = rep.ball_value;
    report["dirac_value"] = rep.dirac_value;
    report["min_excess"] = rep.min_excess;
    report["samples"] = rep.samples;
    json worst = json::array();
    for (const auto& s : rep.worst)
        worst.push_back({{"relaxed_energy", s.relaxed_energy},
                         {"relaxed_mass", s.relaxed_mass},
                         {"excess", s.excess}});
    report["closest_samples"] = std::move(worst);
    report["provenance"] = provenance(
        "relaxed_min_check", "randomized mass-matched couples vs the ball minimum", config);
    emit(report, cmd.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adatom surface-energy equilibria and relaxation toolbox"};
    app.require_subcommand(1);

    EnvelopeCmd envc;
    auto* cmd_env = app.add_subcommand("envelope", "threshold density s0 and recession slope");
    cmd_env->add_option("--density", envc.density, "density spec")->required();
    cmd_env->add_option("--cap", envc.cap, "search cap for s0");
    cmd_env->add_option("--out", envc.out, "report path (default stdout)");

    auto* cmd_eq = app.add_subcommand("equilibria", "constrained ball family");
    cmd_eq->require_subcommand(1);
    SolveCmd solvec;
    auto* cmd_solve = cmd_eq->add_subcommand("solve", "minimize over the ball family");
    cmd_solve->add_option("--density", solvec.density, "density spec")->required();
    cmd_solve->add_option("--n", solvec.n);
    cmd_solve->add_option("--rho", solvec.rho);
    cmd_solve->add_option("--m", solvec.m);
    cmd_solve->add_option("--out", solvec.out);

    SweepCmd sweepc;
    auto* cmd_sweep = cmd_eq->add_subcommand("sweep", "tabulate R, ubar, e, e'");
    cmd_sweep->add_option("--density", sweepc.density, "density spec")->required();
    cmd_sweep->add_option("--n", sweepc.n);
    cmd_sweep->add_option("--rho", sweepc.rho);
    cmd_sweep->add_option("--m", sweepc.m);
    cmd_sweep->add_option("--points", sweepc.points);
    cmd_sweep->add_option("--rmin-frac", sweepc.rmin_frac);
    cmd_sweep->add_option("--rmax-frac", sweepc.rmax_frac);
    cmd_sweep->add_option("--csv", sweepc.out_csv);
    cmd_sweep->add_option("--out", sweepc.out);

    PlateauCmd platc;
    auto* cmd_plat = cmd_eq->add_subcommand("plateau", "density with a flat minimum interval");
    cmd_plat->add_option("--n", platc.n);
    cmd_plat->add_option("--rho", platc.rho);
    cmd_plat->add_option("--m", platc.m);
    cmd_plat->add_option("--r1-frac", platc.r1_frac);
    cmd_plat->add_option("--r2-frac", platc.r2_frac);
    cmd_plat->add_option("--gm", platc.gm);
    cmd_plat->add_option("--eps", platc.eps);
    cmd_plat->add_option("--out-density", platc.density_out);
    cmd_plat->add_option("--out", platc.out);

    auto* cmd_lsc = app.add_subcommand("lsc", "lower semicontinuity probes");
    cmd_lsc->require_subcommand(1);
    LscSweepCmd lsweepc;
    auto* cmd_lsweep = cmd_lsc->add_subcommand("sweep", "random tuple sweep of the gap");
    cmd_lsweep->add_option("--density", lsweepc.density, "density spec")->required();
    cmd_lsweep->add_option("--tuples", lsweepc.tuples);
    cmd_lsweep->add_option("--seed", lsweepc.seed);
    cmd_lsweep->add_option("--csv", lsweepc.out_csv);
    cmd_lsweep->add_option("--out", lsweepc.out);

    SawtoothCmd sawc;
    auto* cmd_saw = cmd_lsc->add_subcommand("sawtooth", "k-tooth oscillation family");
    cmd_saw->add_option("--k", sawc.k);
    cmd_saw->add_option("--a", sawc.a);
    cmd_saw->add_option("--b", sawc.b);
    cmd_saw->add_option("--alpha", sawc.alpha);
    cmd_saw->add_option("--beta", sawc.beta);
    cmd_saw->add_option("--lambda", sawc.lambda);
    cmd_saw->add_option("--density", sawc.density);
    cmd_saw->add_option("--out-svg", sawc.out_svg);
    cmd_saw->add_option("--out", sawc.out);

    auto* cmd_geo = app.add_subcommand("geometry", "energies and masses of couples");
    cmd_geo->require_subcommand(1);
    GeometryCmd geoc;
    for (bool energy_mode : {true, false}) {
        auto* sub = cmd_geo->add_subcommand(energy_mode ? "energy" : "mass",
                                            energy_mode ? "surface energy report"
                                                        : "constraint mass report");
        sub->add_option("--polygon", geoc.polygon);
        sub->add_option("--density-file", geoc.density_file);
        sub->add_option("--measure", geoc.measure);
        sub->add_option("--density", geoc.density);
        sub->add_option("--rho", geoc.rho);
        sub->add_option("--out", geoc.out);
    }

    auto* cmd_relax = app.add_subcommand("relax", "recovery constructions");
    cmd_relax->require_subcommand(1);
    WriggleCmd wrigc;
    auto* cmd_wr = cmd_relax->add_subcommand("wriggle", "uniform perimeter inflation");
    cmd_wr->add_option("--polygon", wrigc.polygon)->required();
    cmd_wr->add_option("--density-file", wrigc.density_file);
    cmd_wr->add_option("--r", wrigc.r);
    cmd_wr->add_option("--k", wrigc.k);
    cmd_wr->add_option("--out-svg", wrigc.out_svg);
    cmd_wr->add_option("--out,--report-json", wrigc.out);
    cmd_wr->add_option("--density", wrigc.density);
    cmd_wr->add_option("--sweep-ks", wrigc.sweep_ks, "refinements for a convergence CSV");
    cmd_wr->add_option("--sweep-csv", wrigc.sweep_csv);

    WriggleCmd weightc;
    auto* cmd_we = cmd_relax->add_subcommand("weighted", "per-edge perimeter gain 1+f");
    cmd_we->add_option("--polygon", weightc.polygon)->required();
    cmd_we->add_option("--density-file", weightc.density_file);
    cmd_we->add_option("--f-file", weightc.f_file, "per-edge factor CSV")->required();
    cmd_we->add_option("--k", weightc.k);
    cmd_we->add_option("--out-svg", weightc.out_svg);
    cmd_we->add_option("--out,--report-json", weightc.out);

    DiracCmd dirc;
    auto* cmd_di = cmd_relax->add_subcommand("dirac", "dyadic ball approximation");
    cmd_di->add_option("--measure", dirc.measure, "measure JSON with atoms");
    cmd_di->add_option("--square-mass", dirc.square_mass, "uniform density on the unit square");
    cmd_di->add_option("--delta", dirc.delta, "splat kernel radius");
    cmd_di->add_option("--k", dirc.k);
    cmd_di->add_option("--out-svg", dirc.out_svg);
    cmd_di->add_option("--out,--report-json", dirc.out);
    cmd_di->add_option("--sweep-ks", dirc.sweep_ks, "refinements for a convergence CSV");
    cmd_di->add_option("--sweep-csv", dirc.sweep_csv);

    RecoverCmd recc;
    auto* cmd_re = cmd_relax->add_subcommand("recover", "recovery of carrier + atoms");
    cmd_re->add_option("--measure", recc.measure)->required();
    cmd_re->add_option("--density", recc.density);
    cmd_re->add_option("--k", recc.k);
    cmd_re->add_option("--rho", recc.rho);
    cmd_re->add_option("--out-svg", recc.out_svg);
    cmd_re->add_option("--out,--report-json", recc.out);

    MinCheckCmd minc;
    auto* cmd_mc = cmd_relax->add_subcommand("mincheck", "relaxed minimum vs random couples");
    cmd_mc->add_option("--density", minc.density, "density spec")->required();
    cmd_mc->add_option("--n", minc.n);
    cmd_mc->add_option("--rho", minc.rho);
    cmd_mc->add_option("--m", minc.m);
    cmd_mc->add_option("--samples", minc.samples);
    cmd_mc->add_option("--seed", minc.seed);
    cmd_mc->add_option("--out", minc.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitParse;
    }

    try {
        if (*cmd_env) return run_envelope(envc);
        if (*cmd_solve) return run_solve(solvec);
        if (*cmd_sweep) return run_sweep(sweepc);
        if (*cmd_plat) return run_plateau(platc);
        if (*cmd_lsweep) return run_lsc_sweep(lsweepc);
        if (*cmd_saw) return run_sawtooth(sawc);
        if (*cmd_geo) {
            const bool energy_mode = cmd_geo->get_subcommands().front()->get_name() == "energy";
            return run_geometry(geoc, energy_mode);
        }
        if (*cmd_wr) return run_wriggle(wrigc, false);
        if (*cmd_we) return run_wriggle(weightc, true);
        if (*cmd_di) return run_dirac(dirc);
        if (*cmd_re) return run_recover(recc);
        if (*cmd_mc) return run_mincheck(minc);
    } catch (const nlohmann::json::parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::invalid_argument& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}
