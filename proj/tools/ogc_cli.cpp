#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "ogc/geometries.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    ogc::DomainSpec spec;
    bool has_ham = false;
    ogc::NaturalHamiltonian ham;
    double rho = 0.0;
    ogc::SolveOptions opts;
    std::string out_dir = "out";
    bool plot = false;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void reject_unknown(const json& block, const std::string& path,
                    const std::vector<std::string>& allowed) {
    if (!block.is_object()) throw ConfigError(path + ": expected an object");
    for (auto it = block.begin(); it != block.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigError(path + "." + it.key() + ": unknown key");
    }
}

double num(const json& block, const std::string& path, const std::string& key, double fallback,
           bool required = false) {
    if (!block.contains(key)) {
        if (required) throw ConfigError(path + "." + key + ": missing");
        return fallback;
    }
    if (!block[key].is_number()) throw ConfigError(path + "." + key + ": expected a number");
    return block[key].get<double>();
}

Run parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json cfg;
    try {
        in >> cfg;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    reject_unknown(cfg, "config",
                   {"geometry", "discretization", "constants", "budgets", "outputs", "seed"});
    if (!cfg.contains("geometry")) throw ConfigError("config.geometry: missing");

    Run run;
    const json& geo = cfg["geometry"];
    reject_unknown(geo, "geometry",
                   {"kind", "cap_radius", "half_width", "depth", "lambdas", "energy", "rho"});
    if (!geo.contains("kind") || !geo["kind"].is_string())
        throw ConfigError("geometry.kind: missing or not a string");
    std::string kind = geo["kind"].get<std::string>();
    if (kind == "sphere_cap") {
        run.spec = ogc::make_sphere_cap(num(geo, "geometry", "cap_radius", 0.0, true));
    } else if (kind == "half_plane") {
        run.spec = ogc::make_half_plane(num(geo, "geometry", "half_width", 3.0),
                                        num(geo, "geometry", "depth", 3.0));
    } else if (kind == "euclidean_disk") {
        run.spec = ogc::make_euclidean_disk();
    } else if (kind == "jacobi_well") {
        if (!geo.contains("lambdas") || !geo["lambdas"].is_array())
            throw ConfigError("geometry.lambdas: missing array");
        std::vector<double> lambdas;
        for (const auto& v : geo["lambdas"]) lambdas.push_back(v.get<double>());
        double E = num(geo, "geometry", "energy", 0.0, true);
        run.ham = ogc::ellipsoid_hamiltonian(lambdas, E);
        if (E <= run.ham.V(ogc::Vec::Zero(run.ham.dim)))
            throw ConfigError("geometry.energy: must exceed the potential minimum");
        run.rho = num(geo, "geometry", "rho", 0.1 * E);
        run.has_ham = true;
        run.spec = ogc::make_jacobi_well(run.ham, run.rho);
    } else {
        throw ConfigError("geometry.kind: unknown kind '" + kind + "'");
    }
    // fresh gate run unless constants are overridden below
    run.spec.delta0 = 0.0;
    run.spec.K0 = 0.0;

    if (cfg.contains("discretization")) {
        const json& d = cfg["discretization"];
        reject_unknown(d, "discretization", {"n", "step", "boundary_resolution"});
        run.opts.n = static_cast<int>(num(d, "discretization", "n", 128));
        run.opts.boundary_resolution =
            static_cast<int>(num(d, "discretization", "boundary_resolution", 32));
    }
    if (run.opts.n < 32 || run.opts.n > 2048 || (run.opts.n & (run.opts.n - 1)) != 0)
        throw ConfigError("discretization.n: must be a power of two in [32, 2048]");
    if (run.opts.boundary_resolution < 4)
        throw ConfigError("discretization.boundary_resolution: too small");

    if (cfg.contains("constants")) {
        const json& c = cfg["constants"];
        reject_unknown(c, "constants", {"delta0", "K0"});
        double d0 = num(c, "constants", "delta0", 0.0);
        double k0 = num(c, "constants", "K0", 0.0);
        if (d0 < 0 || k0 < 0) throw ConfigError("constants: overrides must be positive");
        if (d0 > 0) run.spec.delta0 = d0;
        if (k0 > 0) run.spec.K0 = k0;
    }
    if (cfg.contains("budgets")) {
        const json& b = cfg["budgets"];
        reject_unknown(b, "budgets", {"max_outer", "max_inner", "wall_clock_cap"});
        run.opts.max_outer = static_cast<int>(num(b, "budgets", "max_outer", 40));
        run.opts.max_inner = static_cast<int>(num(b, "budgets", "max_inner", 4000));
        run.opts.wall_clock_cap = num(b, "budgets", "wall_clock_cap", 300.0);
        if (run.opts.max_outer <= 0 || run.opts.max_inner <= 0 ||
            run.opts.wall_clock_cap <= 0)
            throw ConfigError("budgets: values must be positive");
    }
    if (cfg.contains("outputs")) {
        const json& o = cfg["outputs"];
        reject_unknown(o, "outputs", {"dir", "plot"});
        if (o.contains("dir")) run.out_dir = o["dir"].get<std::string>();
        if (o.contains("plot")) run.plot = o["plot"].get<bool>();
    }
    if (cfg.contains("seed")) {
        if (!cfg["seed"].is_number_integer()) throw ConfigError("seed: expected an integer");
        run.opts.seed = cfg["seed"].get<unsigned long long>();
    }
    return run;
}

json vec_to_json(const ogc::Vec& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

json chord_to_json(const ogc::ChordResult& chord) {
    json j;
    j["length"] = chord.length;
    j["energy"] = chord.energy;
    j["geodesic_residual"] = chord.geodesic_residual;
    j["orthogonality_defect"] = chord.orthogonality_defect;
    j["is_wogc"] = chord.is_wogc;
    j["boundary_a"] = vec_to_json(chord.boundary_a);
    j["boundary_b"] = vec_to_json(chord.boundary_b);
    json nodes = json::array();
    for (const ogc::Vec& p : chord.curve.nodes) nodes.push_back(vec_to_json(p));
    j["nodes"] = nodes;
    return j;
}

json ledger_to_json(const ogc::ConstantsLedger& led) {
    json j;
    j["delta0"] = led.delta0;
    j["K0"] = led.K0;
    j["M0"] = led.M0;
    j["ell0"] = led.ell0;
    j["L0"] = led.L0;
    j["G0"] = led.G0;
    j["L1"] = led.L1;
    j["N0_hess"] = led.N0_hess;
    j["lambda1"] = led.lambda1;
    j["lambda"] = led.lambda;
    j["E_r"] = led.E_r;
    j["delta_bar"] = led.delta_bar;
    j["gamma_bar"] = led.gamma_bar;
    j["sigma0"] = led.sigma0;
    j["sigma1"] = led.sigma1;
    j["theta0"] = led.theta0;
    j["mu0"] = led.mu0;
    j["rho0"] = led.rho0;
    j["eps0"] = led.eps0;
    j["c1_lower_bound"] = led.c1_lower_bound;
    return j;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

void write_trace(const fs::path& path, const std::vector<ogc::TraceRow>& rows) {
    std::ostringstream os;
    os << "iter,step_kind,F,residual,displacement,cusps\n";
    os.precision(12);
    for (const ogc::TraceRow& r : rows)
        os << r.iter << ',' << r.step_kind << ',' << r.F << ',' << r.residual << ','
           << r.displacement << ',' << r.cusps << '\n';
    write_text(path, os.str());
}

void write_plot(const fs::path& path, const ogc::DomainSpec& spec,
                const std::vector<ogc::ChordResult>& chords) {
    if (spec.field->dim != 2 || !spec.star_radius) return;
    double R = 0.0;
    std::vector<ogc::Vec> boundary, inner;
    for (int k = 0; k <= 256; ++k) {
        double ang = 2.0 * M_PI * k / 256;
        ogc::Vec dir = ogc::vec2(std::cos(ang), std::sin(ang));
        ogc::Vec p = spec.chart_center + spec.star_radius(dir) * dir;
        boundary.push_back(p);
        R = std::max(R, (p - spec.chart_center).norm());
        if (spec.delta0 > 0) {
            try {
                inner.push_back(ogc::flow_eta(spec, p, spec.delta0, -1));
            } catch (const ogc::OgcError&) {
            }
        }
    }
    double s = 360.0 / R;
    auto X = [&](const ogc::Vec& p) { return 400.0 + s * (p[0] - spec.chart_center[0]); };
    auto Y = [&](const ogc::Vec& p) { return 400.0 - s * (p[1] - spec.chart_center[1]); };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\">\n";
    auto poly = [&](const std::vector<ogc::Vec>& pts, const char* color) {
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
        for (const ogc::Vec& p : pts) os << X(p) << ',' << Y(p) << ' ';
        os << "\"/>\n";
    };
    poly(boundary, "black");
    if (!inner.empty()) poly(inner, "gray");
    for (const ogc::ChordResult& chord : chords) poly(chord.curve.nodes, "crimson");
    os << "</svg>\n";
    write_text(path, os.str());
}

int cmd_solve(Run& run) {
    fs::create_directories(run.out_dir);
    ogc::SolveDiagnostics diag;
    std::vector<ogc::ChordResult> chords;
    try {
        chords = ogc::solve_existence(run.spec, run.opts, &diag);
    } catch (const ogc::NotConcave& e) {
        std::cerr << "NotConcave: " << e.what() << "\n";
        return 1;
    } catch (const ogc::Stalled& e) {
        std::cerr << "Stalled: " << e.what() << "\n";
        return 2;
    }
    json jc = json::array();
    for (const ogc::ChordResult& chord : chords) jc.push_back(chord_to_json(chord));
    write_text(fs::path(run.out_dir) / "chords.json", jc.dump(2) + "\n");
    write_text(fs::path(run.out_dir) / "constants.json", ledger_to_json(diag.ledger).dump(2) + "\n");
    write_trace(fs::path(run.out_dir) / "trace.csv", diag.trace);
    if (run.plot) write_plot(fs::path(run.out_dir) / "plot.svg", run.spec, chords);
    std::cout << "chords: " << chords.size() << ", min level: " << diag.min_level << "\n";
    if (chords.empty() || diag.stalled) return 2;
    return 0;
}

int cmd_check(Run& run) {
    ogc::Rng rng(run.opts.seed + 0x9e3779b97f4a7c15ULL);
    if (run.spec.delta0 <= 0) {
        ogc::ConcavityReport rep = ogc::check_strong_concavity(run.spec, 400, rng);
        if (!rep.is_strongly_concave) {
            std::cerr << "strong concavity: false\n";
            for (const ogc::ConcavityWitness& w : rep.witnesses)
                std::cerr << "  witness (" << w.reason << ") at [" << w.q.transpose()
                          << "], value " << w.value << "\n";
            return 1;
        }
    }
    if (run.spec.K0 <= 0) ogc::compute_K0(run.spec, 600, rng);
    std::vector<ogc::Vec> region =
        ogc::sample_phi_band(run.spec, -run.spec.delta0, 0.0, 8, rng);
    region.push_back(run.spec.chart_center);
    double inj = ogc::injectivity_radius_lower_bound(*run.spec.field, region);
    ogc::PathFamily family =
        ogc::build_family(run.spec, run.opts.boundary_resolution, run.opts.n, inj);
    double M0 = ogc::compute_M0(family, *run.spec.field);
    ogc::ConstantsLedger led = ogc::assemble_ledger(run.spec, M0, rng);
    std::cout << "delta0 = " << led.delta0 << "\nK0 = " << led.K0 << "\nM0 = " << led.M0
              << "\nlambda1 = " << led.lambda1
              << "\nc1 lower bound = " << led.c1_lower_bound << "\n";
    int wogc = 0;
    for (const auto& [key, curve] : family.curves) {
        (void)key;
        for (int i = 1; i < curve.n; ++i)
            if (std::abs(run.spec.phi(curve.nodes[i])) <= run.spec.boundary_tol) {
                ++wogc;
                break;
            }
    }
    std::cout << "seed curves with interior boundary contact: " << wogc << "\n";
    return 0;
}

int cmd_brake(Run& run) {
    if (!run.has_ham) {
        std::cerr << "brake requires a jacobi_well geometry\n";
        return 1;
    }
    fs::create_directories(run.out_dir);
    ogc::SolveDiagnostics diag;
    std::vector<ogc::ChordResult> chords;
    try {
        chords = ogc::solve_existence(run.spec, run.opts, &diag);
    } catch (const ogc::NotConcave& e) {
        std::cerr << "NotConcave: " << e.what() << "\n";
        return 1;
    }
    if (chords.empty()) return 2;

    std::vector<double> lambdas;
    // rational-ratio warning for the ellipsoid family
    {
        // recover frequencies from the potential Hessian at the origin
        ogc::Vec e = ogc::Vec::Zero(run.ham.dim);
        for (int i = 0; i < run.ham.dim; ++i) {
            ogc::Vec q = ogc::Vec::Zero(run.ham.dim);
            q[i] = 1e-4;
            lambdas.push_back(std::sqrt(std::max(0.0, run.ham.V(q) / (1e-8))));
        }
        (void)e;
        try {
            ogc::EllipsoidReference ref = ogc::ellipsoid_reference(lambdas, run.ham.E);
            if (ref.rational_ratio_flag)
                std::cerr << "warning: rationally dependent frequencies detected\n";
        } catch (const ogc::OgcError&) {
        }
    }

    json jo = json::array();
    bool all_ok = true;
    std::vector<ogc::BrakeOrbit> kept;
    for (const ogc::ChordResult& chord : chords) {
        try {
            ogc::BrakeOrbit orbit = ogc::brake_orbit_from_chord(run.ham, chord, run.rho);
            bool dup = false;
            for (const ogc::BrakeOrbit& o : kept)
                if (std::abs(o.T - orbit.T) <= 1e-6 * std::max(1.0, o.T) &&
                    std::abs(o.amplitude - orbit.amplitude) <= 1e-6)
                    dup = true;
            if (dup) continue;
            kept.push_back(orbit);
            json j;
            j["half_period"] = orbit.T;
            j["amplitude"] = orbit.amplitude;
            j["residual_p0"] = orbit.residual_p0;
            j["residual_pT"] = orbit.residual_pT;
            j["q0"] = vec_to_json(orbit.q_traj.front());
            j["qT"] = vec_to_json(orbit.q_traj.back());
            jo.push_back(j);
        } catch (const ogc::OgcError& e) {
            std::cerr << "orbit shooting failed: " << e.what() << "\n";
            all_ok = false;
        }
    }
    write_text(fs::path(run.out_dir) / "orbits.json", jo.dump(2) + "\n");
    write_text(fs::path(run.out_dir) / "constants.json", ledger_to_json(diag.ledger).dump(2) + "\n");
    write_trace(fs::path(run.out_dir) / "trace.csv", diag.trace);
    json jc = json::array();
    for (const ogc::ChordResult& chord : chords) jc.push_back(chord_to_json(chord));
    write_text(fs::path(run.out_dir) / "chords.json", jc.dump(2) + "\n");
    if (run.plot) write_plot(fs::path(run.out_dir) / "plot.svg", run.spec, chords);
    std::cout << "orbits: " << jo.size() << "\n";
    return (jo.empty() || !all_ok) ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"orthogonal geodesic chords and brake orbits"};
    app.require_subcommand(1);
    std::string config_path, out_override;
    bool plot = false;
    long long seed_override = -1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "config file path")->required();
        sub->add_option("--out", out_override, "output directory override");
        sub->add_flag("--plot", plot, "emit plot.svg");
        sub->add_option("--seed", seed_override, "seed override");
    };
    CLI::App* solve = app.add_subcommand("solve", "find orthogonal geodesic chords");
    CLI::App* check = app.add_subcommand("check", "run the concavity/constants phase only");
    CLI::App* brake = app.add_subcommand("brake", "chords to brake orbits");
    add_common(solve);
    add_common(check);
    add_common(brake);
    CLI11_PARSE(app, argc, argv);

    Run run;
    try {
        run = parse_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const ogc::OgcError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    if (!out_override.empty()) run.out_dir = out_override;
    if (plot) run.plot = true;
    if (seed_override >= 0) run.opts.seed = static_cast<unsigned long long>(seed_override);

    try {
        if (solve->parsed()) return cmd_solve(run);
        if (check->parsed()) return cmd_check(run);
        if (brake->parsed()) return cmd_brake(run);
    } catch (const ogc::OgcError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
