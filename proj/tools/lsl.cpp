// lsl: liquid Lane-Emden star stability toolkit.
//
// Subcommands cover the pipeline stages: equilibrium solves (steady,
// gaseous), growth modes (modes, rayleigh), scaling sweeps (scaling),
// time evolution (evolve, linear, escape), and the verification suite
// (verify).  Exit codes: 0 success, 1 verification failure, 2 config
// error, 3 numerical failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsl/lsl.hpp"

namespace {

using nlohmann::json;

std::string out_root;

std::string resolve_out(const std::string& path) {
    if (path.empty()) return path;
    std::filesystem::path p(path);
    if (p.is_relative() && !out_root.empty()) p = std::filesystem::path(out_root) / p;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    return p.string();
}

// Canonical one-line echo of the effective configuration, embedded in every
// output file for provenance.
std::string config_echo(const std::string& cmd, const std::map<std::string, std::string>& kv) {
    std::string line = "config cmd=" + cmd;
    for (const auto& [k, v] : kv) line += " " + k + "=" + v;
    return line;
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(lsl::parse_double(tok));
    }
    return out;
}

// Apply a JSON config file as defaults; explicit flags override afterwards.
json load_config_json(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") {
            std::ifstream in(argv[i + 1]);
            if (!in) throw lsl::config_error(std::string("cannot open config file: ") + argv[i + 1]);
            json j;
            in >> j;
            if (!j.is_object()) throw lsl::config_error("config file must hold a JSON object");
            return j;
        }
    return json::object();
}

template <class T>
void from_config(const json& j, const std::string& key, T& value) {
    if (j.contains(key)) value = j.at(key).get<T>();
}

struct SolveArgs {
    double gamma = 1.2;
    double kappa = 100.0;
    std::size_t cells = 2048;
    std::string profile_path;

    lsl::StarProfile solve() const {
        if (!profile_path.empty()) return lsl::read_profile_csv(profile_path);
        return lsl::solve_liquid_star(gamma, kappa, cells);
    }

    void echo(std::map<std::string, std::string>& kv) const {
        if (!profile_path.empty()) {
            kv["profile"] = profile_path;
        } else {
            kv["gamma"] = lsl::format_full(gamma);
            kv["kappa"] = lsl::format_full(kappa);
            kv["n"] = std::to_string(cells);
        }
    }
};

int cmd_steady(const json& cfg, CLI::App& app, int, char**) {
    struct Args {
        double gamma = 1.2, kappa = 100.0, tol = 1e-12, ratio = 1.0;
        std::size_t cells = 2048;
        std::string grid = "uniform", out = "profile.csv";
    };
    auto a = std::make_shared<Args>();
    from_config(cfg, "gamma", a->gamma);
    from_config(cfg, "kappa", a->kappa);
    from_config(cfg, "n", a->cells);
    from_config(cfg, "tol", a->tol);
    from_config(cfg, "grid", a->grid);
    from_config(cfg, "ratio", a->ratio);
    from_config(cfg, "out", a->out);
    app.add_option("--gamma", a->gamma, "adiabatic index in [1, 4/3)");
    app.add_option("--kappa", a->kappa, "central density (> 1)");
    app.add_option("--n", a->cells, "number of grid cells");
    app.add_option("--tol", a->tol, "boundary-event bisection tolerance");
    app.add_option("--grid", a->grid, "node spacing: uniform or geometric");
    app.add_option("--ratio", a->ratio, "geometric spacing ratio");
    app.add_option("--out", a->out, "output profile CSV");
    app.callback([a] {
        lsl::LiquidStarOptions opts;
        opts.cells = a->cells;
        opts.event_rel_tol = a->tol;
        if (a->grid == "geometric") {
            opts.spacing = lsl::RadialGrid::Spacing::geometric;
            opts.geometric_ratio = a->ratio;
        } else if (a->grid != "uniform") {
            throw lsl::config_error("steady: --grid must be uniform or geometric");
        }
        const lsl::StarProfile p = lsl::solve_liquid_star(a->gamma, a->kappa, opts);
        std::map<std::string, std::string> kv{{"n", std::to_string(a->cells)},
                                              {"tol", lsl::format_full(a->tol)},
                                              {"grid", a->grid}};
        lsl::write_profile_csv(resolve_out(a->out), p, {config_echo("steady", kv)});
        std::cout << "steady: R=" << lsl::format_full(p.radius)
                  << " mass=" << lsl::format_full(p.total_mass()) << " -> "
                  << resolve_out(a->out) << "\n";
    });
    return 0;
}

int cmd_gaseous(const json& cfg, CLI::App& app, int, char**) {
    struct Args {
        double gamma = 1.2, rho_floor = 1e-6;
        std::size_t cells = 2048;
        std::string out = "gaseous.csv";
    };
    auto a = std::make_shared<Args>();
    from_config(cfg, "gamma", a->gamma);
    from_config(cfg, "n", a->cells);
    from_config(cfg, "rho_floor", a->rho_floor);
    from_config(cfg, "out", a->out);
    app.add_option("--gamma", a->gamma, "adiabatic index in [1, 4/3)");
    app.add_option("--n", a->cells, "number of grid cells");
    app.add_option("--rho-floor", a->rho_floor, "truncation density in (0, 1)");
    app.add_option("--out", a->out, "output CSV");
    app.callback([a] {
        const lsl::GaseousReference g =
            lsl::solve_gaseous_reference(a->gamma, a->cells, a->rho_floor);
        std::map<std::string, std::string> kv{{"gamma", lsl::format_full(a->gamma)},
                                              {"n", std::to_string(a->cells)},
                                              {"rho_floor", lsl::format_full(a->rho_floor)}};
        lsl::write_gaseous_csv(resolve_out(a->out), g, {config_echo("gaseous", kv)});
        std::cout << "gaseous: R=" << lsl::format_full(g.radius) << " -> " << resolve_out(a->out)
                  << "\n";
    });
    return 0;
}

int cmd_modes(const json& cfg, CLI::App& app, int, char**) {
    auto args = std::make_shared<SolveArgs>();
    auto tol = std::make_shared<double>(1e-10);
    auto k = std::make_shared<int>(1);
    auto out_mode = std::make_shared<std::string>("mode.csv");
    auto out_summary = std::make_shared<std::string>("mode.json");
    from_config(cfg, "gamma", args->gamma);
    from_config(cfg, "kappa", args->kappa);
    from_config(cfg, "n", args->cells);
    from_config(cfg, "profile", args->profile_path);
    from_config(cfg, "tol", *tol);
    from_config(cfg, "k", *k);
    from_config(cfg, "out_mode", *out_mode);
    from_config(cfg, "out_summary", *out_summary);
    app.add_option("--gamma", args->gamma, "adiabatic index");
    app.add_option("--kappa", args->kappa, "central density");
    app.add_option("--n", args->cells, "grid cells");
    app.add_option("--profile", args->profile_path, "read the equilibrium from a profile CSV");
    app.add_option("--tol", *tol, "eigenvalue tolerance");
    app.add_option("--k", *k, "also report the first k eigenvalues");
    app.add_option("--out-mode", *out_mode, "eigenfunction CSV");
    app.add_option("--out-summary", *out_summary, "summary JSON");
    app.callback([args, tol, k, out_mode, out_summary] {
        const lsl::StarProfile p = args->solve();
        const lsl::AssembledPencil pencil = lsl::assemble(p);
        const lsl::ModeResult mode = lsl::lowest_eigenpair(pencil, *tol);
        std::map<std::string, std::string> kv;
        args->echo(kv);
        kv["tol"] = lsl::format_full(*tol);
        lsl::write_mode_csv(resolve_out(*out_mode), p.grid, mode, {config_echo("modes", kv)});
        json j = lsl::mode_to_json(p, mode);
        if (*k > 1) j["eigenvalues"] = lsl::lowest_eigenvalues(pencil, *k, *tol);
        lsl::write_json(resolve_out(*out_summary), j);
        std::cout << "modes: mu_star=" << lsl::format_full(mode.mu_star)
                  << (mode.mu0 ? " growth_rate=" + lsl::format_full(*mode.growth_rate)
                               : std::string(" (stable)"))
                  << "\n";
    });
    return 0;
}

int cmd_rayleigh(const json& cfg, CLI::App& app, int, char**) {
    auto args = std::make_shared<SolveArgs>();
    auto nu = std::make_shared<double>(0.0);
    auto a = std::make_shared<double>(0.0);
    auto eps1 = std::make_shared<double>(0.0);
    auto eps2 = std::make_shared<double>(0.0);
    auto window = std::make_shared<bool>(false);
    auto out = std::make_shared<std::string>();
    from_config(cfg, "gamma", args->gamma);
    from_config(cfg, "kappa", args->kappa);
    from_config(cfg, "n", args->cells);
    from_config(cfg, "nu", *nu);
    from_config(cfg, "a", *a);
    from_config(cfg, "out", *out);
    app.add_option("--gamma", args->gamma, "adiabatic index");
    app.add_option("--kappa", args->kappa, "central density");
    app.add_option("--n", args->cells, "grid cells");
    app.add_option("--nu", *nu, "core breakpoint multiplier of the plateau-power test function");
    app.add_option("--a", *a, "decay exponent of the plateau-power test function");
    app.add_flag("--window", *window, "print the admissible exponent window instead");
    app.add_option("--eps1", *eps1, "window slack parameter");
    app.add_option("--eps2", *eps2, "window slack parameter");
    app.add_option("--out", *out, "optional JSON output path");
    app.callback([args, nu, a, eps1, eps2, window, out] {
        json j;
        if (*window) {
            const auto w = lsl::exponent_window(args->gamma, *eps1, *eps2);
            j["gamma"] = args->gamma;
            j["empty"] = !w.has_value();
            if (w) j["window"] = {w->first, w->second};
        } else {
            const lsl::StarProfile p = args->solve();
            double value;
            if (*nu > 0.0 && *a > 0.0) {
                value = lsl::plateau_power_quotient(p, *nu, *a);
                j["nu"] = *nu;
                j["a"] = *a;
            } else {
                std::vector<double> ones(p.grid.size(), 1.0);
                value = lsl::rayleigh_quotient(lsl::assemble(p), ones);
            }
            j["gamma"] = p.gamma;
            j["kappa"] = p.kappa;
            j["quotient"] = value;
        }
        if (!out->empty()) lsl::write_json(resolve_out(*out), j);
        std::cout << j.dump(2) << "\n";
    });
    return 0;
}

int cmd_scaling(const json& cfg, CLI::App& app, int, char**) {
    auto gamma = std::make_shared<double>(1.25);
    auto kmin = std::make_shared<double>(1e2);
    auto kmax = std::make_shared<double>(1e5);
    auto per_decade = std::make_shared<int>(8);
    auto n_base = std::make_shared<std::size_t>(2048);
    auto jobs = std::make_shared<int>(1);
    auto out_csv = std::make_shared<std::string>("sweep.csv");
    auto out_verdict = std::make_shared<std::string>("verdict.json");
    from_config(cfg, "gamma", *gamma);
    from_config(cfg, "kappa_min", *kmin);
    from_config(cfg, "kappa_max", *kmax);
    from_config(cfg, "per_decade", *per_decade);
    from_config(cfg, "n_base", *n_base);
    from_config(cfg, "jobs", *jobs);
    from_config(cfg, "out_csv", *out_csv);
    from_config(cfg, "out_verdict", *out_verdict);
    app.add_option("--gamma", *gamma, "adiabatic index");
    app.add_option("--kappa-min", *kmin, "sweep start (> 1)");
    app.add_option("--kappa-max", *kmax, "sweep end");
    app.add_option("--per-decade", *per_decade, "kappa points per decade");
    app.add_option("--n-base", *n_base, "base grid cells (scaled by decades of kappa)");
    app.add_option("--jobs", *jobs, "parallel workers for the sweep");
    app.add_option("--out-csv", *out_csv, "sweep records CSV");
    app.add_option("--out-verdict", *out_verdict, "regime verdict JSON");
    app.callback([gamma, kmin, kmax, per_decade, n_base, jobs, out_csv, out_verdict] {
        lsl::SweepOptions so;
        so.cells_base = *n_base;
        so.jobs = *jobs;
        const auto records = lsl::sweep(*gamma, lsl::kappa_ladder(*kmin, *kmax, *per_decade), so);
        std::map<std::string, std::string> kv{
            {"gamma", lsl::format_full(*gamma)},      {"kappa_min", lsl::format_full(*kmin)},
            {"kappa_max", lsl::format_full(*kmax)},   {"per_decade", std::to_string(*per_decade)},
            {"n_base", std::to_string(*n_base)},      {"jobs", std::to_string(*jobs)}};
        lsl::write_sweep_csv(resolve_out(*out_csv), records, {config_echo("scaling", kv)});
        const lsl::RegimeVerdict verdict = lsl::verify_regime(*gamma, records);
        lsl::write_json(resolve_out(*out_verdict), lsl::verdict_to_json(verdict));
        std::cout << "scaling: case " << verdict.case_id << " "
                  << (verdict.pass ? "PASS" : "FAIL") << " -> " << resolve_out(*out_csv) << "\n";
    });
    return 0;
}

struct EvolveArgs {
    SolveArgs solve;
    double delta = 0.0;
    double t_end = 0.0;  // 0: one sound-crossing time
    double sample_dt = 0.0;
    double cfl = 0.4;
    bool viscosity = false;
    double cq = 2.0;
    int balance = -1;  // -1: auto (on when seeded)
    std::string out = "diagnostics.csv";
    std::string out_state;
};

int cmd_evolve(const json& cfg, CLI::App& app, int, char**) {
    auto ea = std::make_shared<EvolveArgs>();
    from_config(cfg, "gamma", ea->solve.gamma);
    from_config(cfg, "kappa", ea->solve.kappa);
    from_config(cfg, "n", ea->solve.cells);
    from_config(cfg, "profile", ea->solve.profile_path);
    from_config(cfg, "delta", ea->delta);
    from_config(cfg, "t_end", ea->t_end);
    from_config(cfg, "sample_dt", ea->sample_dt);
    from_config(cfg, "cfl", ea->cfl);
    from_config(cfg, "viscosity", ea->viscosity);
    from_config(cfg, "balance", ea->balance);
    from_config(cfg, "out", ea->out);
    from_config(cfg, "out_state", ea->out_state);
    app.add_option("--gamma", ea->solve.gamma, "adiabatic index");
    app.add_option("--kappa", ea->solve.kappa, "central density");
    app.add_option("--n", ea->solve.cells, "grid cells");
    app.add_option("--profile", ea->solve.profile_path, "equilibrium from profile CSV");
    app.add_option("--delta", ea->delta, "seed amplitude of the growing mode (0: none)");
    app.add_option("--t-end", ea->t_end, "evolution time (0: one sound crossing)");
    app.add_option("--sample-dt", ea->sample_dt, "diagnostic sampling interval");
    app.add_option("--cfl", ea->cfl, "CFL number");
    app.add_flag("--viscosity", ea->viscosity, "enable artificial viscosity");
    app.add_option("--cq", ea->cq, "artificial viscosity coefficient");
    app.add_option("--balance", ea->balance,
                   "deviation form: 1 on, 0 off, -1 auto (on when seeded)");
    app.add_option("--out", ea->out, "diagnostics CSV");
    app.add_option("--out-state", ea->out_state, "final state CSV");
    app.callback([ea] {
        const lsl::StarProfile p = ea->solve.solve();
        lsl::EvolveOptions opts;
        opts.cfl = ea->cfl;
        opts.artificial_viscosity = ea->viscosity;
        opts.viscosity_coeff = ea->cq;
        opts.balance_equilibrium = ea->balance == -1 ? ea->delta > 0.0 : ea->balance != 0;
        opts.collect_snapshots = !ea->out_state.empty();
        lsl::LagrangianState s0 = lsl::init_equilibrium(p);
        if (ea->delta > 0.0) {
            const lsl::ModeResult mode = lsl::growth_rate_of(p);
            if (!mode.growth_rate)
                throw lsl::config_error("evolve: --delta given but the star is linearly stable");
            s0 = lsl::seed_mode(p, mode, ea->delta);
        }
        const double t_end = ea->t_end > 0.0 ? ea->t_end : lsl::sound_crossing_time(p);
        const double sample = ea->sample_dt > 0.0 ? ea->sample_dt : t_end / 200.0;
        const lsl::Diagnostics d = lsl::evolve(s0, p, t_end, sample, opts);
        std::map<std::string, std::string> kv;
        ea->solve.echo(kv);
        kv["delta"] = lsl::format_full(ea->delta);
        kv["t_end"] = lsl::format_full(t_end);
        kv["sample_dt"] = lsl::format_full(sample);
        kv["cfl"] = lsl::format_full(ea->cfl);
        kv["viscosity"] = ea->viscosity ? "1" : "0";
        kv["balance"] = opts.balance_equilibrium ? "1" : "0";
        lsl::write_diagnostics_csv(resolve_out(ea->out), d, {config_echo("evolve", kv)});
        if (!ea->out_state.empty() && !d.snapshots.empty())
            lsl::write_state_csv(resolve_out(ea->out_state), d.snapshots.back(),
                                 {config_echo("evolve", kv)});
        std::cout << "evolve: " << d.status << ", " << d.time.size() << " samples -> "
                  << resolve_out(ea->out) << "\n";
    });
    return 0;
}

int cmd_linear(const json& cfg, CLI::App& app, int, char**) {
    auto ea = std::make_shared<EvolveArgs>();
    ea->out = "linear.csv";
    from_config(cfg, "gamma", ea->solve.gamma);
    from_config(cfg, "kappa", ea->solve.kappa);
    from_config(cfg, "n", ea->solve.cells);
    from_config(cfg, "profile", ea->solve.profile_path);
    from_config(cfg, "t_end", ea->t_end);
    from_config(cfg, "sample_dt", ea->sample_dt);
    from_config(cfg, "cfl", ea->cfl);
    from_config(cfg, "out", ea->out);
    app.add_option("--gamma", ea->solve.gamma, "adiabatic index");
    app.add_option("--kappa", ea->solve.kappa, "central density");
    app.add_option("--n", ea->solve.cells, "grid cells");
    app.add_option("--profile", ea->solve.profile_path, "equilibrium from profile CSV");
    app.add_option("--t-end", ea->t_end, "evolution time (0: one e-fold of the growing mode)");
    app.add_option("--sample-dt", ea->sample_dt, "diagnostic sampling interval");
    app.add_option("--cfl", ea->cfl, "CFL number");
    app.add_option("--out", ea->out, "diagnostics CSV");
    app.callback([ea] {
        const lsl::StarProfile p = ea->solve.solve();
        const lsl::ModeResult mode = lsl::growth_rate_of(p);
        if (!mode.growth_rate)
            throw lsl::config_error("linear: star is linearly stable; no growing mode to evolve");
        const double rate = *mode.growth_rate;
        const double t_end = ea->t_end > 0.0 ? ea->t_end : 1.0 / rate;
        const double sample = ea->sample_dt > 0.0 ? ea->sample_dt : t_end / 100.0;
        lsl::LinearEvolveOptions opts;
        opts.cfl = ea->cfl;
        const lsl::LinearEvolveResult r =
            lsl::evolve_linearized(p, lsl::linear_state_from_mode(p, mode), t_end, sample, opts);
        std::map<std::string, std::string> kv;
        ea->solve.echo(kv);
        kv["t_end"] = lsl::format_full(t_end);
        kv["sample_dt"] = lsl::format_full(sample);
        lsl::write_diagnostics_csv(resolve_out(ea->out), r.diag, {config_echo("linear", kv)});
        std::cout << "linear: growth_rate=" << lsl::format_full(rate) << ", "
                  << r.diag.time.size() << " samples -> " << resolve_out(ea->out) << "\n";
    });
    return 0;
}

int cmd_escape(const json& cfg, CLI::App& app, int, char**) {
    auto args = std::make_shared<SolveArgs>();
    args->kappa = 1e3;
    args->cells = 1024;
    auto deltas_csv = std::make_shared<std::string>("1e-4,1e-5,1e-6");
    auto theta0 = std::make_shared<double>(1e-2);
    auto corrections = std::make_shared<bool>(true);
    auto out = std::make_shared<std::string>("escape.csv");
    auto out_fit = std::make_shared<std::string>("escape_fit.json");
    from_config(cfg, "gamma", args->gamma);
    from_config(cfg, "kappa", args->kappa);
    from_config(cfg, "n", args->cells);
    from_config(cfg, "deltas", *deltas_csv);
    from_config(cfg, "theta0", *theta0);
    from_config(cfg, "out", *out);
    from_config(cfg, "out_fit", *out_fit);
    app.add_option("--gamma", args->gamma, "adiabatic index");
    app.add_option("--kappa", args->kappa, "central density");
    app.add_option("--n", args->cells, "grid cells");
    app.add_option("--deltas", *deltas_csv, "comma-separated decreasing seed amplitudes");
    app.add_option("--theta0", *theta0, "escape threshold for the perturbation norm");
    app.add_flag("!--no-corrections", *corrections, "skip the delta^2 correction runs");
    app.add_option("--out", *out, "long-format CSV: delta,t,norm,diff");
    app.add_option("--out-fit", *out_fit, "fit JSON");
    app.callback([args, deltas_csv, theta0, corrections, out, out_fit] {
        const lsl::StarProfile p = args->solve();
        const lsl::ModeResult mode = lsl::growth_rate_of(p);
        if (!mode.growth_rate)
            throw lsl::config_error("escape: star is linearly stable; no growing mode");
        lsl::EscapeOptions eo;
        eo.measure_correction = *corrections;
        const std::vector<double> deltas = parse_list(*deltas_csv);
        const lsl::EscapeResult esc = lsl::escape_experiment(p, mode, deltas, *theta0, eo);

        std::map<std::string, std::string> kv;
        args->echo(kv);
        kv["deltas"] = *deltas_csv;
        kv["theta0"] = lsl::format_full(*theta0);
        auto os = std::ofstream(resolve_out(*out));
        if (!os) throw lsl::config_error("cannot open output file: " + resolve_out(*out));
        os << "# " << config_echo("escape", kv) << "\n";
        os << "delta,t,norm,diff\n";
        for (const auto& run : esc.runs)
            for (std::size_t k = 0; k < run.t.size(); ++k)
                os << lsl::format_full(run.delta) << ',' << lsl::format_full(run.t[k]) << ','
                   << lsl::format_full(run.norm[k]) << ','
                   << (k < run.diff.size() ? lsl::format_full(run.diff[k]) : std::string())
                   << "\n";

        json j;
        j["theta0"] = *theta0;
        j["slope"] = esc.slope;
        j["intercept"] = esc.intercept;
        j["fit_rms"] = esc.fit_rms;
        j["inverse_rate"] = esc.inverse_rate;
        j["mu0"] = *mode.mu0;
        json runs = json::array();
        for (const auto& run : esc.runs)
            runs.push_back({{"delta", run.delta},
                            {"t_escape", run.t_escape},
                            {"status", run.status},
                            {"t_predicted", lsl::escape_time(run.delta, *theta0, *mode.mu0)}});
        j["runs"] = runs;
        j["correction_ratio"] = esc.correction_ratio;
        // Threshold sensitivity: refit using lower thresholds crossed by the
        // same trajectories.
        json sens = json::object();
        for (double frac : {1.0, 1.0 / 3.1622776601683795, 0.1}) {
            const double th = *theta0 * frac;
            std::vector<double> xs, ts;
            for (const auto& run : esc.runs) {
                for (std::size_t k = 1; k < run.t.size(); ++k) {
                    if (run.norm[k] >= th && run.norm[k - 1] < th && run.norm[k - 1] > 0.0) {
                        const double w = (std::log(th) - std::log(run.norm[k - 1])) /
                                         (std::log(run.norm[k]) - std::log(run.norm[k - 1]));
                        xs.push_back(std::log(1.0 / run.delta));
                        ts.push_back(run.t[k - 1] + w * (run.t[k] - run.t[k - 1]));
                        break;
                    }
                }
            }
            if (xs.size() >= 2)
                sens[lsl::format_full(th)] = lsl::fit_linear(xs, ts).slope;
        }
        j["slope_by_threshold"] = sens;
        lsl::write_json(resolve_out(*out_fit), j);
        std::cout << "escape: slope=" << lsl::format_full(esc.slope)
                  << " 1/sqrt(mu0)=" << lsl::format_full(esc.inverse_rate) << " -> "
                  << resolve_out(*out_fit) << "\n";
    });
    return 0;
}

int cmd_verify(const json& cfg, CLI::App& app, int, char**) {
    auto tol_scale = std::make_shared<double>(1.0);
    auto full = std::make_shared<bool>(false);
    auto jobs = std::make_shared<int>(2);
    from_config(cfg, "tol_scale", *tol_scale);
    from_config(cfg, "full", *full);
    from_config(cfg, "jobs", *jobs);
    app.add_option("--tol-scale", *tol_scale, "scale every tolerance band (fault injection)");
    app.add_flag("--full", *full, "run at full acceptance scale instead of reduced scale");
    app.add_option("--jobs", *jobs, "parallel workers for sweeps");
    app.callback([tol_scale, full, jobs] {
        lsl::verification::VerifyConfig vc;
        vc.tol_scale = *tol_scale;
        vc.full_scale = *full;
        vc.jobs = *jobs;
        const auto results = lsl::verification::run_all(vc);
        lsl::verification::print_table(std::cout, results);
        if (!lsl::verification::all_pass(results)) std::exit(1);
    });
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"liquid Lane-Emden star stability toolkit"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (flags override its values)");
    std::string out_dir_flag;
    app.add_option("--out-dir", out_dir_flag, "output root (default: env LSL_OUT_DIR)");

    try {
        const json cfg = load_config_json(argc, argv);
        if (const char* env = std::getenv("LSL_OUT_DIR")) out_root = env;
        for (int i = 1; i + 1 < argc; ++i)
            if (std::string(argv[i]) == "--out-dir") out_root = argv[i + 1];

        auto sub = [&](const char* name, const char* desc) {
            CLI::App* sc = app.add_subcommand(name, desc);
            sc->fallthrough();  // --config / --out-dir may follow the subcommand
            return sc;
        };
        cmd_steady(cfg, *sub("steady", "solve a liquid equilibrium"), argc, argv);
        cmd_gaseous(cfg, *sub("gaseous", "solve the gaseous reference state"), argc, argv);
        cmd_modes(cfg, *sub("modes", "lowest growth mode of an equilibrium"), argc, argv);
        cmd_rayleigh(cfg, *sub("rayleigh", "Rayleigh quotients and exponent windows"), argc, argv);
        cmd_scaling(cfg, *sub("scaling", "kappa sweep and regime verdict"), argc, argv);
        cmd_evolve(cfg, *sub("evolve", "nonlinear free-boundary evolution"), argc, argv);
        cmd_linear(cfg, *sub("linear", "linearized evolution of the growing mode"), argc, argv);
        cmd_escape(cfg, *sub("escape", "escape-time experiment over seed sizes"), argc, argv);
        cmd_verify(cfg, *sub("verify", "run the verification suite"), argc, argv);

        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const lsl::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const lsl::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
