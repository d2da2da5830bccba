#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lsl/dynamics.hpp"
#include "lsl/scaling.hpp"
#include "lsl/spectral.hpp"
#include "lsl/steady_state.hpp"

namespace lsl::verification {

// Verification suite: every check below pins its tolerance in code.  The
// tol_scale knob exists for fault injection (scaling all tolerance bands by
// zero must produce failures); production runs use 1.

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct CriterionResult {
    std::string id;
    std::string title;
    bool pass = true;
    double seconds = 0.0;
    std::vector<Check> checks;

    CriterionResult() = default;
    CriterionResult(std::string id_, std::string title_)
        : id(std::move(id_)), title(std::move(title_)) {}
};

struct VerifyConfig {
    double tol_scale = 1.0;
    bool full_scale = true;  // acceptance scale; false = reduced scale for `lsl verify`
    int jobs = 1;
};

namespace detail {

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

inline void check(CriterionResult& cr, const std::string& name, bool ok,
                  const std::string& detail) {
    cr.checks.push_back({name, ok, detail});
    cr.pass = cr.pass && ok;
}

inline void check_band(CriterionResult& cr, const std::string& name, double value, double center,
                       double halfwidth, double tol_scale) {
    const bool ok = std::abs(value - center) <= halfwidth * tol_scale;
    check(cr, name, ok,
          fmt(value) + " vs " + fmt(center) + " +- " + fmt(halfwidth * tol_scale));
}

inline void check_le(CriterionResult& cr, const std::string& name, double value, double bound,
                     double tol_scale) {
    const bool ok = value <= bound * tol_scale;
    check(cr, name, ok, fmt(value) + " <= " + fmt(bound * tol_scale));
}

struct SweepCache {
    std::vector<ScalingRecord> case1, case2, case3;
};

inline std::vector<double> ladder(const VerifyConfig& cfg) {
    return kappa_ladder(1e2, 1e5, cfg.full_scale ? 8 : 3);
}

inline SweepOptions sweep_options(const VerifyConfig& cfg) {
    SweepOptions so;
    so.cells_base = cfg.full_scale ? 2048 : 512;
    so.jobs = cfg.jobs;
    return so;
}

}  // namespace detail

// C1: the gamma = 6/5 equilibrium solver against the closed-form profile.
inline CriterionResult criterion_c1(const VerifyConfig& cfg) {
    CriterionResult cr{"C1", "closed-form gamma=6/5 equilibria (profile and radius)"};
    const std::vector<double> kappas =
        cfg.full_scale ? std::vector<double>{2.0, 10.0, 100.0, 1e4} : std::vector<double>{2.0, 100.0, 1e4};
    const std::size_t cells = cfg.full_scale ? 2048 : 512;
    for (double kappa : kappas) {
        const StarProfile p = solve_liquid_star(1.2, kappa, cells);
        const double r_exact = explicit_radius_six_fifths(kappa);
        double worst = 0.0;
        for (std::size_t i = 0; i < p.grid.size(); ++i) {
            const auto ex =
                explicit_profile_six_fifths(kappa, std::min(p.grid.nodes[i], r_exact));
            worst = std::max(worst, std::abs(p.rho[i] - ex.rho) / ex.rho);
        }
        detail::check_le(cr, "rho max rel err (kappa=" + detail::fmt(kappa) + ")", worst, 1e-6,
                         cfg.tol_scale);
        detail::check_le(cr, "radius rel err (kappa=" + detail::fmt(kappa) + ")",
                         std::abs(p.radius - r_exact) / r_exact, 1e-8, cfg.tol_scale);
    }
    return cr;
}

// C2: variational lower-bound property of the computed eigenvalue and the
// eigenpair residual, over a spread of regimes.  Grid sizes are chosen so a
// double-precision eigenvector can represent residuals below the bound.
inline CriterionResult criterion_c2(const VerifyConfig& cfg) {
    CriterionResult cr{"C2", "variational bound and eigenpair residual"};
    struct Cfg {
        double gamma, kappa;
        std::size_t cells;
    };
    std::vector<Cfg> set;
    if (cfg.full_scale) {
        for (double g : {1.1, 1.2, 1.25})
            for (double k : {2.0, 10.0, 100.0}) set.push_back({g, k, 1024});
        set.push_back({1.2, 1e4, 256});
    } else {
        set = {{1.2, 2.0, 512}, {1.2, 100.0, 512}, {1.2, 1e4, 256}};
    }
    std::mt19937 rng(20240817u);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (const auto& c : set) {
        const StarProfile p = solve_liquid_star(c.gamma, c.kappa, c.cells);
        const AssembledPencil pencil = assemble(p);
        const ModeResult mode = lowest_eigenpair(pencil);
        const std::string tag =
            " (gamma=" + detail::fmt(c.gamma) + ", kappa=" + detail::fmt(c.kappa) + ")";
        double min_gap = std::numeric_limits<double>::infinity();
        for (int t = 0; t < 100; ++t) {
            std::vector<double> v(p.grid.size());
            for (double& x : v) x = unit(rng);
            min_gap = std::min(min_gap, rayleigh_quotient(pencil, v) - mode.mu_star);
        }
        std::vector<double> ones(p.grid.size(), 1.0);
        min_gap = std::min(min_gap, rayleigh_quotient(pencil, ones) - mode.mu_star);
        detail::check(cr, "mu* below 100 random quotients and <L1,1>/<1,M1>" + tag, min_gap >= 0.0,
                      "min gap " + detail::fmt(min_gap));
        detail::check_le(cr, "eigen residual" + tag, mode.residual, 1e-8, cfg.tol_scale);
    }
    return cr;
}

// C3: stability transition in central density for gamma = 6/5.
inline CriterionResult criterion_c3(const VerifyConfig& cfg) {
    CriterionResult cr{"C3", "stability transition in kappa (gamma=6/5)"};
    const std::size_t cells = cfg.full_scale ? 1024 : 512;
    const ModeResult low = growth_rate_of(solve_liquid_star(1.2, 2.0, cells));
    const ModeResult high = growth_rate_of(solve_liquid_star(1.2, 1e4, cells / 2));
    detail::check(cr, "kappa=2 stable (mu* > 0)", low.mu_star > 0.0,
                  "mu* = " + detail::fmt(low.mu_star));
    detail::check(cr, "kappa=1e4 unstable (mu* < 0)", high.mu_star < 0.0,
                  "mu* = " + detail::fmt(high.mu_star));
    return cr;
}

// C4: case-1 scaling laws at gamma = 1.25.
inline CriterionResult criterion_c4(const VerifyConfig& cfg, detail::SweepCache& cache) {
    CriterionResult cr{"C4", "case-1 scaling (gamma=1.25): mu0, C1 and <L1,1> exponents"};
    cache.case1 = sweep(1.25, detail::ladder(cfg), detail::sweep_options(cfg));
    const RegimeVerdict v = verify_regime(1.25, cache.case1);
    detail::check_band(cr, "mu0 slope", v.slopes.at("mu0"), 1.0, 0.1, cfg.tol_scale);
    detail::check_band(cr, "C1 slope", v.slopes.at("C1"), 0.625, 0.1, cfg.tol_scale);
    const FormAsymptotics fa = case1_form_asymptotics(1.25, cache.case1);
    detail::check_band(cr, "|<L1,1>| slope", fa.form_slope, 2.5 * 1.25 - 3.0, 0.05,
                       cfg.tol_scale);
    detail::check(cr, "<L1,1> negative at large kappa", fa.form_negative_at_large_kappa, "");
    return cr;
}

// C5: case-2 scaling laws at gamma = 6/5.
inline CriterionResult criterion_c5(const VerifyConfig& cfg, detail::SweepCache& cache) {
    CriterionResult cr{"C5", "case-2 scaling (gamma=6/5): mu0 log-correction and C1"};
    cache.case2 = sweep(1.2, detail::ladder(cfg), detail::sweep_options(cfg));
    const RegimeVerdict v = verify_regime(1.2, cache.case2);
    detail::check_le(cr, "mu0*log(kappa)/kappa variation over top decade",
                     v.slopes.at("mu0_logk_over_k_variation"), 0.25, cfg.tol_scale);
    detail::check_band(cr, "C1 slope", v.slopes.at("C1"), 0.6, 0.1, cfg.tol_scale);
    double worst = 0.0;
    for (const auto& r : cache.case2) {
        if (!r.ok()) continue;
        const double predicted = 1.5 / std::sqrt(pi) * std::pow(r.kappa, -0.4);
        worst = std::max(worst, std::abs(r.C1_argmax_radius - predicted) / predicted);
    }
    detail::check_le(cr, "C1 maximizer radius vs (3/(2 sqrt(pi))) kappa^{-2/5}", worst, 0.02,
                     cfg.tol_scale);
    return cr;
}

// C6: case-3 scaling at gamma = 1.1 plus the plateau-power witness.
inline CriterionResult criterion_c6(const VerifyConfig& cfg, detail::SweepCache& cache) {
    CriterionResult cr{"C6", "case-3 scaling (gamma=1.1): exponents and test-function witness"};
    cache.case3 = sweep(1.1, detail::ladder(cfg), detail::sweep_options(cfg));
    const RegimeVerdict v = verify_regime(1.1, cache.case3);
    detail::check(cr, "mu0 slope >= gamma/2 + 0.1", v.slopes.at("mu0") >= 0.55 + 0.1,
                  "slope " + detail::fmt(v.slopes.at("mu0")));
    detail::check_band(cr, "C1 slope", v.slopes.at("C1"), 0.55, 0.1, cfg.tol_scale);

    const auto window = exponent_window(1.1, 0.0, 0.0);
    detail::check(cr, "exponent window nonempty", window.has_value(), "");
    if (window) {
        const long double lo = 2.0L - 1.0L / 0.9L;
        const long double hi = sqrtl(6.0L - 4.0L / 0.9L);
        detail::check(cr, "window endpoints",
                      std::abs(window->first - static_cast<double>(lo)) <= 1e-12 &&
                          std::abs(window->second - static_cast<double>(hi)) <= 1e-12,
                      "(" + detail::fmt(window->first) + ", " + detail::fmt(window->second) + ")");
        const double a = 0.5 * (window->first + window->second);
        const std::vector<double> kappas =
            cfg.full_scale ? std::vector<double>{1e3, 1e4, 1e5} : std::vector<double>{1e3, 1e4};
        double prev = 0.0;
        bool negative = true, increasing = true;
        for (double kappa : kappas) {
            const StarProfile p = solve_liquid_star(
                1.1, kappa, cells_for_kappa(detail::sweep_options(cfg).cells_base, kappa));
            const double q = plateau_power_quotient(p, 4.0, a);
            negative = negative && q < 0.0;
            const double scaled = std::abs(q) / std::pow(kappa, 0.55);
            increasing = increasing && scaled > prev;
            prev = scaled;
        }
        detail::check(cr, "plateau-power quotient negative", negative, "");
        detail::check(cr, "|quotient| grows beyond kappa^{gamma/2}", increasing, "");
    }
    return cr;
}

// C7: equilibrium preservation of the nonlinear integrator, with 2nd-order
// decay of the deviation under grid refinement.
inline CriterionResult criterion_c7(const VerifyConfig& cfg) {
    CriterionResult cr{"C7", "equilibrium preservation over a sound-crossing time"};
    const std::size_t n_base = cfg.full_scale ? 800 : 400;
    double norms[2];
    double mass_scale = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
        const std::size_t cells = n_base << pass;
        const StarProfile p = solve_liquid_star(1.2, 4.0, cells);
        mass_scale = p.total_mass();
        const double t_sc = sound_crossing_time(p);
        const Diagnostics d = evolve(init_equilibrium(p), p, t_sc, t_sc / 25.0);
        double nmax = 0.0;
        for (double v : d.norm) nmax = std::max(nmax, v);
        norms[pass] = nmax;
    }
    detail::check_le(cr, "perturbation norm / star mass at N=" + std::to_string(n_base),
                     norms[0] / mass_scale, 1e-4, cfg.tol_scale);
    const double order = std::log2(norms[0] / norms[1]);
    detail::check_band(cr, "refinement order", order, 2.0, 0.3, cfg.tol_scale);
    return cr;
}

// C8: measured exponential growth rate of a seeded mode against the
// spectral prediction, in both integrators.
inline CriterionResult criterion_c8(const VerifyConfig& cfg) {
    CriterionResult cr{"C8", "linear growth rate matches sqrt(mu0) in both integrators"};
    const std::size_t cells = cfg.full_scale ? 1024 : 512;
    const StarProfile p = solve_liquid_star(1.2, 1e3, cells);
    const ModeResult mode = growth_rate_of(p);
    const double rate = *mode.growth_rate;
    const double t_end = std::log(2e3) / rate;

    EvolveOptions ev;
    ev.balance_equilibrium = true;
    const Diagnostics d = evolve(seed_mode(p, mode, 1e-6), p, t_end, t_end / 80.0, ev);
    std::vector<double> ts, ln;
    for (std::size_t i = 0; i < d.time.size(); ++i)
        if (d.norm[i] > 1e-5 && d.norm[i] < 1e-3) {
            ts.push_back(d.time[i]);
            ln.push_back(std::log(d.norm[i]));
        }
    const LineFit nl = fit_linear(ts, ln);
    detail::check_le(cr, "nonlinear rate rel dev", std::abs(nl.slope - rate) / rate, 0.02,
                     cfg.tol_scale);

    const LinearEvolveResult lr =
        evolve_linearized(p, linear_state_from_mode(p, mode), 1.2 / rate, 0.025 / rate);
    std::vector<double> lt, lln;
    for (std::size_t i = 0; i < lr.diag.time.size(); ++i) {
        lt.push_back(lr.diag.time[i]);
        lln.push_back(std::log(lr.diag.norm[i]));
    }
    const LineFit lf = fit_linear(lt, lln);
    detail::check_le(cr, "linearized rate rel dev", std::abs(lf.slope - rate) / rate, 0.02,
                     cfg.tol_scale);
    return cr;
}

// C9: escape-time law T(delta) = log(theta0/delta)/sqrt(mu0).
inline CriterionResult criterion_c9(const VerifyConfig& cfg) {
    CriterionResult cr{"C9", "escape-time slope matches 1/sqrt(mu0)"};
    const std::size_t cells = cfg.full_scale ? 1024 : 512;
    const StarProfile p = solve_liquid_star(1.2, 1e3, cells);
    const ModeResult mode = growth_rate_of(p);
    EscapeOptions eo;
    eo.measure_correction = false;
    const EscapeResult esc = escape_experiment(p, mode, {1e-4, 1e-5, 1e-6}, 1e-2, eo);
    for (const auto& run : esc.runs)
        detail::check(cr, "run delta=" + detail::fmt(run.delta) + " escaped",
                      run.status == "ok", run.status);
    detail::check_le(cr, "slope rel dev vs 1/sqrt(mu0)",
                     std::abs(esc.slope - esc.inverse_rate) / esc.inverse_rate, 0.05,
                     cfg.tol_scale);
    return cr;
}

// C10: quadratic smallness of the nonlinear correction (factor-4 drop of the
// deviation from the linear prediction when delta is halved).
inline CriterionResult criterion_c10(const VerifyConfig& cfg) {
    CriterionResult cr{"C10", "nonlinear correction scales as delta^2"};
    const std::size_t cells = cfg.full_scale ? 1024 : 512;
    const StarProfile p = solve_liquid_star(1.2, 1e3, cells);
    const ModeResult mode = growth_rate_of(p);
    const EscapeResult esc = escape_experiment(p, mode, {2e-5, 1e-5}, 1e-2, {});
    const auto& a = esc.runs[0];
    const auto& b = esc.runs[1];
    const std::size_t common = std::min(a.diff.size(), b.diff.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t k = 0; k < common; ++k) {
        ma = std::max(ma, a.diff[k]);
        mb = std::max(mb, b.diff[k]);
    }
    detail::check(cr, "windows overlap", common > 8, std::to_string(common) + " samples");
    detail::check_band(cr, "max-diff drop under delta halving", mb > 0.0 ? ma / mb : 0.0, 4.0,
                       0.5, cfg.tol_scale);
    return cr;
}

// C11: physical energy conservation of the nonlinear integrator, second
// order in dt.
inline CriterionResult criterion_c11(const VerifyConfig& cfg) {
    CriterionResult cr{"C11", "energy conservation, second order in dt"};
    const std::size_t cells = cfg.full_scale ? 800 : 400;
    const StarProfile p = solve_liquid_star(1.2, 4.0, cells);
    const double t_sc = sound_crossing_time(p);
    auto drift_for = [&](double dt_shrink) {
        LagrangianState s = init_equilibrium(p);
        for (std::size_t i = 0; i < s.y.size(); ++i) s.vel[i] = 0.05 * s.y[i];
        EvolveOptions ev;
        // half-cell surface closure: every force term is the exact gradient
        // of its energy, so the drift is purely the O(dt^2) integrator error
        ev.boundary_order = 1;
        const EquationOfState eos(p.gamma);
        ev.dt_bound = dt_shrink * ev.step_safety * ev.cfl * acoustic_dt(s, eos);
        const Diagnostics d = evolve(std::move(s), p, t_sc, t_sc / 25.0, ev);
        double drift = 0.0;
        for (double e : d.energy) drift = std::max(drift, std::abs(e - d.energy.front()));
        return drift / std::abs(d.energy.front());
    };
    const double d1 = drift_for(1.0);
    const double d2 = drift_for(0.5);
    detail::check_le(cr, "relative energy drift over a sound crossing", d1, 1e-5, cfg.tol_scale);
    const double order = std::log2(d1 / d2);
    detail::check(cr, "dt order in [1.5, 2.5]", order >= 1.5 && order <= 2.5,
                  "order " + detail::fmt(order) + " (drift " + detail::fmt(d1) + " -> " +
                      detail::fmt(d2) + ")");
    return cr;
}

// C12: strict positivity of the boundary pressure-gradient margin across all
// sweep profiles (collected by C4-C6).
inline CriterionResult criterion_c12(const VerifyConfig& cfg, const detail::SweepCache& cache) {
    (void)cfg;
    CriterionResult cr{"C12", "boundary pressure-drop margin positive in every sweep"};
    double worst = std::numeric_limits<double>::infinity();
    std::size_t counted = 0;
    for (const auto* recs : {&cache.case1, &cache.case2, &cache.case3})
        for (const auto& r : *recs) {
            if (!r.ok()) continue;
            worst = std::min(worst, r.taylor_margin);
            ++counted;
        }
    detail::check(cr, "all records solved", counted > 0, std::to_string(counted) + " records");
    detail::check(cr, "min margin > 0", worst > 0.0, "min margin " + detail::fmt(worst));
    return cr;
}

inline std::vector<CriterionResult> run_all(const VerifyConfig& cfg) {
    std::vector<CriterionResult> results;
    detail::SweepCache cache;
    using Fn = std::function<CriterionResult()>;
    const std::vector<Fn> steps = {
        [&] { return criterion_c1(cfg); },
        [&] { return criterion_c2(cfg); },
        [&] { return criterion_c3(cfg); },
        [&] { return criterion_c4(cfg, cache); },
        [&] { return criterion_c5(cfg, cache); },
        [&] { return criterion_c6(cfg, cache); },
        [&] { return criterion_c7(cfg); },
        [&] { return criterion_c8(cfg); },
        [&] { return criterion_c9(cfg); },
        [&] { return criterion_c10(cfg); },
        [&] { return criterion_c11(cfg); },
        [&] { return criterion_c12(cfg, cache); },
    };
    for (const auto& fn : steps) {
        const auto start = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = fn();
        } catch (const std::exception& e) {
            r.id = "C" + std::to_string(results.size() + 1);
            r.title = "criterion aborted";
            r.pass = false;
            r.checks.push_back({"exception", false, e.what()});
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        results.push_back(std::move(r));
    }
    return results;
}

inline bool all_pass(const std::vector<CriterionResult>& results) {
    for (const auto& r : results)
        if (!r.pass) return false;
    return true;
}

inline void print_table(std::ostream& os, const std::vector<CriterionResult>& results,
                        bool verbose = true) {
    for (const auto& r : results) {
        os << r.id << (r.id.size() < 3 ? "  " : " ") << (r.pass ? "PASS" : "FAIL") << "  ("
           << detail::fmt(r.seconds) << " s)  " << r.title << "\n";
        if (verbose)
            for (const auto& c : r.checks)
                if (!c.pass || !r.pass)
                    os << "      " << (c.pass ? "ok  " : "FAIL") << "  " << c.name
                       << (c.detail.empty() ? "" : ": " + c.detail) << "\n";
    }
}

}  // namespace lsl::verification
