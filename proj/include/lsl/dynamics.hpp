#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lsl/errors.hpp"
#include "lsl/numerics.hpp"
#include "lsl/scaling.hpp"
#include "lsl/spectral.hpp"
#include "lsl/steady_state.hpp"
#include "lsl/tridiagonal.hpp"

namespace lsl {

// ---------------------------------------------------------------------------
// Nonlinear free-boundary evolution in Lagrangian labels
// ---------------------------------------------------------------------------

/// Flow-map snapshot: nodes carry positions eta(y_i, t) and velocities;
/// cells carry the reference density rho0 = f0 J0 (the equilibrium gauge),
/// so cell masses are constant in time by construction.
struct LagrangianState {
    std::vector<double> y;          // Lagrangian labels (profile grid nodes)
    std::vector<double> eta;        // current radii, eta[0] = 0
    std::vector<double> vel;        // radial velocities, vel[0] = 0
    std::vector<double> cell_rho0;  // per-cell reference density, length n-1
    double time = 0.0;
};

struct EvolveOptions {
    double cfl = 0.4;
    double step_safety = 0.85;      // headroom between the chosen dt and the CFL recheck
    bool artificial_viscosity = false;
    double viscosity_coeff = 2.0;   // von Neumann-Richtmyer quadratic coefficient
    int boundary_order = 2;         // 2: one-sided quadratic at the surface, 1: half cell
    double stop_norm = 0.0;         // terminate when the perturbation norm reaches this (0: off)
    bool collect_snapshots = false;
    // Integrate in deviation form: subtract the frozen acceleration residual
    // of the discrete equilibrium, making eta = y an exact fixed point.  The
    // subtracted field is O(h^2), so the scheme stays consistent; seeded-mode
    // experiments need this so amplitudes far below the truncation error are
    // not drowned by the equilibrium's own wobble.
    bool balance_equilibrium = false;
    // Upper bound on dt instead of the state-derived CFL bound (0: auto).
    // Runs meant to be compared sample-by-sample must share the time step.
    double dt_bound = 0.0;
};

struct Diagnostics {
    std::vector<double> time;
    std::vector<double> norm;
    std::vector<double> energy;
    std::vector<double> boundary_radius;
    std::vector<double> max_jacobian_dev;
    std::string status = "completed";
    std::vector<LagrangianState> snapshots;  // only when requested
};

inline LagrangianState init_equilibrium(const StarProfile& profile) {
    // No profile re-validation here: synthetic test profiles (constant
    // density balls) are legitimate dynamics inputs.
    if (profile.grid.size() < 5)
        throw config_error("init_equilibrium: need at least 5 nodes");
    LagrangianState s;
    s.y = profile.grid.nodes;
    s.eta = s.y;
    s.vel.assign(s.y.size(), 0.0);
    s.cell_rho0.resize(s.y.size() - 1);
    for (std::size_t c = 0; c + 1 < s.y.size(); ++c) {
        const double vol =
            (4.0 * pi / 3.0) * (std::pow(s.y[c + 1], 3) - std::pow(s.y[c], 3));
        s.cell_rho0[c] = (profile.mass[c + 1] - profile.mass[c]) / vol;
    }
    s.time = 0.0;
    return s;
}

/// Renormalized cell Jacobians J = (eta^3 difference)/(y^3 difference);
/// exactly 1 at equilibrium and exactly (1+eps)^3 under uniform dilation.
inline std::vector<double> cell_jacobians(const LagrangianState& s) {
    std::vector<double> j(s.y.size() - 1);
    for (std::size_t c = 0; c + 1 < s.y.size(); ++c) {
        const double dv = std::pow(s.eta[c + 1], 3) - std::pow(s.eta[c], 3);
        const double dv0 = std::pow(s.y[c + 1], 3) - std::pow(s.y[c], 3);
        j[c] = dv / dv0;
    }
    return j;
}

namespace detail {

inline void check_monotone(const LagrangianState& s) {
    if (s.eta[0] != 0.0)
        throw numerical_error("dynamics: center node displaced at t = " +
                              std::to_string(s.time));
    for (std::size_t i = 1; i < s.eta.size(); ++i)
        if (!(s.eta[i] > s.eta[i - 1]))
            throw numerical_error("dynamics: cell inversion (flow map not increasing) at t = " +
                                  std::to_string(s.time));
}

inline void cell_fields(const LagrangianState& s, const EquationOfState& eos,
                        const EvolveOptions& opts, std::vector<double>& f,
                        std::vector<double>& p) {
    const std::size_t cells = s.y.size() - 1;
    f.resize(cells);
    p.resize(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        const double dv = std::pow(s.eta[c + 1], 3) - std::pow(s.eta[c], 3);
        const double dv0 = std::pow(s.y[c + 1], 3) - std::pow(s.y[c], 3);
        f[c] = s.cell_rho0[c] * dv0 / dv;
        p[c] = eos.pressure(f[c]);
        if (opts.artificial_viscosity) {
            const double du = s.vel[c + 1] - s.vel[c];
            if (du < 0.0)
                p[c] += opts.viscosity_coeff * opts.viscosity_coeff * f[c] * du * du;
        }
    }
}

// Interpolate per-cell densities to nodes (arithmetic mean of the adjacent
// cells, one-sided at the ends).  Used with identical stencils for the state
// and its reference so the equilibrium difference vanishes identically.
inline std::vector<double> cells_to_nodes(const std::vector<double>& cell_vals) {
    const std::size_t n = cell_vals.size() + 1;
    std::vector<double> out(n);
    out[0] = cell_vals.front();
    out[n - 1] = cell_vals.back();
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = 0.5 * (cell_vals[i - 1] + cell_vals[i]);
    return out;
}

inline std::vector<double> node_densities(const LagrangianState& s) {
    const std::vector<double> j = cell_jacobians(s);
    std::vector<double> f(j.size());
    for (std::size_t c = 0; c < j.size(); ++c) f[c] = s.cell_rho0[c] / j[c];
    return cells_to_nodes(f);
}

}  // namespace detail

/// Node accelerations of the semi-discrete momentum equation
///   eta_tt = -m(y)/eta^2 - (eta^2 / (y^2 rho(y))) dP/dy,
/// with gravity from the label-fixed enclosed mass (mass conservation in
/// Lagrangian form makes m(y) time independent) and the pressure gradient
/// from staggered cell pressures.  The surface carries P = 0 exactly; the
/// boundary node closes with a one-sided gradient against that value.
inline std::vector<double> acceleration(const LagrangianState& s, const StarProfile& profile,
                                        const EvolveOptions& opts = {},
                                        const std::vector<double>* balance = nullptr) {
    detail::check_monotone(s);
    const std::size_t n = s.y.size();
    if (n < 5) throw config_error("acceleration: need at least 5 nodes");
    const EquationOfState eos(profile.gamma);
    std::vector<double> f, p;
    detail::cell_fields(s, eos, opts, f, p);

    // Effective cell positions y* with y*^2 = int y^4 / int y^2 over the
    // cell.  A spherical mass average equals the point value at y* for
    // density fields quadratic in y, which is the generic behavior at the
    // regular center; away from the center y* reduces to the midpoint.
    std::vector<double> ystar_sq(n - 1);
    for (std::size_t c = 0; c + 1 < n; ++c) {
        const double a5 = std::pow(s.y[c], 5), b5 = std::pow(s.y[c + 1], 5);
        const double a3 = std::pow(s.y[c], 3), b3 = std::pow(s.y[c + 1], 3);
        ystar_sq[c] = 0.6 * (b5 - a5) / (b3 - a3);
    }

    std::vector<double> a(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double denom = (ystar_sq[i] - ystar_sq[i - 1]) / (2.0 * s.y[i]);
        const double grad = (p[i] - p[i - 1]) / denom;
        const double geom = s.eta[i] * s.eta[i] / (s.y[i] * s.y[i] * profile.rho[i]);
        a[i] = -profile.mass[i] / (s.eta[i] * s.eta[i]) - geom * grad;
    }
    // Boundary node: the surface pressure is exactly zero.  The one-sided fit
    // against that anchor would amplify the O(h^2) gap between cell-average
    // and cell-center pressure to O(h), so the two cell values are shifted to
    // point values first (spherical mass average vs midpoint).
    {
        const std::size_t i = n - 1;
        const double h = s.y[i] - s.y[i - 1];
        const double d1 = 0.5 * h;
        const double d2 = s.y[i] - 0.5 * (s.y[i - 2] + s.y[i - 1]);
        double p1 = p[i - 1];
        double p2 = p[i - 2];
        double grad;
        if (opts.boundary_order >= 2) {
            const double fp = (f[i - 1] - f[i - 2]) / h;
            const double fpp = (f[i - 1] - 2.0 * f[i - 2] + f[i - 3]) / (h * h);
            const double yc1 = s.y[i] - d1;
            const double yc2 = s.y[i] - d2;
            p1 -= eos.sound_speed_sq(f[i - 1]) * h * h * (fp / (6.0 * yc1) + fpp / 24.0);
            p2 -= eos.sound_speed_sq(f[i - 2]) * h * h * (fp / (6.0 * yc2) + fpp / 24.0);
            grad = (p2 * d1 * d1 - p1 * d2 * d2) / (d1 * d2 * (d2 - d1));
        } else {
            grad = -p1 / d1;
        }
        const double geom = s.eta[i] * s.eta[i] / (s.y[i] * s.y[i] * profile.rho[i]);
        a[i] = -profile.mass[i] / (s.eta[i] * s.eta[i]) - geom * grad;
    }
    if (balance != nullptr) {
        if (balance->size() != n) throw config_error("acceleration: balance length mismatch");
        for (std::size_t i = 0; i < n; ++i) a[i] -= (*balance)[i];
    }
    return a;
}

/// Largest stable time step scale: min over cells of width / sound speed.
inline double acoustic_dt(const LagrangianState& s, const EquationOfState& eos) {
    const std::vector<double> j = cell_jacobians(s);
    double dt = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < j.size(); ++c) {
        const double f = s.cell_rho0[c] / j[c];
        dt = std::min(dt, (s.eta[c + 1] - s.eta[c]) / eos.sound_speed(f));
    }
    return dt;
}

/// One kick-drift-kick leapfrog step.  Rejects steps beyond the acoustic CFL
/// bound; raises on cell inversion.
inline LagrangianState step(const LagrangianState& s, const StarProfile& profile, double dt,
                            const EvolveOptions& opts = {},
                            const std::vector<double>* balance = nullptr) {
    if (dt < 0.0) throw config_error("step: dt must be nonnegative");
    if (dt == 0.0) return s;
    const EquationOfState eos(profile.gamma);
    if (dt > opts.cfl * acoustic_dt(s, eos) * (1.0 + 1e-12))
        throw numerical_error("step: CFL violation at t = " + std::to_string(s.time));

    LagrangianState out = s;
    const std::vector<double> a0 = acceleration(s, profile, opts, balance);
    for (std::size_t i = 1; i < out.vel.size(); ++i) out.vel[i] += 0.5 * dt * a0[i];
    for (std::size_t i = 1; i < out.eta.size(); ++i) out.eta[i] += dt * out.vel[i];
    out.time = s.time + dt;
    const std::vector<double> a1 = acceleration(out, profile, opts, balance);
    for (std::size_t i = 1; i < out.vel.size(); ++i) out.vel[i] += 0.5 * dt * a1[i];
    out.vel[0] = 0.0;
    out.eta[0] = 0.0;
    return out;
}

/// Frozen acceleration residual of the discrete equilibrium, subtracted by
/// runs in deviation form.
inline std::vector<double> equilibrium_balance(const StarProfile& profile,
                                               const EvolveOptions& opts = {}) {
    EvolveOptions raw = opts;
    raw.balance_equilibrium = false;
    raw.artificial_viscosity = false;
    return acceleration(init_equilibrium(profile), profile, raw);
}

/// L2-type size of the deviation from the initial equilibrium, measured at
/// fixed Lagrangian label:
///   sqrt( 4 pi int [v^2 + (f - rho_ref)^2] eta^2 deta/dy dy ),
/// with the nodal densities of the state and of the reference built by the
/// same cell-to-node stencil, so the value is exactly zero at equilibrium.
inline double perturbation_norm(const LagrangianState& s, const StarProfile& profile) {
    (void)profile;
    const std::size_t n = s.y.size();
    const std::vector<double> f = detail::node_densities(s);
    const std::vector<double> ref = detail::cells_to_nodes(s.cell_rho0);
    std::vector<double> integrand(n);
    for (std::size_t i = 0; i < n; ++i) {
        double deta;
        if (i == 0)
            deta = (s.eta[1] - s.eta[0]) / (s.y[1] - s.y[0]);
        else if (i + 1 == n)
            deta = (s.eta[n - 1] - s.eta[n - 2]) / (s.y[n - 1] - s.y[n - 2]);
        else
            deta = (s.eta[i + 1] - s.eta[i - 1]) / (s.y[i + 1] - s.y[i - 1]);
        const double drho = f[i] - ref[i];
        integrand[i] = (s.vel[i] * s.vel[i] + drho * drho) * s.eta[i] * s.eta[i] * deta;
    }
    return std::sqrt(4.0 * pi * trapezoid(s.y, integrand));
}

/// Norm of the difference of two states sharing the same labels, with both
/// density fields pushed through the identical cell-to-node map and the
/// equilibrium metric y^2 dy.
inline double state_diff_norm(const LagrangianState& a, const LagrangianState& b,
                              const StarProfile& profile) {
    (void)profile;
    if (a.y.size() != b.y.size())
        throw config_error("state_diff_norm: states live on different grids");
    const std::size_t n = a.y.size();
    const std::vector<double> fa = detail::node_densities(a);
    const std::vector<double> fb = detail::node_densities(b);
    std::vector<double> integrand(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double dv = a.vel[i] - b.vel[i];
        const double dr = fa[i] - fb[i];
        integrand[i] = (dv * dv + dr * dr) * a.y[i] * a.y[i];
    }
    return std::sqrt(4.0 * pi * trapezoid(a.y, integrand));
}

/// Physical energy: kinetic + internal + gravitational.  Each piece is the
/// discrete potential whose exact gradient is the corresponding force term,
/// so leapfrog conserves the total to O(dt^2) without secular drift.
inline double total_energy(const LagrangianState& s, const StarProfile& profile) {
    const EquationOfState eos(profile.gamma);
    const std::size_t n = s.y.size();
    double kinetic = 0.0, internal = 0.0, grav = 0.0;
    const std::vector<double> j = cell_jacobians(s);
    for (std::size_t c = 0; c + 1 < n; ++c) {
        const double dm =
            s.cell_rho0[c] * (4.0 * pi / 3.0) * (std::pow(s.y[c + 1], 3) - std::pow(s.y[c], 3));
        internal += dm * eos.internal_energy(s.cell_rho0[c] / j[c]);
    }
    for (std::size_t i = 1; i < n; ++i) {
        const double dy = i + 1 < n ? 0.5 * (s.y[i + 1] - s.y[i - 1])
                                    : 0.5 * (s.y[i] - s.y[i - 1]);
        const double mn = 4.0 * pi * profile.rho[i] * s.y[i] * s.y[i] * dy;
        kinetic += 0.5 * mn * s.vel[i] * s.vel[i];
        grav -= mn * profile.mass[i] / s.eta[i];
    }
    return kinetic + internal + grav;
}

/// Physical perturbation norm of the growing-branch seed shape at unit
/// amplitude.  Seeds are rescaled by this so a size-delta perturbation has
/// perturbation norm delta at t = 0 (unit-norm initial data), which makes the
/// escape threshold theta0 directly comparable with delta.
inline double mode_seed_norm(const StarProfile& profile, const ModeResult& mode);

/// Seed the pure growing branch of an unstable mode:
///   eta = y (1 + delta chi_hat),  v = y delta sqrt(mu0) chi_hat,
/// with chi_hat the eigenfunction rescaled to a unit-norm seed shape.
inline LagrangianState seed_mode(const StarProfile& profile, const ModeResult& mode,
                                 double delta) {
    if (!mode.growth_rate.has_value())
        throw config_error("seed_mode: mode is not unstable (no growth rate)");
    if (!(delta >= 0.0)) throw config_error("seed_mode: delta must be nonnegative");
    if (mode.chi.size() != profile.grid.size())
        throw config_error("seed_mode: mode and profile grids differ");
    LagrangianState s = init_equilibrium(profile);
    const double rate = *mode.growth_rate;
    const double amp = delta / mode_seed_norm(profile, mode);
    for (std::size_t i = 0; i < s.y.size(); ++i) {
        s.eta[i] = s.y[i] * (1.0 + amp * mode.chi[i]);
        s.vel[i] = s.y[i] * amp * rate * mode.chi[i];
    }
    for (std::size_t i = 1; i < s.eta.size(); ++i)
        if (!(s.eta[i] > s.eta[i - 1]))
            throw config_error("seed_mode: delta too large, flow map not monotone");
    return s;
}

/// Evolve with diagnostics sampled every sample_dt.  The step is fixed from
/// the initial acoustic CFL bound and re-checked every step.  Cell inversion
/// flags the run and returns partial diagnostics instead of throwing.
inline Diagnostics evolve(LagrangianState state, const StarProfile& profile, double t_end,
                          double sample_dt, const EvolveOptions& opts = {}) {
    if (!(t_end > state.time)) throw config_error("evolve: t_end must exceed state.time");
    if (!(sample_dt > 0.0)) throw config_error("evolve: sample_dt must be positive");
    const EquationOfState eos(profile.gamma);
    const double bound0 = opts.dt_bound > 0.0
                              ? opts.dt_bound
                              : opts.step_safety * opts.cfl * acoustic_dt(state, eos);
    const int steps_per_sample = std::max(1, static_cast<int>(std::ceil(sample_dt / bound0)));
    const double dt = sample_dt / steps_per_sample;
    const long n_samples =
        static_cast<long>(std::ceil((t_end - state.time) / sample_dt - 1e-9));

    std::vector<double> balance;
    if (opts.balance_equilibrium) balance = equilibrium_balance(profile, opts);
    const std::vector<double>* bal = opts.balance_equilibrium ? &balance : nullptr;

    Diagnostics d;
    auto record = [&](const LagrangianState& s) {
        d.time.push_back(s.time);
        d.norm.push_back(perturbation_norm(s, profile));
        d.energy.push_back(total_energy(s, profile));
        d.boundary_radius.push_back(s.eta.back());
        const std::vector<double> j = cell_jacobians(s);
        double dev = 0.0;
        for (double v : j) dev = std::max(dev, std::abs(v - 1.0));
        d.max_jacobian_dev.push_back(dev);
        if (opts.collect_snapshots) d.snapshots.push_back(s);
    };
    record(state);
    for (long k = 0; k < n_samples; ++k) {
        try {
            for (int i = 0; i < steps_per_sample; ++i)
                state = step(state, profile, dt, opts, bal);
        } catch (const numerical_error& e) {
            d.status = std::string("flagged: ") + e.what();
            return d;
        }
        record(state);
        if (opts.stop_norm > 0.0 && d.norm.back() >= opts.stop_norm) {
            d.status = "norm_threshold_reached";
            return d;
        }
    }
    return d;
}

// ---------------------------------------------------------------------------
// Linearized evolution
// ---------------------------------------------------------------------------

/// State of the linearized radial perturbation zeta = eta/y - 1, its time
/// derivative, and the slaved logarithmic density perturbation sigma.
struct LinearState {
    std::vector<double> zeta;
    std::vector<double> zeta_t;
    std::vector<double> sigma;
    double time = 0.0;
};

/// 3 zeta + y dzeta/dy: the linearized log-Jacobian (centered differences,
/// one-sided at the ends).
inline std::vector<double> radial_divergence(const RadialGrid& grid,
                                             const std::vector<double>& zeta) {
    const std::size_t n = grid.size();
    if (zeta.size() != n) throw config_error("radial_divergence: length mismatch");
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        double dz;
        if (i == 0)
            dz = (zeta[1] - zeta[0]) / (grid.nodes[1] - grid.nodes[0]);
        else if (i + 1 == n)
            dz = (zeta[n - 1] - zeta[n - 2]) / (grid.nodes[n - 1] - grid.nodes[n - 2]);
        else
            dz = (zeta[i + 1] - zeta[i - 1]) / (grid.nodes[i + 1] - grid.nodes[i - 1]);
        s[i] = 3.0 * zeta[i] + grid.nodes[i] * dz;
    }
    return s;
}

/// Initial data on the pure growing branch of an unstable mode, with sigma
/// consistent with linearized mass conservation.  amplitude = 1 gives the
/// unit-norm seed shape used by seed_mode, so the nonlinear seed at size
/// delta equals this state lifted at delta.
inline LinearState linear_state_from_mode(const StarProfile& profile, const ModeResult& mode,
                                          double amplitude = 1.0) {
    if (!mode.growth_rate.has_value())
        throw config_error("linear_state_from_mode: mode is not unstable");
    if (mode.chi.size() != profile.grid.size())
        throw config_error("linear_state_from_mode: mode and profile grids differ");
    LinearState s;
    s.zeta.resize(mode.chi.size());
    s.zeta_t.resize(mode.chi.size());
    const double rate = *mode.growth_rate;
    const double amp = amplitude / mode_seed_norm(profile, mode);
    for (std::size_t i = 0; i < mode.chi.size(); ++i) {
        s.zeta[i] = amp * mode.chi[i];
        s.zeta_t[i] = amp * rate * mode.chi[i];
    }
    const std::vector<double> div = radial_divergence(profile.grid, s.zeta);
    s.sigma.resize(div.size());
    for (std::size_t i = 0; i < div.size(); ++i) s.sigma[i] = -div[i];
    return s;
}

/// Perturbation norm of a linear state against the equilibrium metric:
/// v = y zeta_t and the density perturbation rho sigma.
inline double linear_perturbation_norm(const StarProfile& profile, const LinearState& s) {
    const std::size_t n = profile.grid.size();
    std::vector<double> integrand(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double y = profile.grid.nodes[i];
        const double v = y * s.zeta_t[i];
        const double dr = profile.rho[i] * s.sigma[i];
        integrand[i] = (v * v + dr * dr) * y * y;
    }
    return std::sqrt(4.0 * pi * trapezoid(profile.grid.nodes, integrand));
}

inline double mode_seed_norm(const StarProfile& profile, const ModeResult& mode) {
    LinearState raw;
    raw.zeta = mode.chi;
    raw.zeta_t.resize(mode.chi.size());
    const double rate = mode.growth_rate.value_or(0.0);
    for (std::size_t i = 0; i < mode.chi.size(); ++i) raw.zeta_t[i] = rate * mode.chi[i];
    const std::vector<double> div = radial_divergence(profile.grid, raw.zeta);
    raw.sigma.resize(div.size());
    for (std::size_t i = 0; i < div.size(); ++i) raw.sigma[i] = -div[i];
    const double nrm = linear_perturbation_norm(profile, raw);
    if (!(nrm > 0.0)) throw numerical_error("mode_seed_norm: degenerate mode shape");
    return nrm;
}

/// Nonlinear state whose flow map is the linear prediction at amplitude
/// delta: eta = y (1 + delta zeta), v = delta y zeta_t.
inline LagrangianState lift_linear_state(const StarProfile& profile, const LinearState& lin,
                                         double delta) {
    LagrangianState s = init_equilibrium(profile);
    for (std::size_t i = 0; i < s.y.size(); ++i) {
        s.eta[i] = s.y[i] * (1.0 + delta * lin.zeta[i]);
        s.vel[i] = delta * s.y[i] * lin.zeta_t[i];
    }
    s.time = lin.time;
    return s;
}

struct LinearEvolveOptions {
    double cfl = 0.4;
    bool collect_snapshots = false;
    double robin_rel_tol = 0.25;  // admission check on the initial boundary relation
};

struct LinearEvolveResult {
    Diagnostics diag;
    LinearState final_state;
    std::vector<LinearState> snapshots;
};

/// Leapfrog on the weak-form semi-discretization M zeta_tt = -A zeta of the
/// linearized system, using the same pencil as the eigensolver; the boundary
/// relation 3 zeta(R) + R zeta'(R) = 0 is natural in this form.  sigma is
/// slaved through the linearized log-Jacobian; the quadratic form
/// zeta_t^T M zeta_t + zeta^T A zeta is conserved to O(dt^2).
inline LinearEvolveResult evolve_linearized(const StarProfile& profile, const LinearState& initial,
                                            double t_end, double sample_dt,
                                            const LinearEvolveOptions& opts = {}) {
    if (!(t_end > initial.time)) throw config_error("evolve_linearized: t_end must exceed time");
    if (!(sample_dt > 0.0)) throw config_error("evolve_linearized: sample_dt must be positive");
    const std::size_t n = profile.grid.size();
    if (initial.zeta.size() != n || initial.zeta_t.size() != n || initial.sigma.size() != n)
        throw config_error("evolve_linearized: state length mismatch");

    // Boundary relation admission check (one-sided difference).
    {
        double scale = 0.0;
        for (double z : initial.zeta) scale = std::max(scale, std::abs(z));
        if (scale > 0.0) {
            const double h = profile.grid.nodes[n - 1] - profile.grid.nodes[n - 2];
            const double res = 3.0 * initial.zeta[n - 1] +
                               profile.radius * (initial.zeta[n - 1] - initial.zeta[n - 2]) / h;
            if (std::abs(res) > opts.robin_rel_tol * 3.0 * scale)
                throw config_error("evolve_linearized: initial data violate the boundary "
                                   "relation 3 zeta(R) + R zeta'(R) = 0");
        }
    }

    const AssembledPencil pencil = assemble(profile);
    const LdlFactorization mfac = ldl_inertia(pencil.mass);
    if (mfac.zero_pivot || mfac.negative_pivots > 0)
        throw numerical_error("evolve_linearized: weight matrix not positive definite");
    auto accel = [&](const std::vector<double>& z) {
        std::vector<double> az = mat_vec(pencil.stiffness, z);
        for (double& v : az) v = -v;
        return ldl_solve(mfac, az);
    };

    // Stable step: power iteration for the extreme pencil frequency, capped
    // by the physical acoustic bound.
    double lam_max = 0.0;
    {
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.3 * static_cast<double>(i % 3);
        for (int it = 0; it < 50; ++it) {
            std::vector<double> w = ldl_solve(mfac, mat_vec(pencil.stiffness, x));
            const double nrm = norm2(w);
            if (!(nrm > 0.0)) break;
            for (double& v : w) v /= nrm;
            x = std::move(w);
        }
        const double num = dot(x, mat_vec(pencil.stiffness, x));
        const double den = dot(x, mat_vec(pencil.mass, x));
        lam_max = std::abs(num / den);
    }
    const EquationOfState eos(profile.gamma);
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < n; ++i)
        bound = std::min(bound, (profile.grid.nodes[i] - profile.grid.nodes[i - 1]) /
                                    eos.sound_speed(profile.rho[i - 1]));
    double dt0 = opts.cfl * bound;
    if (lam_max > 0.0) dt0 = std::min(dt0, 1.8 / std::sqrt(lam_max));
    const int steps_per_sample = std::max(1, static_cast<int>(std::ceil(sample_dt / dt0)));
    const double dt = sample_dt / steps_per_sample;
    const long n_samples =
        static_cast<long>(std::ceil((t_end - initial.time) / sample_dt - 1e-9));

    LinearState s = initial;
    // sigma(t) = offset - (3 zeta + y zeta') with the offset fixed by the
    // initial data.
    std::vector<double> offset = radial_divergence(profile.grid, s.zeta);
    for (std::size_t i = 0; i < n; ++i) offset[i] += s.sigma[i];

    LinearEvolveResult out;
    auto record = [&](const LinearState& st) {
        out.diag.time.push_back(st.time);
        out.diag.norm.push_back(linear_perturbation_norm(profile, st));
        const double ekin = dot(st.zeta_t, mat_vec(pencil.mass, st.zeta_t));
        const double epot = dot(st.zeta, mat_vec(pencil.stiffness, st.zeta));
        out.diag.energy.push_back(ekin + epot);
        out.diag.boundary_radius.push_back(profile.radius * (1.0 + st.zeta.back()));
        const std::vector<double> div = radial_divergence(profile.grid, st.zeta);
        double dev = 0.0;
        for (double v : div) dev = std::max(dev, std::abs(v));
        out.diag.max_jacobian_dev.push_back(dev);
        if (opts.collect_snapshots) out.snapshots.push_back(st);
    };
    auto refresh_sigma = [&](LinearState& st) {
        const std::vector<double> div = radial_divergence(profile.grid, st.zeta);
        for (std::size_t i = 0; i < n; ++i) st.sigma[i] = offset[i] - div[i];
    };
    refresh_sigma(s);
    record(s);
    std::vector<double> acc = accel(s.zeta);
    for (long k = 0; k < n_samples; ++k) {
        for (int i = 0; i < steps_per_sample; ++i) {
            for (std::size_t q = 0; q < n; ++q) s.zeta_t[q] += 0.5 * dt * acc[q];
            for (std::size_t q = 0; q < n; ++q) s.zeta[q] += dt * s.zeta_t[q];
            acc = accel(s.zeta);
            for (std::size_t q = 0; q < n; ++q) s.zeta_t[q] += 0.5 * dt * acc[q];
            s.time += dt;
        }
        refresh_sigma(s);
        record(s);
    }
    out.final_state = std::move(s);
    return out;
}

// ---------------------------------------------------------------------------
// Escape-time experiment
// ---------------------------------------------------------------------------

struct EscapeRun {
    double delta = 0.0;
    double t_escape = std::numeric_limits<double>::quiet_NaN();
    std::string status = "ok";
    std::vector<double> t;     // sample times
    std::vector<double> norm;  // nonlinear perturbation norm
    std::vector<double> diff;  // || nonlinear - delta * linear || at fixed label
};

/// Scale the deviation of a state from equilibrium labels by a constant
/// factor (used to realize the linear trajectory from a small-amplitude run).
inline LagrangianState rescale_deviation(const LagrangianState& ref, double factor) {
    LagrangianState out = ref;
    for (std::size_t i = 0; i < ref.y.size(); ++i) {
        out.eta[i] = ref.y[i] + factor * (ref.eta[i] - ref.y[i]);
        out.vel[i] = factor * ref.vel[i];
    }
    return out;
}

struct EscapeOptions {
    EvolveOptions evolve;
    bool balance_equilibrium = true;  // deviation form; see EvolveOptions
    bool measure_correction = true;   // also run half-amplitude references
    double samples_per_efold = 40.0;
    double t_cap_factor = 1.5;  // cap each run at factor * predicted escape time
};

struct EscapeResult {
    std::vector<EscapeRun> runs;
    double slope = 0.0;  // fitted T vs log(1/delta); estimates 1 / sqrt(mu0)
    double intercept = 0.0;
    double fit_rms = 0.0;
    double inverse_rate = 0.0;  // 1 / sqrt(mu0) from the spectral mode
    std::vector<double> correction_ratio;  // median r_i / r_{i+1} for consecutive deltas
};

/// Measure escape times T(delta) = first time the perturbation norm reaches
/// theta0, for a decreasing ladder of seed amplitudes, and compare each
/// nonlinear trajectory against the linear prediction to expose the
/// quadratic correction law.
inline EscapeResult escape_experiment(const StarProfile& profile, const ModeResult& mode,
                                      const std::vector<double>& deltas, double theta0,
                                      const EscapeOptions& opts = {}) {
    if (!mode.growth_rate.has_value())
        throw config_error("escape_experiment: mode is not unstable");
    if (deltas.empty()) throw config_error("escape_experiment: empty delta list");
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] > 0.0) || !(deltas[i] < theta0))
            throw config_error("escape_experiment: need 0 < delta < theta0");
        if (i > 0 && !(deltas[i] < deltas[i - 1]))
            throw config_error("escape_experiment: deltas must be strictly decreasing");
    }
    const double rate = *mode.growth_rate;
    const double mu0 = *mode.mu0;
    const double sample_dt = 1.0 / (rate * opts.samples_per_efold);

    // All runs share one time step so trajectories can be differenced
    // sample by sample.
    EvolveOptions ev_base = opts.evolve;
    ev_base.collect_snapshots = true;
    ev_base.balance_equilibrium = opts.balance_equilibrium;
    if (ev_base.dt_bound <= 0.0) {
        const EquationOfState eos(profile.gamma);
        ev_base.dt_bound = ev_base.step_safety * ev_base.cfl *
                           acoustic_dt(init_equilibrium(profile), eos);
    }

    EscapeResult result;
    result.inverse_rate = 1.0 / rate;
    for (double delta : deltas) {
        EscapeRun run;
        run.delta = delta;
        const double t_cap = opts.t_cap_factor * escape_time(delta, theta0, mu0) + 2.0 / rate;
        EvolveOptions ev = ev_base;
        ev.stop_norm = theta0;
        Diagnostics diag = evolve(seed_mode(profile, mode, delta), profile, t_cap, sample_dt, ev);
        run.t = diag.time;
        run.norm = diag.norm;
        // Linear prediction realized in the same discretization: the
        // half-amplitude trajectory rescaled by two.  Its own quadratic
        // content biases the difference by a factor (1 - 1/2), absorbed into
        // the delta-independent constant of the correction law.
        if (opts.measure_correction) {
            const double t_ref_end = diag.time.back() + 0.5 * sample_dt;
            const Diagnostics ref = evolve(seed_mode(profile, mode, 0.5 * delta), profile,
                                           t_ref_end, sample_dt, ev_base);
            for (std::size_t k = 0; k < diag.snapshots.size() && k < ref.snapshots.size(); ++k)
                run.diff.push_back(state_diff_norm(
                    diag.snapshots[k], rescale_deviation(ref.snapshots[k], 2.0), profile));
        }
        if (diag.status == "norm_threshold_reached") {
            const std::size_t k = diag.norm.size() - 1;
            if (k == 0 || diag.norm[k - 1] <= 0.0) {
                run.t_escape = diag.time[k];
            } else {
                const double l0 = std::log(diag.norm[k - 1]);
                const double l1 = std::log(diag.norm[k]);
                const double w = (std::log(theta0) - l0) / (l1 - l0);
                run.t_escape = diag.time[k - 1] + w * (diag.time[k] - diag.time[k - 1]);
            }
        } else if (diag.status.rfind("flagged", 0) == 0) {
            run.status = diag.status;  // star disrupted before reaching theta0
        } else {
            run.status = "no_escape_within_cap";
        }
        result.runs.push_back(std::move(run));
    }

    std::vector<double> xs, ts;
    for (const auto& run : result.runs)
        if (run.status == "ok") {
            xs.push_back(std::log(1.0 / run.delta));
            ts.push_back(run.t_escape);
        }
    if (xs.size() < 2)
        throw numerical_error("escape_experiment: fewer than 2 runs escaped; cannot fit");
    const LineFit fit = fit_linear(xs, ts);
    result.slope = fit.slope;
    result.intercept = fit.intercept;
    result.fit_rms = fit.residual;

    // Quadratic-correction ratios r(t) = diff / delta^2 between consecutive
    // amplitudes over the shared late-time window.
    for (std::size_t i = 0; i + 1 < result.runs.size(); ++i) {
        const EscapeRun& a = result.runs[i];
        const EscapeRun& b = result.runs[i + 1];
        const std::size_t common = std::min(a.diff.size(), b.diff.size());
        std::vector<double> ratios;
        for (std::size_t k = common / 2; k < common; ++k) {
            const double ra = a.diff[k] / (a.delta * a.delta);
            const double rb = b.diff[k] / (b.delta * b.delta);
            if (rb > 0.0 && ra > 0.0) ratios.push_back(ra / rb);
        }
        if (ratios.empty()) {
            result.correction_ratio.push_back(std::numeric_limits<double>::quiet_NaN());
        } else {
            std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
            result.correction_ratio.push_back(ratios[ratios.size() / 2]);
        }
    }
    return result;
}

}  // namespace lsl
