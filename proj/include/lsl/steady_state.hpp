#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "lsl/eos.hpp"
#include "lsl/errors.hpp"
#include "lsl/grid.hpp"
#include "lsl/numerics.hpp"

namespace lsl {

inline constexpr double pi = 3.14159265358979323846;

/// A liquid Lane-Emden equilibrium: density kappa at the center, density 1 on
/// the vacuum boundary where the pressure rho^gamma - 1 vanishes.
struct StarProfile {
    double gamma = 0.0;
    double kappa = 0.0;   // central density
    double radius = 0.0;  // boundary radius R
    RadialGrid grid;      // nodes on [0, R]
    std::vector<double> rho;   // density samples
    std::vector<double> mass;  // enclosed mass 4*pi*int_0^y s^2 rho ds

    double total_mass() const { return mass.back(); }

    void validate(double boundary_tol = 1e-6) const {
        grid.validate();
        const std::size_t n = grid.size();
        if (rho.size() != n || mass.size() != n)
            throw config_error("StarProfile: sample length mismatch");
        if (rho.front() != kappa) throw config_error("StarProfile: rho[0] must equal kappa");
        for (std::size_t i = 1; i < n; ++i)
            if (!(rho[i] < rho[i - 1]))
                throw config_error("StarProfile: density must be strictly decreasing");
        if (std::abs(rho.back() - 1.0) > boundary_tol)
            throw config_error("StarProfile: boundary density differs from 1");
        if (mass.front() != 0.0) throw config_error("StarProfile: mass[0] must be 0");
        for (std::size_t i = 1; i < n; ++i)
            if (!(mass[i] >= mass[i - 1]))
                throw config_error("StarProfile: mass must be nondecreasing");
    }
};

/// Gaseous reference equilibrium with central density 1, integrated down to a
/// small density floor (the profile has infinite extent for gamma <= 6/5 and
/// compact support above it).
struct GaseousReference {
    double gamma = 0.0;
    double rho_floor = 0.0;
    double radius = 0.0;  // truncation radius where rho = rho_floor
    RadialGrid grid;
    std::vector<double> rho;
    std::vector<double> mass;
};

struct LiquidStarOptions {
    std::size_t cells = 2048;
    double ode_tol = 1e-13;        // relative local error per accepted step
    double event_rel_tol = 1e-12;  // bisection width for the boundary event
    RadialGrid::Spacing spacing = RadialGrid::Spacing::uniform;
    double geometric_ratio = 1.0;  // only used with geometric spacing
    double max_radius_factor = 1e6;
};

namespace detail {

using Vec2 = std::array<double, 2>;  // {rho, m}

// rho' = -rho*m / (y^2 c_s^2(rho)),  m' = 4*pi*y^2*rho.
// Nonpositive trial densities poison the result with NaN so the adaptive
// stepper rejects and halves.
struct StarOde {
    EquationOfState eos;

    Vec2 operator()(double y, const Vec2& s) const {
        const double rho = s[0];
        if (!(rho > 0.0) || !(y > 0.0))
            return {std::numeric_limits<double>::quiet_NaN(),
                    std::numeric_limits<double>::quiet_NaN()};
        const double cs2 = eos.sound_speed_sq(rho);
        return {-rho * s[1] / (y * y * cs2), 4.0 * pi * y * y * rho};
    }
};

// RK4 without finiteness throwing; NaN propagates to the caller.
template <class F>
inline Vec2 rk4_raw(const Vec2& s, F&& f, double y, double h) {
    const Vec2 k1 = f(y, s);
    const Vec2 s2{s[0] + 0.5 * h * k1[0], s[1] + 0.5 * h * k1[1]};
    const Vec2 k2 = f(y + 0.5 * h, s2);
    const Vec2 s3{s[0] + 0.5 * h * k2[0], s[1] + 0.5 * h * k2[1]};
    const Vec2 k3 = f(y + 0.5 * h, s3);
    const Vec2 s4{s[0] + h * k3[0], s[1] + h * k3[1]};
    const Vec2 k4 = f(y + h, s4);
    return {s[0] + (h / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            s[1] + (h / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])};
}

template <class F>
inline Vec2 integrate_fixed(const F& f, double y0, Vec2 s, double y1, int substeps = 8) {
    const double h = (y1 - y0) / substeps;
    if (h == 0.0) return s;
    for (int i = 0; i < substeps; ++i) s = rk4_raw(s, f, y0 + i * h, h);
    if (!std::isfinite(s[0]) || !std::isfinite(s[1]))
        throw numerical_error("integrate_fixed: non-finite state");
    return s;
}

// Step-doubled RK4 with local extrapolation.  Advances (y, s) by one accepted
// step of size at most h_cap and returns the size actually taken; *h_io
// carries the free-running suggestion for the next step (the cap applies to
// this step only, so a small remaining interval does not shrink later steps).
template <class F>
inline double adaptive_step(const F& f, double& y, Vec2& s, double* h_io, double tol,
                            double h_cap) {
    double h = std::min(*h_io, h_cap);
    bool rejected = false;
    for (int tries = 0; tries < 80; ++tries) {
        const Vec2 full = rk4_raw(s, f, y, h);
        const Vec2 half = rk4_raw(s, f, y, 0.5 * h);
        const Vec2 two = rk4_raw(half, f, y + 0.5 * h, 0.5 * h);
        bool finite = std::isfinite(two[0]) && std::isfinite(two[1]) && std::isfinite(full[0]) &&
                      std::isfinite(full[1]);
        double err = 0.0;
        if (finite) {
            for (int i = 0; i < 2; ++i) {
                const double scale =
                    std::max({std::abs(s[i]), std::abs(two[i]), 1e-290});
                err = std::max(err, std::abs(two[i] - full[i]) / (15.0 * scale));
            }
        }
        if (finite && err <= tol) {
            s = {two[0] + (two[0] - full[0]) / 15.0, two[1] + (two[1] - full[1]) / 15.0};
            y += h;
            const double grow =
                err > 0.0 ? std::clamp(0.9 * std::pow(tol / err, 0.2), 0.3, 4.0) : 4.0;
            const double suggest = h * grow;
            *h_io = rejected ? suggest : std::max(*h_io, suggest);
            return h;
        }
        rejected = true;
        h *= finite ? std::clamp(0.9 * std::pow(tol / err, 0.2), 0.1, 0.5) : 0.25;
    }
    throw numerical_error("adaptive_step: step size collapsed");
}

// Taylor expansion of the regular center: rho = rho_c - b y^2 + c4 y^4,
// m = (4pi/3) rho_c y^3 - (4pi/5) b y^5 + (4pi/7) c4 y^7.
struct CenterSeries {
    double rho_c, b, c4;

    CenterSeries(const EquationOfState& eos, double rho_center) : rho_c(rho_center) {
        const double cs2 = eos.sound_speed_sq(rho_c);
        b = (2.0 * pi / 3.0) * rho_c * rho_c / cs2;
        c4 = (rho_c * b / cs2) * (pi / 15.0) * (13.0 - 5.0 * eos.gamma);
    }

    double y_scale() const { return std::sqrt(rho_c / b); }

    double rho(double y) const {
        const double y2 = y * y;
        return rho_c - b * y2 + c4 * y2 * y2;
    }

    double mass(double y) const {
        const double y2 = y * y, y3 = y2 * y;
        return (4.0 * pi / 3.0) * rho_c * y3 - (4.0 * pi / 5.0) * b * y3 * y2 +
               (4.0 * pi / 7.0) * c4 * y3 * y2 * y2;
    }
};

struct CoreSolveResult {
    double radius;  // where rho crosses the threshold
    Vec2 boundary_state;
};

// Integrate outward from the regular center until rho drops to `threshold`,
// locating the crossing by bisection.
inline CoreSolveResult integrate_to_density(const EquationOfState& eos, double rho_center,
                                            double threshold, double ode_tol,
                                            double event_rel_tol, double max_radius_factor) {
    const CenterSeries series(eos, rho_center);
    const double y_start = 3e-3 * series.y_scale();
    const double max_radius = max_radius_factor * series.y_scale();
    const StarOde ode{eos};

    // Threshold may already be crossed inside the series region (kappa -> 1).
    if (series.rho(y_start) <= threshold) {
        const double r = bisect_event([&](double y) { return series.rho(y) - threshold; },
                                      1e-8 * y_start, y_start, event_rel_tol * y_start);
        return {r, {series.rho(r), series.mass(r)}};
    }

    double y = y_start;
    Vec2 s{series.rho(y_start), series.mass(y_start)};
    double h = y_start / 4.0;
    while (true) {
        const double y_prev = y;
        const Vec2 s_prev = s;
        adaptive_step(ode, y, s, &h, ode_tol, std::max(y, y_start));
        if (s[0] <= threshold) {
            auto crossing = [&](double t) {
                return integrate_fixed(ode, y_prev, s_prev, t)[0] - threshold;
            };
            const double r = bisect_event(crossing, y_prev, y, event_rel_tol * y);
            return {r, integrate_fixed(ode, y_prev, s_prev, r)};
        }
        if (y > max_radius)
            throw numerical_error("integrate_to_density: density event not bracketed "
                                  "within maximum radius");
    }
}

// Sample rho and m on the given nodes by re-integrating the ODE, so nodal
// values carry integration accuracy rather than interpolation error.
inline void fill_samples(const EquationOfState& eos, double rho_center, const RadialGrid& grid,
                         double ode_tol, std::vector<double>& rho, std::vector<double>& mass) {
    const CenterSeries series(eos, rho_center);
    const double y_series = 3e-3 * series.y_scale();
    const StarOde ode{eos};
    const std::size_t n = grid.size();
    rho.assign(n, 0.0);
    mass.assign(n, 0.0);
    rho[0] = rho_center;
    mass[0] = 0.0;

    double y = 0.0;
    Vec2 s{rho_center, 0.0};
    bool integrating = false;
    double h = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double target = grid.nodes[i];
        if (!integrating && target <= y_series) {
            rho[i] = series.rho(target);
            mass[i] = series.mass(target);
            continue;
        }
        if (!integrating) {
            y = std::min(y_series, 0.5 * target);
            s = {series.rho(y), series.mass(y)};
            h = y / 4.0;
            integrating = true;
        }
        while (y < target) {
            const double cap = target - y;
            if (cap <= 1e-13 * target) {
                s = rk4_raw(s, ode, y, cap);
                y = target;
                break;
            }
            adaptive_step(ode, y, s, &h, ode_tol, cap);
        }
        rho[i] = s[0];
        mass[i] = s[1];
    }
}

}  // namespace detail

/// Closed-form gamma = 6/5 liquid equilibrium evaluated at radius y.
struct ExplicitProfileValue {
    double rho;
    double radius;
};

inline double explicit_radius_six_fifths(double kappa) {
    if (!(kappa > 1.0)) throw config_error("explicit_radius_six_fifths: kappa must exceed 1");
    const double k25 = std::pow(kappa, 0.4);
    return 3.0 / std::sqrt(2.0 * pi) * std::sqrt(k25 - 1.0) / k25;
}

inline ExplicitProfileValue explicit_profile_six_fifths(double kappa, double y) {
    const double r = explicit_radius_six_fifths(kappa);
    if (y < 0.0 || y > r * (1.0 + 1e-12))
        throw config_error("explicit_profile_six_fifths: y outside [0, R_kappa]");
    const double k25 = std::pow(kappa, 0.4);
    const double base = 1.0 / k25 + (2.0 * pi / 9.0) * k25 * y * y;
    return {std::pow(base, -2.5), r};
}

inline double explicit_mass_six_fifths(double kappa, double y) {
    const double k25 = std::pow(kappa, 0.4);
    const double base = 1.0 / k25 + (2.0 * pi / 9.0) * k25 * y * y;
    return (4.0 * pi / 3.0) * k25 * y * y * y * std::pow(base, -1.5);
}

/// Solve the liquid Lane-Emden equilibrium with central density kappa and
/// boundary density 1, sampled on cells+1 nodes.
inline StarProfile solve_liquid_star(double gamma, double kappa, const LiquidStarOptions& opts) {
    if (!(gamma >= 1.0 && gamma < 4.0 / 3.0))
        throw config_error("solve_liquid_star: gamma must lie in [1, 4/3)");
    if (!(kappa > 1.0))
        throw config_error("solve_liquid_star: kappa must exceed 1 (no liquid star with "
                           "central density at or below the boundary density)");
    if (opts.cells < 16) throw config_error("solve_liquid_star: need at least 16 cells");

    const EquationOfState eos(gamma);
    const auto core = detail::integrate_to_density(eos, kappa, 1.0, opts.ode_tol,
                                                   opts.event_rel_tol, opts.max_radius_factor);
    StarProfile p;
    p.gamma = gamma;
    p.kappa = kappa;
    p.radius = core.radius;
    p.grid = opts.spacing == RadialGrid::Spacing::uniform
                 ? RadialGrid::make_uniform(core.radius, opts.cells)
                 : RadialGrid::make_geometric(core.radius, opts.cells, opts.geometric_ratio);
    detail::fill_samples(eos, kappa, p.grid, opts.ode_tol, p.rho, p.mass);
    p.validate(1e-8);
    return p;
}

inline StarProfile solve_liquid_star(double gamma, double kappa, std::size_t cells,
                                     double tol = 1e-12) {
    LiquidStarOptions opts;
    opts.cells = cells;
    opts.event_rel_tol = tol;
    return solve_liquid_star(gamma, kappa, opts);
}

/// Gaseous reference state: central density 1, truncated where the density
/// falls to rho_floor.  Sampled on a geometrically graded grid because the
/// far field spans many scale lengths for gamma <= 6/5.
inline GaseousReference solve_gaseous_reference(double gamma, std::size_t cells, double rho_floor,
                                                const LiquidStarOptions& base = {}) {
    if (!(gamma >= 1.0 && gamma < 4.0 / 3.0))
        throw config_error("solve_gaseous_reference: gamma must lie in [1, 4/3)");
    if (!(rho_floor > 0.0 && rho_floor < 1.0))
        throw config_error("solve_gaseous_reference: rho_floor must lie in (0, 1)");
    if (cells < 16) throw config_error("solve_gaseous_reference: need at least 16 cells");

    const EquationOfState eos(gamma);
    const auto core = detail::integrate_to_density(eos, 1.0, rho_floor, base.ode_tol,
                                                   base.event_rel_tol, base.max_radius_factor);
    GaseousReference ref;
    ref.gamma = gamma;
    ref.rho_floor = rho_floor;
    ref.radius = core.radius;

    // Grade the grid so the first cell resolves the core scale.
    const detail::CenterSeries series(eos, 1.0);
    const double h_core = series.y_scale() / 64.0;
    if (h_core * static_cast<double>(cells) >= core.radius) {
        ref.grid = RadialGrid::make_uniform(core.radius, cells);
    } else {
        const double n = static_cast<double>(cells);
        const double ratio = bisect_event(
            [&](double r) {
                return core.radius * (r - 1.0) / (std::pow(r, n) - 1.0) - h_core;
            },
            1.0 + 1e-9, 2.0, 1e-12);
        ref.grid = RadialGrid::make_geometric(core.radius, cells, ratio);
    }
    detail::fill_samples(eos, 1.0, ref.grid, base.ode_tol, ref.rho, ref.mass);
    return ref;
}

/// Liquid star of central density kappa built from the self-similar scaling
/// of a gaseous reference: rho_kappa(y) = kappa * rho_ref(kappa^{1-gamma/2} y),
/// truncated where the scaled density reaches 1.
inline StarProfile scaled_profile(const GaseousReference& ref, double kappa, std::size_t cells) {
    if (!(kappa > 1.0)) throw config_error("scaled_profile: kappa must exceed 1");
    if (cells < 16) throw config_error("scaled_profile: need at least 16 cells");
    if (1.0 / kappa < ref.rho_floor * (1.0 + 1e-12))
        throw config_error("scaled_profile: reference does not reach density 1/kappa");

    const double sigma = std::pow(kappa, 1.0 - 0.5 * ref.gamma);
    const PchipInterpolant rho_ref(ref.grid.nodes, ref.rho);
    const PchipInterpolant mass_ref(ref.grid.nodes, ref.mass);
    const double target = 1.0 / kappa;
    const double z_star = bisect_event([&](double z) { return rho_ref(z) - target; }, 0.0,
                                       ref.radius, 1e-13 * ref.radius);

    StarProfile p;
    p.gamma = ref.gamma;
    p.kappa = kappa;
    p.radius = z_star / sigma;
    p.grid = RadialGrid::make_uniform(p.radius, cells);
    p.rho.resize(cells + 1);
    p.mass.resize(cells + 1);
    const double mass_scale = kappa / (sigma * sigma * sigma);
    for (std::size_t i = 0; i <= cells; ++i) {
        const double z = std::min(sigma * p.grid.nodes[i], ref.radius);
        p.rho[i] = kappa * rho_ref(z);
        p.mass[i] = mass_scale * mass_ref(z);
    }
    p.rho[0] = kappa;
    p.mass[0] = 0.0;
    p.validate(1e-6);
    return p;
}

/// Strength of the outward pressure drop at the boundary, -dP/dy at y = R,
/// evaluated through the steady-state balance as rho(R) m(R) / R^2.  Must be
/// strictly positive for a well-posed free boundary.
inline double taylor_sign_margin(const StarProfile& p) {
    const double margin = p.rho.back() * p.mass.back() / (p.radius * p.radius);
    if (!(margin > 0.0))
        throw numerical_error("taylor_sign_margin: nonpositive margin, corrupt profile");
    return margin;
}

inline double sound_crossing_time(const StarProfile& p) {
    const EquationOfState eos(p.gamma);
    std::vector<double> inv_c(p.grid.size());
    for (std::size_t i = 0; i < p.grid.size(); ++i) inv_c[i] = 1.0 / eos.sound_speed(p.rho[i]);
    return trapezoid(p.grid.nodes, inv_c);
}

/// Max-norm residual of the discrete hydrostatic balance
/// m/y^2 + (1/rho) d(rho^gamma)/dy using centered differences; O(h^2) for a
/// converged profile.
inline double max_steady_residual(const StarProfile& p) {
    const EquationOfState eos(p.gamma);
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < p.grid.size(); ++i) {
        const double dy = p.grid.nodes[i + 1] - p.grid.nodes[i - 1];
        const double dpg = (eos.rho_pow_gamma(p.rho[i + 1]) - eos.rho_pow_gamma(p.rho[i - 1])) / dy;
        const double y = p.grid.nodes[i];
        worst = std::max(worst, std::abs(p.mass[i] / (y * y) + dpg / p.rho[i]));
    }
    return worst;
}

}  // namespace lsl
