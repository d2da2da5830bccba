#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "lsl/errors.hpp"
#include "lsl/steady_state.hpp"
#include "lsl/tridiagonal.hpp"

namespace lsl {

/// P1 finite-element discretization of the radial stability operator
///   L chi = -gamma d/dy(rho^gamma y^4 chi') + (4-3gamma) y^3 chi d(rho^gamma)/dy
/// against the weight y^4 rho, with the mixed boundary condition
/// 3 chi(R) + R chi'(R) = 0 entering as the natural boundary term
/// 3 gamma R^3 chi(R)^2 of the quadratic form.
struct AssembledPencil {
    TridiagonalSymmetric stiffness;  // A: stiffness + potential + boundary term
    TridiagonalSymmetric mass;       // M: weight y^4 rho
    RadialGrid grid;
    double gamma = 0.0;
};

/// Lowest generalized eigenpair A chi = mu M chi.  mu_star < 0 signals linear
/// instability; the growth rate of the corresponding mode is sqrt(-mu_star).
struct ModeResult {
    double mu_star = 0.0;
    std::optional<double> mu0;          // -mu_star when unstable
    std::optional<double> growth_rate;  // sqrt(mu0)
    std::vector<double> chi;            // normalized so chi^T M chi = 1, chi(R) >= 0
    double residual = 0.0;              // ||A chi - mu M chi|| / ||M chi||
    double bracket_lo = 0.0;            // certified eigenvalue bracket from inertia counts
    double bracket_hi = 0.0;
    int interior_sign_changes = 0;
};

inline AssembledPencil assemble(const StarProfile& profile) {
    profile.validate();
    const EquationOfState eos(profile.gamma);
    const std::size_t n = profile.grid.size();
    const auto& y = profile.grid.nodes;
    const double g = profile.gamma;

    // Nodal coefficient samples.  The potential coefficient uses the
    // hydrostatic balance d(rho^gamma)/dy = -rho m / y^2 analytically, so
    //   (4-3g) y^3 d(rho^gamma)/dy = -(4-3g) y rho m,
    // which avoids differencing the steep density profile.
    std::vector<double> stiff_c(n), pot_c(n), weight_c(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double y2 = y[i] * y[i];
        const double y4 = y2 * y2;
        stiff_c[i] = g * eos.rho_pow_gamma(profile.rho[i]) * y4;
        pot_c[i] = -(4.0 - 3.0 * g) * y[i] * profile.rho[i] * profile.mass[i];
        weight_c[i] = y4 * profile.rho[i];
    }

    AssembledPencil pencil;
    pencil.grid = profile.grid;
    pencil.gamma = g;
    pencil.stiffness.diag.assign(n, 0.0);
    pencil.stiffness.off.assign(n - 1, 0.0);
    pencil.mass.diag.assign(n, 0.0);
    pencil.mass.off.assign(n - 1, 0.0);

    // Element integrals with the coefficient interpolated linearly:
    //   int phi_a^2 c  = h (3 c_a + c_b) / 12
    //   int phi_a phi_b c = h (c_a + c_b) / 12
    for (std::size_t e = 0; e + 1 < n; ++e) {
        const double h = y[e + 1] - y[e];
        const double k = 0.5 * (stiff_c[e] + stiff_c[e + 1]) / h;
        pencil.stiffness.diag[e] += k;
        pencil.stiffness.diag[e + 1] += k;
        pencil.stiffness.off[e] -= k;

        const double va = pot_c[e], vb = pot_c[e + 1];
        pencil.stiffness.diag[e] += h * (3.0 * va + vb) / 12.0;
        pencil.stiffness.diag[e + 1] += h * (va + 3.0 * vb) / 12.0;
        pencil.stiffness.off[e] += h * (va + vb) / 12.0;

        const double wa = weight_c[e], wb = weight_c[e + 1];
        pencil.mass.diag[e] += h * (3.0 * wa + wb) / 12.0;
        pencil.mass.diag[e + 1] += h * (wa + 3.0 * wb) / 12.0;
        pencil.mass.off[e] += h * (wa + wb) / 12.0;
    }

    const double r = profile.radius;
    pencil.stiffness.diag[n - 1] += 3.0 * g * r * r * r;
    return pencil;
}

inline double rayleigh_quotient(const AssembledPencil& pencil, const std::vector<double>& chi) {
    if (chi.size() != pencil.grid.size())
        throw config_error("rayleigh_quotient: vector length mismatch");
    const std::vector<double> m_chi = mat_vec(pencil.mass, chi);
    const double denom = dot(chi, m_chi);
    double scale = 0.0;
    for (double v : chi) scale = std::max(scale, std::abs(v));
    if (!(denom > 0.0) || scale == 0.0)
        throw config_error("rayleigh_quotient: test vector has no weighted mass");
    return dot(chi, mat_vec(pencil.stiffness, chi)) / denom;
}

namespace detail {

// Rayleigh quotient and residual of a stored pair, accumulated in extended
// precision so the reported residual is the true residual of the returned
// double-precision data rather than a matvec rounding artifact.
struct PairQuality {
    double mu;
    double residual;   // ||A x - mu M x|| / ||M x||
    double rep_floor;  // representation floor: eps * || |A| |x| || / ||M x||
};

inline PairQuality pair_quality(const TridiagonalSymmetric& a, const TridiagonalSymmetric& m,
                                const std::vector<double>& x) {
    const std::size_t n = a.size();
    long double num = 0.0L, den = 0.0L;
    std::vector<long double> ax(n), mx(n);
    long double abs_row = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        long double av = static_cast<long double>(a.diag[i]) * x[i];
        long double mv = static_cast<long double>(m.diag[i]) * x[i];
        long double aabs = std::abs(static_cast<long double>(a.diag[i]) * x[i]);
        if (i > 0) {
            av += static_cast<long double>(a.off[i - 1]) * x[i - 1];
            mv += static_cast<long double>(m.off[i - 1]) * x[i - 1];
            aabs += std::abs(static_cast<long double>(a.off[i - 1]) * x[i - 1]);
        }
        if (i + 1 < n) {
            av += static_cast<long double>(a.off[i]) * x[i + 1];
            mv += static_cast<long double>(m.off[i]) * x[i + 1];
            aabs += std::abs(static_cast<long double>(a.off[i]) * x[i + 1]);
        }
        ax[i] = av;
        mx[i] = mv;
        num += x[i] * av;
        den += x[i] * mv;
        abs_row += aabs * aabs;
    }
    const long double mu = num / den;
    long double rn = 0.0L, mn = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        const long double r = ax[i] - mu * mx[i];
        rn += r * r;
        mn += mx[i] * mx[i];
    }
    PairQuality q;
    q.mu = static_cast<double>(mu);
    q.residual = static_cast<double>(sqrtl(rn) / sqrtl(mn));
    q.rep_floor = static_cast<double>(std::numeric_limits<double>::epsilon() * sqrtl(abs_row) /
                                      sqrtl(mn));
    return q;
}

inline int count_sign_changes(const std::vector<double>& v) {
    double peak = 0.0;
    for (double x : v) peak = std::max(peak, std::abs(x));
    const double floor = 1e-10 * peak;
    int changes = 0;
    int prev = 0;
    for (double x : v) {
        if (std::abs(x) <= floor) continue;
        const int s = x > 0.0 ? 1 : -1;
        if (prev != 0 && s != prev) ++changes;
        prev = s;
    }
    return changes;
}

inline void m_normalize(const TridiagonalSymmetric& m, std::vector<double>& x) {
    const double nrm = std::sqrt(dot(x, mat_vec(m, x)));
    if (!(nrm > 0.0)) throw numerical_error("m_normalize: vector has zero weighted norm");
    for (double& v : x) v /= nrm;
}

}  // namespace detail

/// Find the minimal eigenvalue of A chi = mu M chi by inertia bisection
/// (negative LDL^T pivots of A - sigma M count eigenvalues below sigma),
/// then polish the eigenvector by shifted inverse iteration.
inline ModeResult lowest_eigenpair(const AssembledPencil& pencil, double tol = 1e-10) {
    if (!(tol > 0.0)) throw config_error("lowest_eigenpair: tol must be positive");
    const std::size_t n = pencil.grid.size();
    const TridiagonalSymmetric& a = pencil.stiffness;
    const TridiagonalSymmetric& m = pencil.mass;

    std::vector<double> ones(n, 1.0);
    double hi = rayleigh_quotient(pencil, ones);
    double width = std::max(1.0, std::abs(hi));
    int guard = 0;
    while (eigen_count_below(a, m, hi) < 1) {
        hi += width;
        width *= 2.0;
        if (++guard > 80) throw numerical_error("lowest_eigenpair: no eigenvalue above start");
    }
    width = std::max(1.0, std::abs(hi));
    double lo = hi - width;
    guard = 0;
    while (eigen_count_below(a, m, lo) > 0) {
        width *= 2.0;
        lo = hi - width;
        if (++guard > 80)
            throw numerical_error("lowest_eigenpair: bisection bracket not found");
    }
    while (hi - lo > tol * std::max(1.0, std::abs(0.5 * (lo + hi)))) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (eigen_count_below(a, m, mid) >= 1)
            hi = mid;
        else
            lo = mid;
    }

    // Fixed-shift inverse iteration at the certified bracket midpoint; the
    // bracket width bounds |mu - sigma| so each sweep contracts the
    // off-eigenvector content by width/gap.
    double sigma = 0.5 * (lo + hi);
    std::vector<double> x(n, 1.0);
    detail::m_normalize(m, x);
    std::vector<double> best_x = x;
    detail::PairQuality best{sigma, std::numeric_limits<double>::infinity(), 0.0};
    for (int it = 0; it < 12; ++it) {
        std::vector<double> z;
        try {
            z = tridiagonal_solve_pivoted(shifted(a, m, sigma), mat_vec(m, x));
        } catch (const numerical_error&) {
            sigma += (hi - lo) * 1e-2 + std::numeric_limits<double>::epsilon() *
                                            std::max(1.0, std::abs(sigma));
            continue;
        }
        bool finite = true;
        for (double v : z) finite = finite && std::isfinite(v);
        if (!finite) {
            sigma += (hi - lo) * 1e-2;
            continue;
        }
        detail::m_normalize(m, z);
        x = std::move(z);
        const detail::PairQuality q = detail::pair_quality(a, m, x);
        if (q.residual < best.residual) {
            best = q;
            best_x = x;
        }
        if (best.residual <= 4.0 * best.rep_floor) break;        // at representable accuracy
        if (it > 2 && q.residual > 0.5 * best.residual) break;   // stagnated
    }
    const double accept =
        std::max(tol * std::max(1.0, std::abs(best.mu)), 16.0 * best.rep_floor);
    if (!(best.residual <= accept))
        throw numerical_error("lowest_eigenpair: inverse iteration did not converge");
    const double mu = best.mu;
    const double residual = best.residual;
    x = std::move(best_x);

    ModeResult result;
    result.mu_star = mu;
    result.bracket_lo = lo;
    result.bracket_hi = hi;
    if (x.back() < 0.0)
        for (double& v : x) v = -v;
    result.chi = std::move(x);
    result.residual = residual;
    result.interior_sign_changes = detail::count_sign_changes(result.chi);
    if (mu < 0.0) {
        result.mu0 = -mu;
        result.growth_rate = std::sqrt(-mu);
    }
    return result;
}

/// First k generalized eigenvalues in increasing order (diagnostic).
inline std::vector<double> lowest_eigenvalues(const AssembledPencil& pencil, int k,
                                              double tol = 1e-10) {
    if (k < 1) throw config_error("lowest_eigenvalues: k must be >= 1");
    const TridiagonalSymmetric& a = pencil.stiffness;
    const TridiagonalSymmetric& m = pencil.mass;
    std::vector<double> ones(pencil.grid.size(), 1.0);
    double lo = rayleigh_quotient(pencil, ones);
    double width = std::max(1.0, std::abs(lo));
    while (eigen_count_below(a, m, lo) > 0) {
        lo -= width;
        width *= 2.0;
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int j = 1; j <= k; ++j) {
        double l = lo, h = lo;
        double w = std::max(1.0, std::abs(lo));
        int guard = 0;
        while (eigen_count_below(a, m, h) < j) {
            h += w;
            w *= 2.0;
            if (++guard > 200) throw numerical_error("lowest_eigenvalues: bracket not found");
        }
        while (h - l > tol * std::max(1.0, std::abs(0.5 * (l + h)))) {
            const double mid = 0.5 * (l + h);
            if (mid <= l || mid >= h) break;
            if (eigen_count_below(a, m, mid) >= j)
                h = mid;
            else
                l = mid;
        }
        out.push_back(0.5 * (l + h));
    }
    return out;
}

/// assemble + lowest_eigenpair; growth_rate present when the star is
/// linearly unstable.
inline ModeResult growth_rate_of(const StarProfile& profile, double tol = 1e-10) {
    return lowest_eigenpair(assemble(profile), tol);
}

/// Rayleigh quotient of the piecewise test function that is constant on the
/// scaled core [0, nu kappa^{-(1-gamma/2)}] and decays as y^{-a} outside.
/// Witnesses instability strength for gamma below 6/5.
inline double plateau_power_quotient(const StarProfile& profile, double nu, double a) {
    if (!(nu > 0.0) || !(a > 0.0))
        throw config_error("plateau_power_quotient: nu and a must be positive");
    const double y_break = nu * std::pow(profile.kappa, -(1.0 - 0.5 * profile.gamma));
    if (y_break < profile.grid.nodes[1])
        throw config_error("plateau_power_quotient: core breakpoint below the first "
                           "grid node (degenerate sampling)");
    const double plateau = std::pow(y_break, -a);
    std::vector<double> chi(profile.grid.size());
    for (std::size_t i = 0; i < profile.grid.size(); ++i) {
        const double y = profile.grid.nodes[i];
        chi[i] = y <= y_break ? plateau : std::pow(y, -a);
    }
    return rayleigh_quotient(assemble(profile), chi);
}

/// Open interval of decay exponents a for which the plateau-power test
/// function certifies a growth mode beyond kappa^{gamma/2}; empty when the
/// slack parameters close the window.
inline std::optional<std::pair<double, double>> exponent_window(double gamma, double eps1,
                                                                double eps2) {
    if (!(gamma >= 1.0 && gamma < 1.2))
        throw config_error("exponent_window: gamma must lie in [1, 6/5)");
    if (eps1 < 0.0 || eps2 < 0.0)
        throw config_error("exponent_window: slack parameters must be nonnegative");
    const double a_lo = 2.0 - 1.0 / (2.0 - gamma);
    const double a_hi = std::sqrt((1.0 - eps2) * (1.0 - eps2) / std::pow(1.0 + eps1, gamma) *
                                  (6.0 - 4.0 / (2.0 - gamma)));
    if (!(a_lo < a_hi)) return std::nullopt;
    return std::make_pair(a_lo, a_hi);
}

}  // namespace lsl
