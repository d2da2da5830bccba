#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "lsl/errors.hpp"
#include "lsl/grid.hpp"

namespace lsl {

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// Running trapezoid integral of samples over arbitrary ordered abscissae.
/// out[0] = 0; exact for piecewise-linear integrands.
inline std::vector<double> cumulative_trapezoid(const std::vector<double>& x,
                                                const std::vector<double>& f) {
    if (x.size() != f.size())
        throw config_error("cumulative_trapezoid: abscissa/sample length mismatch");
    if (x.size() < 2)
        throw config_error("cumulative_trapezoid: need at least 2 samples");
    std::vector<double> out(x.size());
    out[0] = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i)
        out[i] = out[i - 1] + 0.5 * (f[i - 1] + f[i]) * (x[i] - x[i - 1]);
    return out;
}

inline std::vector<double> cumulative_trapezoid(const RadialGrid& grid,
                                                const std::vector<double>& f) {
    return cumulative_trapezoid(grid.nodes, f);
}

inline double trapezoid(const std::vector<double>& x, const std::vector<double>& f) {
    if (x.size() != f.size())
        throw config_error("trapezoid: abscissa/sample length mismatch");
    double acc = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i)
        acc += 0.5 * (f[i - 1] + f[i]) * (x[i] - x[i - 1]);
    return acc;
}

// ---------------------------------------------------------------------------
// ODE stepping
// ---------------------------------------------------------------------------

/// One classical 4th-order Runge-Kutta step.  State is any indexable
/// container of doubles (std::array or std::vector).
template <class State, class Deriv>
State rk4_step(const State& state, Deriv&& deriv, double y, double h) {
    if (!(h > 0.0)) throw config_error("rk4_step: step size must be positive");
    const std::size_t n = state.size();
    auto check = [](const State& k) {
        for (std::size_t i = 0; i < k.size(); ++i)
            if (!std::isfinite(k[i]))
                throw numerical_error("rk4_step: non-finite derivative evaluation");
    };
    State k1 = deriv(y, state);
    check(k1);
    State tmp = state;
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * h * k1[i];
    State k2 = deriv(y + 0.5 * h, tmp);
    check(k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * h * k2[i];
    State k3 = deriv(y + 0.5 * h, tmp);
    check(k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + h * k3[i];
    State k4 = deriv(y + h, tmp);
    check(k4);
    State out = state;
    for (std::size_t i = 0; i < n; ++i)
        out[i] = state[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Root bracketing
// ---------------------------------------------------------------------------

/// Bisect f on [lo, hi] down to an interval of width tol; f(lo) and f(hi)
/// must have opposite signs.  Deterministic.
template <class F>
double bisect_event(F&& f, double lo, double hi, double tol) {
    if (!(tol > 0.0)) throw config_error("bisect_event: tol must be positive");
    if (!(hi > lo)) throw config_error("bisect_event: need lo < hi");
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw numerical_error("bisect_event: no sign change over bracket");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // interval at roundoff resolution
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Regression
// ---------------------------------------------------------------------------

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // RMS of fit residuals
};

inline LineFit fit_linear(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw config_error("fit_linear: need >= 2 matched points");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw config_error("fit_linear: degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.slope * x[i] + f.intercept);
        ss += r * r;
    }
    f.residual = std::sqrt(ss / n);
    return f;
}

/// Least-squares line through (log x, log y).  All data strictly positive.
/// Residual is RMS in log space.
inline LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw config_error("fit_loglog: need >= 2 matched points");
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw config_error("fit_loglog: data must be strictly positive");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return fit_linear(lx, ly);
}

inline LineFit fit_loglog(const std::vector<std::pair<double, double>>& pts) {
    std::vector<double> x(pts.size()), y(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        x[i] = pts[i].first;
        y[i] = pts[i].second;
    }
    return fit_loglog(x, y);
}

// ---------------------------------------------------------------------------
// Monotone cubic interpolation (Fritsch-Carlson slopes)
// ---------------------------------------------------------------------------

/// Shape-preserving C1 cubic Hermite interpolant.  Monotone data produce a
/// monotone interpolant; queries are clamped to the data range.
class PchipInterpolant {
  public:
    PchipInterpolant() = default;

    PchipInterpolant(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n != y_.size() || n < 2)
            throw config_error("PchipInterpolant: need >= 2 matched points");
        for (std::size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1]))
                throw config_error("PchipInterpolant: abscissae must be strictly increasing");
        m_.assign(n, 0.0);
        if (n == 2) {
            m_[0] = m_[1] = (y_[1] - y_[0]) / (x_[1] - x_[0]);
            return;
        }
        std::vector<double> h(n - 1), d(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x_[i + 1] - x_[i];
            d[i] = (y_[i + 1] - y_[i]) / h[i];
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (d[i - 1] * d[i] <= 0.0) {
                m_[i] = 0.0;
            } else {
                const double w1 = 2.0 * h[i] + h[i - 1];
                const double w2 = h[i] + 2.0 * h[i - 1];
                m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
            }
        }
        m_[0] = endpoint_slope(h[0], h[1], d[0], d[1]);
        m_[n - 1] = endpoint_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    }

    double operator()(double q) const {
        const std::size_t n = x_.size();
        if (q <= x_.front()) q = x_.front();
        if (q >= x_.back()) q = x_.back();
        const auto it = std::upper_bound(x_.begin(), x_.end(), q);
        std::size_t i = static_cast<std::size_t>(it - x_.begin());
        if (i == 0) i = 1;
        if (i >= n) i = n - 1;
        --i;
        const double h = x_[i + 1] - x_[i];
        const double t = (q - x_[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        const double h10 = t3 - 2.0 * t2 + t;
        const double h01 = -2.0 * t3 + 3.0 * t2;
        const double h11 = t3 - t2;
        return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
    }

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

  private:
    static double endpoint_slope(double h0, double h1, double d0, double d1) {
        double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (m * d0 <= 0.0)
            m = 0.0;
        else if (d0 * d1 < 0.0 && std::abs(m) > 3.0 * std::abs(d0))
            m = 3.0 * d0;
        return m;
    }

    std::vector<double> x_, y_, m_;
};

}  // namespace lsl
