#pragma once

// Test-only oracles, kept independent of the library's solution paths.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "lsl/steady_state.hpp"
#include "lsl/tridiagonal.hpp"

namespace oracle {

// Dense symmetric eigenvalues by cyclic Jacobi rotations.
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

inline std::vector<std::vector<double>> dense(const lsl::TridiagonalSymmetric& t) {
    const std::size_t n = t.size();
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        a[i][i] = t.diag[i];
        if (i + 1 < n) a[i][i + 1] = a[i + 1][i] = t.off[i];
    }
    return a;
}

// Generalized symmetric eigenvalues of (A, M) via the Cholesky congruence
// L^{-1} A L^{-T} with M = L L^T.
inline std::vector<double> generalized_eigenvalues(const lsl::TridiagonalSymmetric& a_tri,
                                                   const lsl::TridiagonalSymmetric& m_tri) {
    const std::size_t n = a_tri.size();
    auto a = dense(a_tri);
    auto m = dense(m_tri);
    // dense Cholesky of M
    std::vector<std::vector<double>> l(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = m[i][j];
            for (std::size_t k = 0; k < j; ++k) sum -= l[i][k] * l[j][k];
            l[i][j] = (i == j) ? std::sqrt(sum) : sum / l[j][j];
        }
    // B = L^{-1} A: solve L B = A column-wise
    std::vector<std::vector<double>> b(n, std::vector<double>(n));
    for (std::size_t col = 0; col < n; ++col)
        for (std::size_t i = 0; i < n; ++i) {
            double sum = a[i][col];
            for (std::size_t k = 0; k < i; ++k) sum -= l[i][k] * b[k][col];
            b[i][col] = sum / l[i][i];
        }
    // C = B L^{-T}: solve C L^T = B row-wise, i.e. L C^T = B^T
    std::vector<std::vector<double>> c(n, std::vector<double>(n));
    for (std::size_t row = 0; row < n; ++row)
        for (std::size_t i = 0; i < n; ++i) {
            double sum = b[row][i];
            for (std::size_t k = 0; k < i; ++k) sum -= l[i][k] * c[row][k];
            c[row][i] = sum / l[i][i];
        }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double sym = 0.5 * (c[i][j] + c[j][i]);
            c[i][j] = c[j][i] = sym;
        }
    return jacobi_eigenvalues(c);
}

// Fixed-step RK4 integration of the hydrostatic ODE with Richardson
// extrapolation, for cross-checking the adaptive production path.
struct OdeSample {
    double rho, mass;
};

inline std::vector<OdeSample> fixed_step_star(double gamma, double rho_center,
                                              const std::vector<double>& nodes, int substeps) {
    const lsl::EquationOfState eos(gamma);
    auto deriv = [&](double y, std::array<double, 2> s) -> std::array<double, 2> {
        return {-s[0] * s[1] / (y * y * eos.sound_speed_sq(s[0])),
                4.0 * lsl::pi * y * y * s[0]};
    };
    auto rk4 = [&](double y, std::array<double, 2> s, double h) {
        const auto k1 = deriv(y, s);
        const auto k2 = deriv(y + 0.5 * h, {s[0] + 0.5 * h * k1[0], s[1] + 0.5 * h * k1[1]});
        const auto k3 = deriv(y + 0.5 * h, {s[0] + 0.5 * h * k2[0], s[1] + 0.5 * h * k2[1]});
        const auto k4 = deriv(y + h, {s[0] + h * k3[0], s[1] + h * k3[1]});
        return std::array<double, 2>{
            s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])};
    };
    // series start, independent re-derivation
    const double cs2 = eos.sound_speed_sq(rho_center);
    const double b = 2.0 * lsl::pi / 3.0 * rho_center * rho_center / cs2;
    const double y0 = 1e-4 * std::sqrt(rho_center / b);
    auto run = [&](int sub) {
        std::vector<OdeSample> out(nodes.size());
        double y = y0;
        std::array<double, 2> s{rho_center - b * y0 * y0,
                                4.0 * lsl::pi / 3.0 * rho_center * y0 * y0 * y0 *
                                        (1.0 - 0.6 * b * y0 * y0 / rho_center)};
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double target = nodes[i];
            if (target <= y0) {
                out[i] = {rho_center - b * target * target,
                          4.0 * lsl::pi / 3.0 * rho_center * target * target * target};
                continue;
            }
            const int steps = std::max(1, static_cast<int>(std::ceil((target - y) / 1e-3)) * sub);
            const double h = (target - y) / steps;
            for (int k = 0; k < steps; ++k) s = rk4(y + k * h, s, h);
            y = target;
            out[i] = {s[0], s[1]};
        }
        return out;
    };
    auto coarse = run(substeps);
    auto fine = run(2 * substeps);
    std::vector<OdeSample> out(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        out[i].rho = fine[i].rho + (fine[i].rho - coarse[i].rho) / 15.0;
        out[i].mass = fine[i].mass + (fine[i].mass - coarse[i].mass) / 15.0;
    }
    return out;
}

// Composite Simpson quadrature on [a, b].
template <class F>
double simpson(F&& f, double a, double b, int panels) {
    const double h = (b - a) / (2 * panels);
    double acc = f(a) + f(b);
    for (int i = 1; i < 2 * panels; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

}  // namespace oracle
