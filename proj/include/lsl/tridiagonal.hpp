#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "lsl/errors.hpp"

namespace lsl {

/// Symmetric tridiagonal matrix; only the diagonal and one off-diagonal are
/// stored, so symmetry holds by construction.
struct TridiagonalSymmetric {
    std::vector<double> diag;
    std::vector<double> off;  // length diag.size() - 1

    std::size_t size() const { return diag.size(); }

    void validate() const {
        if (diag.empty()) throw config_error("TridiagonalSymmetric: empty matrix");
        if (off.size() + 1 != diag.size())
            throw config_error("TridiagonalSymmetric: off-diagonal length must be n-1");
    }
};

inline std::vector<double> mat_vec(const TridiagonalSymmetric& a, const std::vector<double>& x) {
    const std::size_t n = a.size();
    if (x.size() != n) throw config_error("mat_vec: dimension mismatch");
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = a.diag[i] * x[i];
        if (i > 0) v += a.off[i - 1] * x[i - 1];
        if (i + 1 < n) v += a.off[i] * x[i + 1];
        r[i] = v;
    }
    return r;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

/// a - sigma*b, elementwise over the stored bands.
inline TridiagonalSymmetric shifted(const TridiagonalSymmetric& a, const TridiagonalSymmetric& b,
                                    double sigma) {
    if (a.size() != b.size()) throw config_error("shifted: dimension mismatch");
    TridiagonalSymmetric r;
    r.diag.resize(a.size());
    r.off.resize(a.off.size());
    for (std::size_t i = 0; i < a.diag.size(); ++i) r.diag[i] = a.diag[i] - sigma * b.diag[i];
    for (std::size_t i = 0; i < a.off.size(); ++i) r.off[i] = a.off[i] - sigma * b.off[i];
    return r;
}

// ---------------------------------------------------------------------------
// LDL^T factorization with inertia count (Sturm sequence)
// ---------------------------------------------------------------------------

struct LdlFactorization {
    std::vector<double> d;  // pivots
    std::vector<double> l;  // subdiagonal multipliers, length n-1
    int negative_pivots = 0;
    bool zero_pivot = false;
};

/// Factor A = L D L^T without pivoting and count negative pivots.  By
/// Sylvester's law of inertia the count equals the number of eigenvalues of A
/// below zero, so factoring A - sigma*M counts pencil eigenvalues below sigma.
/// A zero pivot sets the flag; the caller retries with a perturbed shift.
inline LdlFactorization ldl_inertia(const TridiagonalSymmetric& a) {
    a.validate();
    const std::size_t n = a.size();
    LdlFactorization f;
    f.d.resize(n);
    f.l.resize(n - 1);
    double prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double di = a.diag[i];
        if (i > 0) di -= a.off[i - 1] * a.off[i - 1] / prev;
        if (di == 0.0 || !std::isfinite(di)) {
            f.zero_pivot = true;
            return f;
        }
        f.d[i] = di;
        if (di < 0.0) ++f.negative_pivots;
        if (i + 1 < n) f.l[i] = a.off[i] / di;
        prev = di;
    }
    return f;
}

inline std::vector<double> ldl_solve(const LdlFactorization& f, const std::vector<double>& b) {
    const std::size_t n = f.d.size();
    if (b.size() != n) throw config_error("ldl_solve: dimension mismatch");
    std::vector<double> x(b);
    for (std::size_t i = 1; i < n; ++i) x[i] -= f.l[i - 1] * x[i - 1];
    for (std::size_t i = 0; i < n; ++i) x[i] /= f.d[i];
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= f.l[i] * x[i + 1];
    return x;
}

/// Eigenvalue count below sigma for the pencil (A, M), with ulp-scale shift
/// perturbation on exact zero pivots.
inline int eigen_count_below(const TridiagonalSymmetric& a, const TridiagonalSymmetric& m,
                             double sigma) {
    double s = sigma;
    for (int attempt = 0; attempt < 8; ++attempt) {
        const LdlFactorization f = ldl_inertia(shifted(a, m, s));
        if (!f.zero_pivot) return f.negative_pivots;
        const double eps = std::numeric_limits<double>::epsilon();
        const double scale = std::max(std::abs(s), 1.0);
        s += scale * eps * static_cast<double>(1 << attempt);
    }
    throw numerical_error("eigen_count_below: persistent zero pivot");
}

// ---------------------------------------------------------------------------
// General tridiagonal solve with partial pivoting (for inverse iteration on
// nearly singular shifted pencils, where unpivoted LDL^T loses accuracy)
// ---------------------------------------------------------------------------

inline std::vector<double> tridiagonal_solve_pivoted(const TridiagonalSymmetric& a,
                                                     const std::vector<double>& rhs) {
    const std::size_t n = a.size();
    if (rhs.size() != n) throw config_error("tridiagonal_solve_pivoted: dimension mismatch");
    // Working bands: d main, e super, f second super (fill-in from row swaps).
    std::vector<double> d(a.diag), e(n, 0.0), g(n, 0.0), c(n, 0.0), b(rhs);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        e[i] = a.off[i];
        c[i] = a.off[i];  // subdiagonal
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(c[i]) > std::abs(d[i])) {
            std::swap(d[i], c[i]);
            std::swap(e[i], d[i + 1]);
            std::swap(g[i], e[i + 1]);
            std::swap(b[i], b[i + 1]);
        }
        if (d[i] == 0.0) throw numerical_error("tridiagonal_solve_pivoted: singular matrix");
        const double mult = c[i] / d[i];
        d[i + 1] -= mult * e[i];
        e[i + 1] -= mult * g[i];
        b[i + 1] -= mult * b[i];
    }
    if (d[n - 1] == 0.0) throw numerical_error("tridiagonal_solve_pivoted: singular matrix");
    std::vector<double> x(n);
    x[n - 1] = b[n - 1] / d[n - 1];
    if (n >= 2) x[n - 2] = (b[n - 2] - e[n - 2] * x[n - 1]) / d[n - 2];
    for (std::size_t i = n - 2; i-- > 0;)
        x[i] = (b[i] - e[i] * x[i + 1] - g[i] * x[i + 2]) / d[i];
    return x;
}

}  // namespace lsl
