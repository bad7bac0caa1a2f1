#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "careless/errors.hpp"

namespace careless {

// Dense column-major-free simple matrix helpers for the small symmetric
// systems this library solves (normal equations, Newton steps; p <= ~40).

struct SymSolveResult {
    std::vector<double> x;
    bool ok = false;
};

// Cholesky factorization of a symmetric positive-definite matrix stored
// row-major in a (dense, n*n). Returns false if a pivot drops below tol.
inline bool cholesky_inplace(std::vector<double>& a, std::size_t n, double tol = 0.0) {
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > tol)) return false;
        const double lj = std::sqrt(d);
        a[j * n + j] = lj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / lj;
        }
    }
    return true;
}

// Solves A x = b for symmetric positive-definite A (row-major, n*n).
inline SymSolveResult solve_spd(std::vector<double> a, std::vector<double> b, std::size_t n,
                                double pivot_tol = 0.0) {
    SymSolveResult r;
    if (!cholesky_inplace(a, n, pivot_tol)) return r;
    // forward: L y = b
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
        b[i] = s / a[i * n + i];
    }
    // backward: L^T x = y
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= a[k * n + ii] * b[k];
        b[ii] = s / a[ii * n + ii];
    }
    r.x = std::move(b);
    r.ok = true;
    return r;
}

// Inverse of a symmetric positive-definite matrix via its Cholesky factor.
// Throws RankDeficient when factorization fails.
inline std::vector<double> invert_spd(std::vector<double> a, std::size_t n,
                                      double pivot_tol = 0.0) {
    if (!cholesky_inplace(a, n, pivot_tol)) {
        throw RankDeficient("matrix is not positive definite");
    }
    // Invert L in place.
    std::vector<double> linv(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        linv[i * n + i] = 1.0 / a[i * n + i];
        for (std::size_t j = 0; j < i; ++j) {
            double s = 0.0;
            for (std::size_t k = j; k < i; ++k) s -= a[i * n + k] * linv[k * n + j];
            linv[i * n + j] = s / a[i * n + i];
        }
    }
    // A^{-1} = L^{-T} L^{-1}
    std::vector<double> inv(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = i; k < n; ++k) s += linv[k * n + i] * linv[k * n + j];
            inv[i * n + j] = s;
            inv[j * n + i] = s;
        }
    }
    return inv;
}

// Eigenvalue range of a symmetric matrix via cyclic Jacobi rotations.
// Used only for condition-number diagnostics on small cross-products.
struct EigenRange {
    double min = 0.0;
    double max = 0.0;
};

inline EigenRange sym_eigen_range(std::vector<double> a, std::size_t n) {
    constexpr int kSweeps = 60;
    for (int sweep = 0; sweep < kSweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a[i * n + j] * a[i * n + j];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::fabs(apq) < 1e-300) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p];
                    const double akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k];
                    const double aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    EigenRange r;
    r.min = a[0];
    r.max = a[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double d = a[i * n + i];
        if (d < r.min) r.min = d;
        if (d > r.max) r.max = d;
    }
    return r;
}

}  // namespace careless
