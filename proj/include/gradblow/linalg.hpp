// Small dense kernels used across the laboratory: a tridiagonal solver for
// the implicit time steps, a symmetric tridiagonal eigensolver (implicit QL
// with Wilkinson shift) for Golub-Welsch quadrature construction, and a
// Householder QR least-squares routine for the various asymptotic fits.
// Sizes are modest (grids up to ~1e5 for Thomas, matrices up to a few
// hundred for QL, a handful of columns for QR); no external dependency.

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "errors.hpp"

namespace gradblow {

// Solves the tridiagonal system a[i]*x[i-1] + b[i]*x[i] + c[i]*x[i+1] = r[i].
// a[0] and c[n-1] are ignored. b and r are overwritten; the solution lands in r.
inline void thomas_solve(const std::vector<double>& a, std::vector<double>& b,
                         const std::vector<double>& c, std::vector<double>& r) {
    const std::size_t n = b.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        r[i] -= m * r[i - 1];
    }
    r[n - 1] /= b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        r[i] = (r[i] - c[i] * r[i + 1]) / b[i];
}

// Eigen-decomposition of a symmetric tridiagonal matrix: d holds the diagonal
// (eigenvalues on return), e[i] couples rows i and i+1 (destroyed), z is a
// row-major n*n matrix that must arrive as the identity and leaves with the
// eigenvector of d[j] in column j.
inline void tridiag_eigen(std::vector<double>& d, std::vector<double>& e,
                          std::vector<double>& z) {
    const int n = static_cast<int>(d.size());
    if (n == 0) return;
    e[n - 1] = 0.0;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= 1e-300 || std::fabs(e[m]) + dd == dd) break;
            }
            if (m != l) {
                if (iter++ == 50)
                    throw numerical_error("tridiag_eigen: QL iteration failed to converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (int k = 0; k < n; ++k) {
                        f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

struct LstsqResult {
    std::vector<double> coef;
    double residual_norm = 0.0;
};

// Least squares min ||A c - b|| by Householder QR. Columns are passed as
// separate vectors; all must share b's length, and the column count must not
// exceed the row count.
inline LstsqResult lstsq(const std::vector<std::vector<double>>& columns,
                         const std::vector<double>& b) {
    const std::size_t nrow = b.size();
    const std::size_t ncol = columns.size();
    if (ncol == 0 || nrow < ncol)
        throw config_error("lstsq: need at least as many rows as columns");
    std::vector<std::vector<double>> A = columns;
    std::vector<double> rhs = b;
    for (std::size_t k = 0; k < ncol; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < nrow; ++i) norm += A[k][i] * A[k][i];
        norm = std::sqrt(norm);
        if (norm == 0.0)
            throw numerical_error("lstsq: rank-deficient column " + std::to_string(k));
        const double alpha = A[k][k] > 0 ? -norm : norm;
        std::vector<double> v(nrow, 0.0);
        v[k] = A[k][k] - alpha;
        for (std::size_t i = k + 1; i < nrow; ++i) v[i] = A[k][i];
        double vtv = 0.0;
        for (std::size_t i = k; i < nrow; ++i) vtv += v[i] * v[i];
        if (vtv == 0.0) continue;
        for (std::size_t j = k; j < ncol; ++j) {
            double dot = 0.0;
            for (std::size_t i = k; i < nrow; ++i) dot += v[i] * A[j][i];
            const double f = 2.0 * dot / vtv;
            for (std::size_t i = k; i < nrow; ++i) A[j][i] -= f * v[i];
        }
        double dot = 0.0;
        for (std::size_t i = k; i < nrow; ++i) dot += v[i] * rhs[i];
        const double f = 2.0 * dot / vtv;
        for (std::size_t i = k; i < nrow; ++i) rhs[i] -= f * v[i];
    }
    LstsqResult out;
    out.coef.assign(ncol, 0.0);
    for (std::size_t k = ncol; k-- > 0;) {
        double sum = rhs[k];
        for (std::size_t j = k + 1; j < ncol; ++j) sum -= A[j][k] * out.coef[j];
        out.coef[k] = sum / A[k][k];
    }
    double rn = 0.0;
    for (std::size_t i = ncol; i < nrow; ++i) rn += rhs[i] * rhs[i];
    out.residual_norm = std::sqrt(rn);
    return out;
}

// Straight-line fit y = c0 + c1*x; returns {c0, c1}.
inline LstsqResult line_fit(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> ones(x.size(), 1.0);
    return lstsq({ones, x}, y);
}

} // namespace gradblow
