// Sampled function of y on a uniform symmetric grid at one similarity time.
//
// The grid is pinned symmetric about 0 with an odd point count so y = 0 is a
// node; the decomposition and the parity checks rely on both. Derivatives are
// 2nd-order centered stencils (one-sided at the two boundary nodes);
// off-node evaluation is 4-point Lagrange interpolation, which keeps the
// interpolation error at O(h^4) so quadrature-node sampling does not limit
// the mode projections.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"

namespace gradblow {

struct Field {
    double y_max = 0.0;
    int n = 0;
    double s = 0.0;
    std::vector<double> v;

    Field() = default;
    Field(double ymax, int npts, double stime)
        : y_max(ymax), n(npts), s(stime), v(static_cast<std::size_t>(npts), 0.0) {
        if (!(ymax > 0.0)) throw config_error("field: y_max must be positive");
        if (npts < 9 || npts % 2 == 0)
            throw config_error("field: need an odd point count >= 9");
    }

    double dy() const { return 2.0 * y_max / (n - 1); }
    double y(int i) const { return -y_max + i * dy(); }

    void assert_finite() const {
        for (double x : v)
            if (!std::isfinite(x))
                throw numerical_error("field: non-finite sample encountered");
    }
};

template <typename F>
Field sample_field(double ymax, int n, double s, F&& f) {
    Field out(ymax, n, s);
    for (int i = 0; i < n; ++i) out.v[i] = f(out.y(i));
    return out;
}

// 4-point Lagrange interpolation at y; requires |y| <= y_max.
inline double interp(const Field& f, double y) {
    if (std::fabs(y) > f.y_max * (1.0 + 1e-12))
        throw config_error("field interp: point outside grid (|y| = " + std::to_string(std::fabs(y)) +
                           ", y_max = " + std::to_string(f.y_max) + ")");
    const double h = f.dy();
    double u = (y + f.y_max) / h;
    int i1 = static_cast<int>(std::floor(u));
    // 4-point stencil i0..i3 around the interval [i1, i1+1], clamped at ends.
    int i0 = i1 - 1;
    if (i0 < 0) i0 = 0;
    if (i0 > f.n - 4) i0 = f.n - 4;
    const double t = u - i0;
    double acc = 0.0;
    for (int j = 0; j < 4; ++j) {
        double lj = 1.0;
        for (int k = 0; k < 4; ++k)
            if (k != j) lj *= (t - k) / (j - k);
        acc += lj * f.v[i0 + j];
    }
    return acc;
}

inline std::vector<double> deriv1(const Field& f) {
    const int n = f.n;
    const double h = f.dy();
    std::vector<double> d(n);
    d[0] = (-3.0 * f.v[0] + 4.0 * f.v[1] - f.v[2]) / (2.0 * h);
    for (int i = 1; i < n - 1; ++i) d[i] = (f.v[i + 1] - f.v[i - 1]) / (2.0 * h);
    d[n - 1] = (3.0 * f.v[n - 1] - 4.0 * f.v[n - 2] + f.v[n - 3]) / (2.0 * h);
    return d;
}

inline std::vector<double> deriv2(const Field& f) {
    const int n = f.n;
    const double h2 = f.dy() * f.dy();
    std::vector<double> d(n);
    d[0] = (2.0 * f.v[0] - 5.0 * f.v[1] + 4.0 * f.v[2] - f.v[3]) / h2;
    for (int i = 1; i < n - 1; ++i) d[i] = (f.v[i + 1] - 2.0 * f.v[i] + f.v[i - 1]) / h2;
    d[n - 1] = (2.0 * f.v[n - 1] - 5.0 * f.v[n - 2] + 4.0 * f.v[n - 3] - f.v[n - 4]) / h2;
    return d;
}

// Discrete L = d^2/dy^2 - (y/2) d/dy + 1. Interior nodes carry the centered
// 2nd-order stencil; the two boundary nodes use the one-sided variants.
inline Field apply_L(const Field& f) {
    if (f.n < 8) throw config_error("apply_L: grid too coarse");
    Field out = f;
    const auto d1 = deriv1(f);
    const auto d2 = deriv2(f);
    for (int i = 0; i < f.n; ++i)
        out.v[i] = d2[i] - 0.5 * f.y(i) * d1[i] + f.v[i];
    return out;
}

} // namespace gradblow
