// Quadrature layer.
//
// Two rule families cover every integral in the project:
//
//  * A Gauss-Hermite rule mapped to the Gaussian weight
//    rho(y) = exp(-y^2/4)/sqrt(4*pi) via y = 2t. Exact for polynomial
//    integrands against rho up to degree 2*order-1; weights sum to 1.
//    Nodes and weights come from Golub-Welsch on the Jacobi matrix of the
//    physicists' Hermite recurrence.
//
//  * Fractional moments int |y|^qe * (y^2-2)^k rho(y) dy with non-integer
//    qe in (1,2). The |y|^qe cusp at the origin defeats Hermite rules (their
//    convergence degrades to algebraic), so the integral is regularized by
//    the substitution y = v^4, which makes the integrand C-infinity, and then
//    evaluated by composite 32-point Gauss-Legendre panels, doubling the
//    panel count until two successive values agree to 1e-13 relative.

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"

namespace gradblow {

// Neumaier-compensated accumulator. Quadrature sums against rho mix terms
// spanning many orders of magnitude; plain summation loses ~1e-10 absolute
// on the larger Hermite norms, which is exactly the scale the basis
// identities are checked at.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

// Nodes/weights against the weight rho(y) = exp(-y^2/4)/sqrt(4 pi).
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    int order() const { return static_cast<int>(nodes.size()); }
};

// Orthonormal Hermite recurrence (weight exp(-t^2)) evaluated at x: returns
// p_n(x), p_{n-1}(x), and the Christoffel sum over p_0..p_{n-1} squared.
namespace detail {
struct HermiteEval {
    double pn = 0.0;
    double pnm1 = 0.0;
    double christoffel = 0.0;
};

inline HermiteEval orthonormal_hermite(int n, double x) {
    HermiteEval ev;
    double pkm1 = 0.0;
    double pk = std::pow(std::numbers::pi, -0.25);
    ev.christoffel = pk * pk;
    for (int k = 0; k < n; ++k) {
        const double pkp1 =
            (x * pk - std::sqrt(0.5 * k) * pkm1) / std::sqrt(0.5 * (k + 1));
        pkm1 = pk;
        pk = pkp1;
        if (k + 1 < n) ev.christoffel += pk * pk;
    }
    ev.pn = pk;
    ev.pnm1 = pkm1;
    return ev;
}
} // namespace detail

// Gauss-Hermite rule for weight exp(-t^2): Golub-Welsch seeds the nodes,
// Newton on the orthonormal recurrence polishes them, and weights are
// rebuilt from Christoffel sums at the polished roots. The eigensolver
// alone leaves ~1e-14 node error, which the growth of the high basis
// polynomials amplifies past the scale the basis identities are checked at.
inline void gauss_hermite(int n, std::vector<double>& t, std::vector<double>& w) {
    if (n < 1) throw config_error("gauss_hermite: order must be positive");
    std::vector<double> d(n, 0.0), e(n, 0.0);
    for (int k = 1; k < n; ++k) e[k - 1] = std::sqrt(0.5 * k);
    std::vector<double> z(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i) * n + i] = 1.0;
    tridiag_eigen(d, e, z);
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int i = 1; i < n; ++i)
        for (int j = i; j > 0 && d[idx[j - 1]] > d[idx[j]]; --j)
            std::swap(idx[j - 1], idx[j]);
    t.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = d[idx[i]];
        detail::HermiteEval ev;
        for (int it = 0; it < 8; ++it) {
            ev = detail::orthonormal_hermite(n, x);
            const double deriv = std::sqrt(2.0 * n) * ev.pnm1;
            const double dx = ev.pn / deriv;
            x -= dx;
            if (std::fabs(dx) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                    std::max(1.0, std::fabs(x)))
                break;
        }
        ev = detail::orthonormal_hermite(n, x);
        t[i] = x;
        w[i] = 1.0 / ev.christoffel;
    }
    // Enforce the exact symmetry of the rule.
    for (int i = 0; i < n / 2; ++i) {
        const int j = n - 1 - i;
        const double node = 0.5 * (t[j] - t[i]);
        t[i] = -node;
        t[j] = node;
        const double wm = 0.5 * (w[i] + w[j]);
        w[i] = wm;
        w[j] = wm;
    }
    if (n % 2 == 1) t[n / 2] = 0.0;
}

inline QuadratureRule make_rho_rule(int order) {
    std::vector<double> t, w;
    gauss_hermite(order, t, w);
    QuadratureRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
    for (int i = 0; i < order; ++i) {
        rule.nodes[i] = 2.0 * t[i];
        rule.weights[i] = w[i] * inv_sqrt_pi;
    }
    return rule;
}

// int f(y) rho(y) dy by the rho-mapped rule.
template <typename F>
double integrate_rho(const QuadratureRule& rule, F&& f) {
    CompensatedSum acc;
    for (int i = 0; i < rule.order(); ++i) acc.add(rule.weights[i] * f(rule.nodes[i]));
    return acc.value();
}

// Gauss-Legendre rule on [-1,1], Newton iteration on the Legendre recurrence.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (t * p0 - p1) / (t * t - 1.0);
            const double dt = p0 / pp;
            t -= dt;
            if (std::fabs(dt) < 1e-15) break;
        }
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

struct MomentResult {
    double value = 0.0;
    double achieved_tol = 0.0;
    int panels = 0;
};

// int_R |y|^qe (y^2 - 2)^k rho(y) dy for non-integer qe > -1.
// Substitution y = v^4 removes the cusp; composite GL(32) panels on
// [0, vmax] with vmax chosen so the discarded tail is below 1e-60.
inline MomentResult fractional_moment(double qe, int k, double rel_tol = 1e-13) {
    constexpr int m = 4;
    const double vmax = std::pow(4.0 * 140.0, 1.0 / (2.0 * m));
    static const auto gl = [] {
        std::vector<double> x, w;
        gauss_legendre(32, x, w);
        return std::pair{x, w};
    }();
    const auto& [glx, glw] = gl;
    auto integrand = [&](double v) {
        const double v2m = std::pow(v, 2 * m);
        double poly = 1.0;
        for (int j = 0; j < k; ++j) poly *= (v2m - 2.0);
        return std::pow(v, m * (qe + 1.0) - 1.0) * poly * std::exp(-0.25 * v2m);
    };
    const double pref = m / std::sqrt(std::numbers::pi);
    double prev = 0.0;
    bool have_prev = false;
    for (int panels = 2; panels <= 2048; panels *= 2) {
        double acc = 0.0;
        const double h = vmax / panels;
        for (int pnl = 0; pnl < panels; ++pnl) {
            const double a = pnl * h;
            double local = 0.0;
            for (std::size_t i = 0; i < glx.size(); ++i)
                local += glw[i] * integrand(a + 0.5 * h * (glx[i] + 1.0));
            acc += 0.5 * h * local;
        }
        const double value = pref * acc;
        if (have_prev) {
            const double diff = std::fabs(value - prev) / std::max(1e-300, std::fabs(value));
            if (diff <= rel_tol) return {value, diff, panels};
        }
        prev = value;
        have_prev = true;
    }
    throw numerical_error("fractional_moment: panel doubling did not converge", rel_tol);
}

} // namespace gradblow
