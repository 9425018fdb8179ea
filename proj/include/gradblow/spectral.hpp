// Linearization of the similarity-variables equation around the gradient
// profile, and the weighted-space decomposition of the difference field.
//
// Writing w = phi + v, the evolution of v is
//
//   dv/ds = (L + V) v + B(v) + G(v) + R,
//
// with L = d^2/dy^2 - (y/2) d/dy + 1 acting through apply_L, V the potential
// from linearizing |w|^{p-1} w, B and G the quadratic-and-higher remainders of
// the reaction and gradient terms, and R the profile's own residual. The
// decomposition splits v into a compactly supported part v_b = chi v and an
// outer part v_e = (1-chi) v, expands v_b in the first three Hermite modes,
// and measures the remainder in the |y|^3-weighted sup norm. The shrink-set
// bounds encode the bootstrap region in which v is controlled; membership is
// checked against them with a tolerance on the boundary.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "constants.hpp"
#include "field.hpp"
#include "hermite.hpp"
#include "profile.hpp"
#include "quadrature.hpp"

namespace gradblow {

// --- smooth cutoff -----------------------------------------------------------

// C^inf bump transition: chi0 = 1 on r <= 1, 0 on r >= 2, strictly monotone
// between. Built from g(t) = exp(-1/t) for t > 0.
inline double cutoff_chi0(double r) {
    auto g = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
    const double a = g(2.0 - r);
    const double b = g(r - 1.0);
    if (a == 0.0 && b == 0.0) return r <= 1.0 ? 1.0 : 0.0;
    return a / (a + b);
}

// Cutoff at the self-similar scale: chi(y, s) = chi0(|y| / (K s^beta)).
inline double cutoff_chi(double y, double s, double K, const ProfileConstants& c) {
    require_similarity_time(s);
    if (!(K > 0.0)) throw config_error("cutoff_chi: K must be positive");
    return cutoff_chi0(std::fabs(y) / (K * std::pow(s, c.beta)));
}

// --- linearization pieces ----------------------------------------------------

// V = p phi^{p-1} - p/(p-1): the zeroth-order potential of the reaction term.
inline double potential_V(double y, double s, const ProfileConstants& c) {
    const double ph = phi(y, s, c);
    return c.p * std::pow(ph, c.p - 1.0) - c.p / (c.p - 1.0);
}

// B(v) = |phi + v|^{p-1}(phi + v) - phi^p - p phi^{p-1} v: reaction remainder,
// quadratic in v near 0.
inline double nonlinear_B(double v, double y, double s, const ProfileConstants& c) {
    const double ph = phi(y, s, c);
    const double w = ph + v;
    return std::pow(std::fabs(w), c.p - 1.0) * w - std::pow(ph, c.p) -
           c.p * std::pow(ph, c.p - 1.0) * v;
}

// G(v) = mu |phi' + v'|^q - mu |phi'|^q: gradient-term remainder. Linear in v'
// at leading order since phi' != 0 away from y = 0.
inline double nonlinear_G(double dv, double y, double s, const ProfileConstants& c) {
    const double gp = grad_phi(y, s, c);
    return c.mu * std::pow(std::fabs(gp + dv), c.q) - c.mu * std::pow(std::fabs(gp), c.q);
}

// R = phi_yy - (y/2) phi_y - phi/(p-1) + phi^p - phi_s + mu |phi_y|^q:
// the residual of the profile under the full flow. The time-independent part
// of phi (the z = y/s^beta shape alone) cancels the first three terms against
// phi^p exactly; what is left decays like 1/s uniformly.
inline double residual_R(double y, double s, const ProfileConstants& c) {
    const double ph = phi(y, s, c);
    const double gp = grad_phi(y, s, c);
    return grad2_phi(y, s, c) - 0.5 * y * gp - ph / (c.p - 1.0) + std::pow(ph, c.p) -
           dphi_ds(y, s, c) + c.mu * std::pow(std::fabs(gp), c.q);
}

// --- decomposition -----------------------------------------------------------

struct ModeVector {
    double v0 = 0.0;      // Hermite mode 0 of chi v
    double v1 = 0.0;      // Hermite mode 1 of chi v
    double v2 = 0.0;      // Hermite mode 2 of chi v
    double vminus = 0.0;  // sup |v_-(y)| / (1 + |y|^3) over the cutoff support
    double ve = 0.0;      // sup |(1 - chi) v| over the grid
    double s = 0.0;
    double K = 0.0;
};

// Split a difference field v into modes. The field must cover the cutoff
// support [-2K s^beta, 2K s^beta]; the quadrature rule supplies the nodes for
// the rho-weighted projections.
inline ModeVector decompose(const Field& vf, double K, const ProfileConstants& c,
                            const QuadratureRule& rule,
                            const HermiteBasis& basis = default_basis()) {
    const double s = vf.s;
    require_similarity_time(s);
    const double support = 2.0 * K * std::pow(s, c.beta);
    if (vf.y_max < support * (1.0 - 1e-12))
        throw config_error("decompose: grid does not cover the cutoff support");

    auto vb = [&](double y) { return cutoff_chi(y, s, K, c) * interp(vf, y); };

    ModeVector out;
    out.s = s;
    out.K = K;
    const auto modes = project_modes(vb, rule, 2, basis);
    out.v0 = modes[0];
    out.v1 = modes[1];
    out.v2 = modes[2];

    // v_- = v_b - sum modes, measured against 1 + |y|^3 on the support.
    double sup_minus = 0.0;
    double sup_e = 0.0;
    for (int i = 0; i < vf.n; ++i) {
        const double y = vf.y(i);
        const double chi = cutoff_chi(y, s, K, c);
        const double vbv = chi * vf.v[i];
        if (std::fabs(y) <= support) {
            double expansion = out.v0 * basis.eval(0, y) + out.v1 * basis.eval(1, y) +
                               out.v2 * basis.eval(2, y);
            const double w = std::fabs(vbv - expansion) / (1.0 + std::fabs(y * y * y));
            sup_minus = std::max(sup_minus, w);
        }
        sup_e = std::max(sup_e, std::fabs((1.0 - chi) * vf.v[i]));
    }
    out.vminus = sup_minus;
    out.ve = sup_e;
    return out;
}

// --- shrink set --------------------------------------------------------------

// Admissible interval for the remainder decay rate gamma at given p:
// (3 beta, min(5 beta - 1, 2 beta + 1)), nonempty for all p > 3.
struct GammaInterval {
    double lo = 0.0;
    double hi = 0.0;
};

inline GammaInterval gamma_interval(const ProfileConstants& c) {
    GammaInterval g;
    g.lo = 3.0 * c.beta;
    g.hi = std::min(5.0 * c.beta - 1.0, 2.0 * c.beta + 1.0);
    return g;
}

inline void require_gamma(double gamma, const ProfileConstants& c) {
    const auto g = gamma_interval(c);
    if (!(gamma > g.lo && gamma < g.hi))
        throw config_error("gamma outside the admissible interval (" + std::to_string(g.lo) +
                           ", " + std::to_string(g.hi) + ")");
}

inline double default_gamma(const ProfileConstants& c) {
    const auto g = gamma_interval(c);
    return 0.5 * (g.lo + g.hi);
}

struct ShrinkBounds {
    double b01 = 0.0;    // |v0|, |v1| <= A / s^{2 beta + 1}
    double b2 = 0.0;     // |v2| <= sqrt(A) / s^{4 beta - 1}
    double bminus = 0.0; // weighted sup of v_- <= A / s^gamma
    double be = 0.0;     // sup of v_e <= A^2 / s^{gamma - 3 beta}
};

inline ShrinkBounds shrink_bounds(double s, double A, double gamma,
                                  const ProfileConstants& c) {
    require_similarity_time(s);
    if (!(A > 0.0)) throw config_error("shrink_bounds: A must be positive");
    require_gamma(gamma, c);
    ShrinkBounds b;
    b.b01 = A / std::pow(s, 2.0 * c.beta + 1.0);
    b.b2 = std::sqrt(A) / std::pow(s, 4.0 * c.beta - 1.0);
    b.bminus = A / std::pow(s, gamma);
    b.be = A * A / std::pow(s, gamma - 3.0 * c.beta);
    return b;
}

// Which bound a mode vector violates first; empty string means inside.
inline std::string shrink_violation(const ModeVector& m, double A, double gamma,
                                    const ProfileConstants& c, double rel_slack = 0.0) {
    const auto b = shrink_bounds(m.s, A, gamma, c);
    const double f = 1.0 + rel_slack;
    if (std::fabs(m.v0) > b.b01 * f) return "v0";
    if (std::fabs(m.v1) > b.b01 * f) return "v1";
    if (std::fabs(m.v2) > b.b2 * f) return "v2";
    if (m.vminus > b.bminus * f) return "vminus";
    if (m.ve > b.be * f) return "ve";
    return "";
}

inline bool in_shrink_set(const ModeVector& m, double A, double gamma,
                          const ProfileConstants& c, double rel_slack = 0.0) {
    return shrink_violation(m, A, gamma, c, rel_slack).empty();
}

} // namespace gradblow
