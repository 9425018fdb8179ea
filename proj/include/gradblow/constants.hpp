// Closed-form constants of the blow-up construction.
//
// Everything downstream keys off this single struct: kappa (the constant
// steady state), beta (the profile exponent), the projected gradient-term
// coefficients c0_tilde and c2_tilde, the inner-mode amplitude B, the outer
// curvature b, the offset a, and the classical (mu = 0) curvature b0 kept for
// comparison. Two independent derivation routes exist for the (a, b) pair:
//
//   route 1:  B from the moment integral I0 = int |y|^q rho dy, then a = 2B;
//   route 2:  b from its closed form in terms of J = int |y|^q e^(-y^2/4) dy,
//             then a = 2 b kappa / (p-1)^2.
//
// derive_constants computes both and enforces agreement to 1e-10 relative;
// disagreement means the moment quadrature is broken, and is reported as a
// numerical error rather than silently averaged away.

#pragma once

#include <cmath>
#include <numbers>

#include "errors.hpp"
#include "params.hpp"
#include "quadrature.hpp"

namespace gradblow {

struct ProfileConstants {
    double p = 0.0;
    double mu = 0.0;
    double q = 0.0;
    double kappa = 0.0;
    double beta = 0.0;
    double B = 0.0;
    double c0_tilde = 0.0;
    double c2_tilde = 0.0;
    double b = 0.0;
    double a = 0.0;
    double b0 = 0.0;
    double moment_I0 = 0.0;     // int |y|^q rho dy
    double moment_I2 = 0.0;     // int |y|^q (y^2 - 2) rho dy
    double consistency_rel = 0.0;
    double quadrature_tol = 0.0;
};

inline double sign_of(double x) { return x >= 0.0 ? 1.0 : -1.0; }

// Raw coefficient formulas, usable outside the validated mu > 0 regime
// (sign analyses probe mu = -1).
inline double c0_tilde_of(double p, double mu, double I0) {
    return mu * std::pow(2.0, 2.0 * p / (p + 1.0)) * I0;
}
inline double c2_tilde_of(double p, double mu, double I2) {
    return mu * std::pow(2.0, 2.0 * p / (p + 1.0)) * I2 / 8.0;
}

inline ProfileConstants derive_constants(const Params& params, double moment_tol = 1e-13) {
    params.validate();
    ProfileConstants c;
    c.p = params.p;
    c.mu = params.mu;
    c.q = params.q();
    const double p = c.p, mu = c.mu, q = c.q;
    c.kappa = std::pow(1.0 / (p - 1.0), 1.0 / (p - 1.0));
    c.beta = (p + 1.0) / (2.0 * (p - 1.0));
    c.b0 = (p - 1.0) * (p - 1.0) / (4.0 * p);

    const MomentResult m0 = fractional_moment(q, 0, moment_tol);
    const MomentResult m2 = fractional_moment(q, 1, moment_tol);
    c.moment_I0 = m0.value;
    c.moment_I2 = m2.value;
    c.quadrature_tol = std::max(m0.achieved_tol, m2.achieved_tol);
    if (c.quadrature_tol > 1e-10)
        throw numerical_error("derive_constants: moment quadrature above 1e-10", c.quadrature_tol);

    c.c0_tilde = c0_tilde_of(p, mu, c.moment_I0);
    c.c2_tilde = c2_tilde_of(p, mu, c.moment_I2);

    // Route 1: inner-mode amplitude and offset.
    c.B = std::pow(std::pow(2.0, q - 2.0) * q * (q - 1.0) * std::fabs(mu) * c.moment_I0,
                   -1.0 / (q - 1.0));
    c.a = 2.0 * sign_of(mu) * c.B;

    // Route 2: closed-form outer curvature via J = 2 sqrt(pi) I0.
    const double J = 2.0 * std::sqrt(std::numbers::pi) * c.moment_I0;
    c.b = 0.5 * std::pow(p - 1.0, (p - 2.0) / (p - 1.0)) *
          std::pow(2.0 * std::sqrt(std::numbers::pi) * (p + 1.0) * (p + 1.0) / (p * J),
                   (p + 1.0) / (p - 1.0)) *
          std::pow(mu, -(p + 1.0) / (p - 1.0));

    const double a_from_b = 2.0 * c.b * c.kappa / ((p - 1.0) * (p - 1.0));
    c.consistency_rel = std::fabs(c.a - a_from_b) / std::fabs(c.a);
    if (!(c.consistency_rel <= 1e-10))
        throw numerical_error("derive_constants: a = 2B vs 2 b kappa/(p-1)^2 disagree",
                              c.consistency_rel);
    return c;
}

// Parameter map between the unit-gradient-coefficient normalization
//   v_t = v_xx + |v_x|^q + nu |v|^(p-1) v
// and the unit-reaction normalization used everywhere else. The scaling
// v = lambda u with lambda = mu^(1/(q-1)) sends one into the other with
// nu = mu^(-(p+1)); the inverse is mu = nu^(-1/(p+1)).
struct VhjMap {
    double mu = 0.0;
    double lambda = 0.0;
    double nu = 0.0;
};

inline VhjMap vhj_param_map(double nu, double p) {
    if (!(p > 3.0)) throw config_error("vhj map: require p > 3");
    if (!(nu > 0.0)) throw config_error("vhj map: require nu > 0");
    VhjMap m;
    m.nu = nu;
    m.mu = std::pow(nu, -1.0 / (p + 1.0));
    const double q = 2.0 * p / (p + 1.0);
    m.lambda = std::pow(m.mu, 1.0 / (q - 1.0));
    return m;
}

inline double vhj_nu_from_mu(double mu, double p) {
    if (!(p > 3.0)) throw config_error("vhj map: require p > 3");
    if (!(mu > 0.0)) throw config_error("vhj map: require mu > 0");
    return std::pow(mu, -(p + 1.0));
}

} // namespace gradblow
