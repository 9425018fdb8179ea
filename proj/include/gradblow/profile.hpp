// The blow-up profile in similarity variables and its analytic derivatives.
//
//   phi0(z)   = (p - 1 + b z^2)^(-1/(p-1))          outer shape, z = y/s^beta
//   phi(y,s)  = phi0(y/s^beta) + a/s^(2 beta)        matched full profile
//   f0(x)     = (p - 1 + b0 x^2)^(-1/(p-1))          classical mu = 0 shape,
//                                                    variable x = y/sqrt(s)
//
// The y- and s-derivatives of phi are closed-form; the residual and the
// linearized potential consume them, so they are differentiated here once
// rather than by stencils. Similarity time is restricted to s > 1 so the
// powers s^beta, s^(2 beta) and log s are unambiguous.

#pragma once

#include <cmath>

#include "constants.hpp"
#include "errors.hpp"

namespace gradblow {

inline void require_similarity_time(double s) {
    if (!(s > 1.0))
        throw config_error("profile: similarity time must satisfy s > 1");
}

inline double phi0(double z, const ProfileConstants& c) {
    return std::pow(c.p - 1.0 + c.b * z * z, -1.0 / (c.p - 1.0));
}

inline double phi(double y, double s, const ProfileConstants& c) {
    require_similarity_time(s);
    const double sb = std::pow(s, c.beta);
    return phi0(y / sb, c) + c.a / (sb * sb);
}

// d(phi)/dy = -(2b/(p-1)) * (y/s^(2 beta)) * D^(-p/(p-1)),
// D = p - 1 + b y^2 / s^(2 beta).
inline double grad_phi(double y, double s, const ProfileConstants& c) {
    require_similarity_time(s);
    const double s2b = std::pow(s, 2.0 * c.beta);
    const double D = c.p - 1.0 + c.b * y * y / s2b;
    return -(2.0 * c.b / (c.p - 1.0)) * (y / s2b) * std::pow(D, -c.p / (c.p - 1.0));
}

inline double grad2_phi(double y, double s, const ProfileConstants& c) {
    require_similarity_time(s);
    const double p = c.p;
    const double s2b = std::pow(s, 2.0 * c.beta);
    const double D = p - 1.0 + c.b * y * y / s2b;
    const double Dp = std::pow(D, -p / (p - 1.0));
    const double Dq = std::pow(D, -(2.0 * p - 1.0) / (p - 1.0));
    return -(2.0 * c.b / ((p - 1.0) * s2b)) * Dp +
           (4.0 * c.b * c.b * p * y * y / ((p - 1.0) * (p - 1.0) * s2b * s2b)) * Dq;
}

inline double dphi_ds(double y, double s, const ProfileConstants& c) {
    require_similarity_time(s);
    const double p = c.p;
    const double s2b = std::pow(s, 2.0 * c.beta);
    const double D = p - 1.0 + c.b * y * y / s2b;
    const double Dp = std::pow(D, -p / (p - 1.0));
    return (2.0 * c.beta * c.b * y * y / ((p - 1.0) * s2b * s)) * Dp -
           2.0 * c.beta * c.a / (s2b * s);
}

inline double classical_profile_f0(double x, const Params& params) {
    const double p = params.p;
    const double b0 = (p - 1.0) * (p - 1.0) / (4.0 * p);
    return std::pow(p - 1.0 + b0 * x * x, -1.0 / (p - 1.0));
}

} // namespace gradblow
