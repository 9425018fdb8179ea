// Constants derivation and profile family. Golden values at (p, mu) = (5, 1)
// are frozen to 17 significant digits from an independent high-precision
// evaluation; agreement is required to near machine precision. Profile
// derivatives are checked against central finite differences.

#include <catch_amalgamated.hpp>

#include <cmath>

#include "gradblow/constants.hpp"
#include "gradblow/profile.hpp"

using namespace gradblow;

namespace {

double rel_diff(double a, double b) {
    return std::fabs(a - b) / std::max(std::fabs(a), std::fabs(b));
}

} // namespace

TEST_CASE("golden constants at p = 5, mu = 1") {
    const ProfileConstants c = derive_constants({5.0, 1.0});
    REQUIRE(rel_diff(c.q, 1.6666666666666667) < 1e-15);
    REQUIRE(rel_diff(c.kappa, 0.70710678118654757) < 1e-14);
    REQUIRE(c.beta == 0.75);
    REQUIRE(rel_diff(c.moment_I0, 1.5994962185637620) < 1e-13);
    REQUIRE(rel_diff(c.moment_I2, 5.3316540618792067) < 1e-13);
    REQUIRE(rel_diff(c.c0_tilde, 5.0780839599345464) < 1e-13);
    REQUIRE(rel_diff(c.c2_tilde, 2.1158683166393946) < 1e-13);
    REQUIRE(rel_diff(c.B, 0.59690323890665198) < 1e-13);
    REQUIRE(rel_diff(c.b, 13.506378494179447) < 1e-13);
    REQUIRE(rel_diff(c.a, 1.1938064778133040) < 1e-13);
    REQUIRE(c.b0 == 0.8);
    REQUIRE(c.consistency_rel < 1e-10);
}

TEST_CASE("cross-route consistency holds across the parameter range") {
    for (double p : {3.5, 4.0, 5.0, 7.0, 10.0, 20.0})
        for (double mu : {0.25, 1.0, 4.0}) {
            const ProfileConstants c = derive_constants({p, mu});
            REQUIRE(c.consistency_rel < 1e-10);
            REQUIRE(c.beta > 0.5);
            REQUIRE(c.beta < 1.0);
            REQUIRE(c.B > 0.0);
            REQUIRE(c.b > 0.0);
            REQUIRE(c.c0_tilde > 0.0);
            REQUIRE(c.c2_tilde > 0.0);
        }
}

TEST_CASE("profile curvature b decreases as the gradient coupling grows") {
    double prev = 1e300;
    for (double mu : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        const double b = derive_constants({5.0, mu}).b;
        REQUIRE(b < prev);
        prev = b;
    }
}

TEST_CASE("parameter validation rejects out-of-scope inputs") {
    REQUIRE_THROWS_AS(derive_constants({3.0, 1.0}), config_error);
    REQUIRE_THROWS_AS(derive_constants({5.0, -1.0}), config_error);
    REQUIRE_THROWS_AS(derive_constants({5.0, 0.0}), config_error);
    REQUIRE_THROWS_AS(derive_constants({2.5, 1.0}), config_error);
}

TEST_CASE("golden profile point values at p = 5, mu = 1") {
    const ProfileConstants c = derive_constants({5.0, 1.0});
    REQUIRE(rel_diff(phi0(1.0, c), 0.48887848125745740) < 1e-13);
    REQUIRE(rel_diff(phi(0.0, 100.0, c), 0.70830058766436090) < 1e-13);
    // phi(0, s) = kappa + a/s^{2 beta}: the correction decays.
    REQUIRE(std::fabs(phi(0.0, 1e6, c) - c.kappa) < 1e-8);
}

TEST_CASE("profile derivatives match finite differences") {
    const ProfileConstants c = derive_constants({5.0, 1.0});
    const double h = 1e-5;
    for (double s : {30.0, 100.0, 400.0})
        for (double y : {0.0, 1.0, 5.0, 20.0, 60.0}) {
            const double dy_fd = (phi(y + h, s, c) - phi(y - h, s, c)) / (2.0 * h);
            const double d2y_fd =
                (phi(y + h, s, c) - 2.0 * phi(y, s, c) + phi(y - h, s, c)) / (h * h);
            const double hs = 1e-4 * s;
            const double ds_fd = (phi(y, s + hs, c) - phi(y, s - hs, c)) / (2.0 * hs);
            REQUIRE(std::fabs(grad_phi(y, s, c) - dy_fd) < 1e-8);
            REQUIRE(std::fabs(grad2_phi(y, s, c) - d2y_fd) < 1e-5);
            REQUIRE(std::fabs(dphi_ds(y, s, c) - ds_fd) < 1e-9);
        }
}

TEST_CASE("classical one-dimensional shape uses slope 4/5 of p - 1") {
    const Params params{5.0, 1.0};
    // f0(x) = (p - 1 + b0 x^2)^{-1/(p-1)} with b0 = (p-1)^2/(4p).
    const double b0 = 16.0 / 20.0;
    for (double x : {0.0, 0.5, 2.0}) {
        const double want = std::pow(4.0 + b0 * x * x, -0.25);
        REQUIRE(rel_diff(classical_profile_f0(x, params), want) < 1e-14);
    }
}

TEST_CASE("gradient-coupling normalization round trip") {
    for (double p : {4.0, 5.0, 7.0}) {
        // Coefficient pair: nu = mu^{-(p+1)} and back.
        for (double mu : {0.5, 1.0, 3.0}) {
            const double nu = vhj_nu_from_mu(mu, p);
            REQUIRE(rel_diff(nu, std::pow(mu, -(p + 1.0))) < 1e-12);
            const VhjMap m = vhj_param_map(nu, p);
            REQUIRE(rel_diff(m.mu, mu) < 1e-12);
            // lambda = mu^{1/(q-1)} with q = 2p/(p+1).
            const double q = 2.0 * p / (p + 1.0);
            REQUIRE(rel_diff(m.lambda, std::pow(mu, 1.0 / (q - 1.0))) < 1e-12);
        }
    }
}

TEST_CASE("similarity-time guard") {
    const ProfileConstants c = derive_constants({5.0, 1.0});
    REQUIRE_THROWS_AS(phi(0.0, 0.5, c), config_error);
    REQUIRE_THROWS_AS(phi(0.0, -2.0, c), config_error);
}
