// Embedded Runge-Kutta 4(5) with the Cash-Karp tableau and standard
// PI-free step control: accept when the component-wise error ratio is <= 1,
// scale the step by 0.9 * ratio^{-1/5} clipped to [0.2, 5].
//
// The state is a fixed-size array; the right-hand side is any callable
// (s, state) -> state. Long integrations over many decades in s are the
// intended use, so the step is additionally capped at a fixed fraction of s
// by the caller when resolving power laws matters.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "errors.hpp"

namespace gradblow {

template <std::size_t N>
using RkState = std::array<double, N>;

struct RkControls {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    double h_init = 1e-4;
    double h_min = 1e-14;
    std::size_t max_steps = 50'000'000;
};

// One adaptive step from (s, y): advances s and y in place, returns the step
// actually taken and updates h to the proposed next step.
template <std::size_t N, typename RHS>
double rk45_step(double& s, RkState<N>& y, double& h, double h_cap, RHS&& f,
                 const RkControls& ctl) {
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 3.0 / 10.0, a42 = -9.0 / 10.0, a43 = 6.0 / 5.0;
    static constexpr double a51 = -11.0 / 54.0, a52 = 5.0 / 2.0, a53 = -70.0 / 27.0,
                            a54 = 35.0 / 27.0;
    static constexpr double a61 = 1631.0 / 55296.0, a62 = 175.0 / 512.0,
                            a63 = 575.0 / 13824.0, a64 = 44275.0 / 110592.0,
                            a65 = 253.0 / 4096.0;
    static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 3.0 / 5.0, c5 = 1.0,
                            c6 = 7.0 / 8.0;
    static constexpr double b1 = 37.0 / 378.0, b3 = 250.0 / 621.0, b4 = 125.0 / 594.0,
                            b6 = 512.0 / 1771.0;
    static constexpr double d1 = 2825.0 / 27648.0, d3 = 18575.0 / 48384.0,
                            d4 = 13525.0 / 55296.0, d5 = 277.0 / 14336.0, d6 = 1.0 / 4.0;

    for (std::size_t attempt = 0; attempt < 64; ++attempt) {
        const double hs = std::min(h, h_cap);
        RkState<N> k1 = f(s, y);
        RkState<N> t;

        for (std::size_t i = 0; i < N; ++i) t[i] = y[i] + hs * a21 * k1[i];
        RkState<N> k2 = f(s + c2 * hs, t);
        for (std::size_t i = 0; i < N; ++i) t[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
        RkState<N> k3 = f(s + c3 * hs, t);
        for (std::size_t i = 0; i < N; ++i)
            t[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        RkState<N> k4 = f(s + c4 * hs, t);
        for (std::size_t i = 0; i < N; ++i)
            t[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        RkState<N> k5 = f(s + c5 * hs, t);
        for (std::size_t i = 0; i < N; ++i)
            t[i] = y[i] +
                   hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        RkState<N> k6 = f(s + c6 * hs, t);

        RkState<N> y5, y4;
        for (std::size_t i = 0; i < N; ++i) {
            y5[i] = y[i] + hs * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b6 * k6[i]);
            y4[i] = y[i] + hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i]);
        }

        double ratio = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double scale =
                ctl.abs_tol + ctl.rel_tol * std::max(std::fabs(y[i]), std::fabs(y5[i]));
            ratio = std::max(ratio, std::fabs(y5[i] - y4[i]) / scale);
        }

        if (ratio <= 1.0 || hs <= ctl.h_min) {
            s += hs;
            y = y5;
            const double grow = ratio > 0.0 ? 0.9 * std::pow(ratio, -0.2) : 5.0;
            h = hs * std::clamp(grow, 0.2, 5.0);
            h = std::max(h, ctl.h_min);
            return hs;
        }
        h = std::max(hs * std::clamp(0.9 * std::pow(ratio, -0.2), 0.2, 1.0), ctl.h_min);
    }
    throw numerical_error("rk45: step size control failed to converge");
}

} // namespace gradblow
