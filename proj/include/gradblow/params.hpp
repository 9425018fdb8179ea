// Problem parameters for u_t = u_xx + mu*|u_x|^q + |u|^(p-1)u in one space
// dimension, with the gradient exponent locked to its critical value
// q = 2p/(p+1). The admissible range for the construction is p > 3, mu > 0;
// q then lies in (1,2) automatically.

#pragma once

#include <cmath>
#include <string>

#include "errors.hpp"

namespace gradblow {

struct Params {
    double p = 5.0;
    double mu = 1.0;

    // q is always derived from p, never stored independently.
    double q() const { return 2.0 * p / (p + 1.0); }

    void validate() const {
        if (!(std::isfinite(p) && std::isfinite(mu)))
            throw config_error("params: p and mu must be finite");
        if (!(p > 3.0))
            throw config_error("params: require p > 3 (got p = " + std::to_string(p) + ")");
        if (!(mu > 0.0))
            throw config_error("params: require mu > 0 (got mu = " + std::to_string(mu) + ")");
    }
};

} // namespace gradblow
