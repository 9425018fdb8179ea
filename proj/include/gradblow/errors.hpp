// Error taxonomy for the laboratory.
//
// config_error    : invalid parameters or configuration, detected before any
//                   numerics run. CLI maps these to exit code 2.
// numerical_error : a computation started and failed to converge or produced
//                   non-finite values. Carries the achieved tolerance when one
//                   is known. CLI maps these to exit code 1.

#pragma once

#include <stdexcept>
#include <string>

namespace gradblow {

class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what, double achieved = -1.0)
        : std::runtime_error(what), achieved_tolerance(achieved) {}
    double achieved_tolerance;
};

} // namespace gradblow
