// Hermite machinery for the weight rho(y) = exp(-y^2/4)/sqrt(4 pi).
//
// The eigenfunctions of L = d^2/dy^2 - (y/2) d/dy + 1 are the dilated
// Hermite polynomials h_m, monic, with h_0 = 1, h_1 = y, h_2 = y^2 - 2 and
// recurrence h_{m+1} = y h_m - 2m h_{m-1}; the eigenvalue of h_m is 1 - m/2
// and <h_n, h_m>_rho = 2^n n! delta_nm. Coefficients are kept as exact
// integers (safe in 64 bits through degree 20, checked at construction)
// because the alternating explicit sum is the cancellation-prone path.

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "errors.hpp"
#include "quadrature.hpp"

namespace gradblow {

class HermiteBasis {
public:
    explicit HermiteBasis(int max_degree = 20) : max_degree_(max_degree) {
        if (max_degree < 1 || max_degree > 20)
            throw config_error("hermite basis: integer coefficients certified only up to degree 20");
        coeff_.resize(max_degree + 1);
        coeff_[0] = {1};
        coeff_[1] = {0, 1};
        for (int m = 1; m < max_degree; ++m) {
            std::vector<std::int64_t> next(m + 2, 0);
            for (int k = 0; k <= m; ++k) next[k + 1] += coeff_[m][k];
            for (std::size_t k = 0; k < coeff_[m - 1].size(); ++k)
                next[k] -= 2ll * m * coeff_[m - 1][k];
            coeff_[m + 1] = std::move(next);
        }
    }

    int max_degree() const { return max_degree_; }

    const std::vector<std::int64_t>& coefficients(int m) const {
        check_degree(m);
        return coeff_[m];
    }

    double eval(int m, double y) const {
        check_degree(m);
        const auto& c = coeff_[m];
        double acc = 0.0;
        for (std::size_t k = c.size(); k-- > 0;) acc = acc * y + static_cast<double>(c[k]);
        return acc;
    }

    // <h_m, h_m>_rho = 2^m m!
    static double norm_sq(int m) {
        double acc = 1.0;
        for (int k = 1; k <= m; ++k) acc *= 2.0 * k;
        return acc;
    }

private:
    void check_degree(int m) const {
        if (m < 0 || m > max_degree_)
            throw config_error("hermite basis: degree out of range");
    }
    int max_degree_;
    std::vector<std::vector<std::int64_t>> coeff_;
};

inline const HermiteBasis& default_basis() {
    static const HermiteBasis basis(20);
    return basis;
}

inline double hermite_eval(int m, double y) { return default_basis().eval(m, y); }

inline double weight_rho(double y) {
    return std::exp(-0.25 * y * y) / std::sqrt(4.0 * std::numbers::pi);
}

// <f, g>_rho for callables.
template <typename F, typename G>
double inner_product_rho(F&& f, G&& g, const QuadratureRule& rule) {
    CompensatedSum acc;
    for (int i = 0; i < rule.order(); ++i) {
        const double y = rule.nodes[i];
        acc.add(rule.weights[i] * f(y) * g(y));
    }
    return acc.value();
}

// Projection coefficients c_m = <f, h_m>_rho / (2^m m!) for m = 0..mmax.
template <typename F>
std::vector<double> project_modes(F&& f, const QuadratureRule& rule, int mmax,
                                  const HermiteBasis& basis = default_basis()) {
    std::vector<CompensatedSum> acc(mmax + 1);
    for (int i = 0; i < rule.order(); ++i) {
        const double y = rule.nodes[i];
        const double wf = rule.weights[i] * f(y);
        for (int m = 0; m <= mmax; ++m) acc[m].add(wf * basis.eval(m, y));
    }
    std::vector<double> c(mmax + 1, 0.0);
    for (int m = 0; m <= mmax; ++m) c[m] = acc[m].value() / HermiteBasis::norm_sq(m);
    return c;
}

} // namespace gradblow
