#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sofi/errors.hpp"

namespace sofi {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;

/// Standard normal density.
inline double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi);
}

/// Standard normal CDF via erfc; accurate in both tails.
inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / kSqrt2);
}

/// Adaptive Gauss-Kronrod integration with an absolute tolerance target.
template <typename F>
double integrate(F&& f, double a, double b, double abs_tol) {
    double err = 0.0;
    double val = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        std::forward<F>(f), a, b, 15, abs_tol, &err);
    if (!(std::isfinite(val)) || err > std::max(abs_tol, 1e-10 * std::abs(val)) * 100.0)
        throw NumericError("quadrature failed to reach the requested tolerance");
    return val;
}

namespace detail {

// Stirling numbers of the second kind up to n = 8.
inline constexpr int kMaxMomentOrder = 8;

inline const std::array<std::array<double, kMaxMomentOrder + 1>, kMaxMomentOrder + 1>&
stirling2_table() {
    static const auto table = [] {
        std::array<std::array<double, kMaxMomentOrder + 1>, kMaxMomentOrder + 1> s{};
        s[0][0] = 1.0;
        for (int n = 1; n <= kMaxMomentOrder; ++n)
            for (int k = 1; k <= n; ++k)
                s[n][k] = k * s[n - 1][k] + s[n - 1][k - 1];
        return s;
    }();
    return table;
}

} // namespace detail

/// Raw moment E[X^k] of a Poisson variable with mean nu, as the Stirling
/// polynomial sum_i S(k,i) nu^i.  Supports k up to 8.
inline double poisson_raw_moment(int k, double nu) {
    if (k < 0 || k > detail::kMaxMomentOrder)
        throw UnsupportedSchemeError("poisson_raw_moment supports orders 0..8");
    if (nu < 0.0) throw std::invalid_argument("poisson_raw_moment: nu must be >= 0");
    const auto& s = detail::stirling2_table();
    double acc = 0.0;
    for (int i = k; i >= 1; --i) acc = (acc + s[k][i]) * nu;
    return k == 0 ? 1.0 : acc;
}

/// d/dnu of poisson_raw_moment(k, nu).
inline double poisson_raw_moment_dnu(int k, double nu) {
    if (k < 0 || k > detail::kMaxMomentOrder)
        throw UnsupportedSchemeError("poisson_raw_moment supports orders 0..8");
    if (k == 0) return 0.0;
    const auto& s = detail::stirling2_table();
    double acc = 0.0;
    for (int i = k; i >= 1; --i) acc = acc * nu + i * s[k][i];
    return acc;
}

} // namespace sofi
