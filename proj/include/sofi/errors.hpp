#pragma once

#include <stdexcept>
#include <string>

namespace sofi {

/// Raised when the pixel grid fails to capture the required photon mass.
class CoverageError : public std::runtime_error {
public:
    CoverageError(const std::string& msg, double achieved_mass)
        : std::runtime_error(msg), achieved_mass(achieved_mass) {}
    double achieved_mass;
};

/// Raised when a covariance matrix carries no usable statistical directions.
class DegenerateSummaryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a scheme/model combination is outside the supported set.
class UnsupportedSchemeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when quadrature or another numerical routine fails to converge.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by the centroid weight solver on a singular system.
class IllConditionedWeightsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sofi
