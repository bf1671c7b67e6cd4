#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ellipsde {

/// Argument outside an operation's domain (bad grid, off-node endpoint, NaN input).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Parameter combination the implementation does not support (e.g. H <= 1/2 for |H| products).
class UnsupportedParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Floating-point failure such as a covariance that is not positive definite.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fixed-point iteration failed to contract; carries the observed ratio history.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, std::vector<double> ratios)
        : std::runtime_error(what), ratios_(std::move(ratios)) {}

    const std::vector<double>& ratios() const noexcept { return ratios_; }

private:
    std::vector<double> ratios_;
};

}  // namespace ellipsde
