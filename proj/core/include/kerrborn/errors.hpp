#ifndef KERRBORN_ERRORS_HPP
#define KERRBORN_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace kerrborn {

/// Invalid configuration: bad resolution, malformed scenario, out-of-range flag.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Mathematical domain violation (nonpositive mu, gamma <= 1/2, ...).
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Shape mismatch between a node function and the grid it is applied to.
class ShapeError : public std::invalid_argument {
public:
    explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Wavenumber too close to a Neumann eigenwavenumber of the background operator.
class ResonanceError : public std::runtime_error {
public:
    ResonanceError(const std::string& msg, double k, double eigenvalue)
        : std::runtime_error(msg), k(k), eigenvalue(eigenvalue) {}
    double k;
    double eigenvalue;  // offending eigenvalue of -Laplacian (k^2 nearby)
};

/// Fixed-point iteration failed to reach tolerance within max_iter.
class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& msg, std::vector<double> history)
        : std::runtime_error(msg), residual_history(std::move(history)) {}
    std::vector<double> residual_history;
};

}  // namespace kerrborn

#endif
