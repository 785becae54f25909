#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace osmosis {

/// Bad caller input: inconsistent grids, out-of-range indices, invalid parameters.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Bad data values (non-finite pixels, unreadable files).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Explicit step requested with a time step above the positivity threshold.
class StabilityError : public std::runtime_error {
public:
    StabilityError(double tau, double bound)
        : std::runtime_error("explicit step tau=" + std::to_string(tau) +
                             " exceeds stability bound 1/max|a_ii|=" + std::to_string(bound)),
          tau_(tau), bound_(bound) {}

    double tau() const noexcept { return tau_; }
    double bound() const noexcept { return bound_; }

private:
    double tau_;
    double bound_;
};

/// Iterative linear solve ran out of iterations.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(std::size_t iterations, double residual)
        : std::runtime_error("linear solver did not converge after " + std::to_string(iterations) +
                             " iterations (relative residual " + std::to_string(residual) + ")"),
          iterations_(iterations), residual_(residual) {}

    std::size_t iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    std::size_t iterations_;
    double residual_;
};

}  // namespace osmosis
