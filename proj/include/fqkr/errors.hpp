#pragma once

#include <stdexcept>
#include <string>

namespace fqkr {

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Caller asked for something the operation does not support (wrong kind, bad key).
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// State failed a consistency check (norm, symmetry tag, manifest).
struct IntegrityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Probability leaked onto the edge of the truncated momentum window.
struct TruncationError : std::runtime_error {
    TruncationError(const std::string& what, long step, double leaked)
        : std::runtime_error(what), step(step), leaked(leaked) {}
    long step;
    double leaked;
};

/// Requested size exceeds a configured capacity.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical routine failed (eigensolver convergence, singular fit).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace fqkr
