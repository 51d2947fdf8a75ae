#pragma once

#include <stdexcept>
#include <string>

namespace fluctwork {

/// Bad input: wrong dimensions, non-finite values, malformed files.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The requested bound or protocol does not exist for these parameters.
class InfeasibleQuery : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Iterative solver gave up, or a numeric self-check failed.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exact convolution would exceed the configured atom budget.
class AtomOverflow : public std::length_error {
public:
    using std::length_error::length_error;
};

}  // namespace fluctwork
