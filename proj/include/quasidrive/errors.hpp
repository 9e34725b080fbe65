#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace quasidrive {

// Bad input: violated precondition or out-of-range parameter.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Numerical failure: non-convergence, lost tracking, singular systems.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& what, std::size_t index)
        : NumericError(what + " (index " + std::to_string(index) + ")"), index_(index) {}
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace quasidrive
