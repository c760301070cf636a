#pragma once

#include <stdexcept>
#include <string>

namespace stochlab {

// Unusable input: missing files, schema violations, precondition failures.
class InvalidInput : public std::runtime_error {
public:
    explicit InvalidInput(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown: non-finite states, failed factorizations, exhausted
// iteration budgets that cannot be reported as a soft flag.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace stochlab
