#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace htwk {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An operation was called outside its documented domain.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// An improper integral failed the panel-decay test.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, double partial_sum)
        : Error(what), partial_sum_(partial_sum) {}

    double partial_sum() const noexcept { return partial_sum_; }

private:
    double partial_sum_;
};

/// A grid query or convolution ran past the representable horizon.
class HorizonError : public Error {
public:
    using Error::Error;
};

/// A simulation exceeded its step budget.
class BudgetError : public Error {
public:
    using Error::Error;
};

}  // namespace htwk
