#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace psdstein {

// Base for every error raised by the library. Callers that only care about
// "something was invalid" can catch this one.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Series / recursion does not define a probability law.
class NonNormalizableError : public Error {
public:
    using Error::Error;
};

// Parameters produce a negative or otherwise impossible mass.
class InvalidFamilyError : public Error {
public:
    using Error::Error;
};

class UndefinedMomentsError : public Error {
public:
    using Error::Error;
};

// A documented precondition of a bound or operation does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Monotonicity condition of the exact Delta-g identity fails at index k.
class ConditionFailedError : public Error {
public:
    ConditionFailedError(const std::string& what, std::size_t k)
        : Error(what), k_(k) {}
    std::size_t offending_k() const noexcept { return k_; }

private:
    std::size_t k_;
};

class MeanMismatchError : public Error {
public:
    MeanMismatchError(const std::string& what, double target_mean, double sum_mean)
        : Error(what), target_mean_(target_mean), sum_mean_(sum_mean) {}
    double target_mean() const noexcept { return target_mean_; }
    double sum_mean() const noexcept { return sum_mean_; }

private:
    double target_mean_;
    double sum_mean_;
};

// Requested computation has no backend (no enumerator, no provider).
class UnavailableError : public Error {
public:
    using Error::Error;
};

// Exact enumeration refused because the outcome space is too large.
class TooLargeError : public Error {
public:
    using Error::Error;
};

// Moment fit impossible (e.g. NB fit to an under-dispersed law).
class UnfittableError : public Error {
public:
    using Error::Error;
};

} // namespace psdstein
