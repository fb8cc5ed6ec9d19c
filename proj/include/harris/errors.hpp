/// @file errors.hpp
/// @brief Exception types raised by the harris library.
#pragma once

#include <stdexcept>
#include <string>

namespace harris {

/// Gram matrix could not be factorized even at the largest jitter.
class SingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative numerical routine did not reach the requested tolerance.
class ToleranceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A dual-flow query had no qualifying stored trajectory.
class CoverageError : public std::runtime_error {
public:
    CoverageError(const std::string& what, double s, double t, double x)
        : std::runtime_error(what), s_(s), t_(t), x_(x) {}

    double s() const noexcept { return s_; }
    double t() const noexcept { return t_; }
    double x() const noexcept { return x_; }

private:
    double s_;
    double t_;
    double x_;
};

}  // namespace harris
