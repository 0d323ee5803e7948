#ifndef FTL_ERRORS_HPP
#define FTL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ftl {

/// Base class for all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A quantity was outside its mathematical domain (e.g. negative density).
struct domain_error : error {
    using error::error;
};

/// Malformed or inconsistent input data.
struct invalid_input : error {
    using error::error;
};

/// Initial density failed the unit-mass normalization check.
struct normalization_error : invalid_input {
    using invalid_input::invalid_input;
};

/// Velocity/potential/case combination is inconsistent.
struct configuration_error : error {
    using error::error;
};

/// Particle ordering was lost (positions not strictly increasing).
struct collision_error : error {
    using error::error;
};

/// Internal inconsistency in a solver (should never fire on valid input).
struct solver_bug : error {
    using error::error;
};

/// The adaptive step fell below its floor while protecting particle
/// ordering; carries the index pair whose gap could not be resolved.
struct stiffness_error : error {
    int index_left;
    int index_right;
    double time;
    stiffness_error(const std::string& msg, int i, int j, double t)
        : error(msg), index_left(i), index_right(j), time(t) {}
};

} // namespace ftl

#endif
