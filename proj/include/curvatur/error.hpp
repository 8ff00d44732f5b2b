#pragma once

#include <stdexcept>
#include <string>

namespace curvatur {

// Base class for every failure raised by the library. The CLI maps these to
// exit code 1 (computation failure) unless noted.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A documented precondition was violated by the caller.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// A map stopped being an immersion (or a curve stopped being regular).
class RegularityError : public Error {
public:
    using Error::Error;
};

// A point, geodesic or loop left the chart domain.
class DomainExitError : public Error {
public:
    using Error::Error;
};

// An iterative method did not reach its tolerance. Carries the best value
// it had when it gave up.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double best) : Error(what), best_(best) {}
    double best_estimate() const { return best_; }

private:
    double best_;
};

} // namespace curvatur
