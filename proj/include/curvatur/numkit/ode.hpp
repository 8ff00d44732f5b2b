#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace curvatur {

using State = Eigen::VectorXd;

struct OdeProblem {
    // dy/dt = rhs(t, y); the output vector is pre-sized to the state dimension.
    std::function<void(double, const State&, State&)> rhs;
    State y0;
    double t0 = 0.0;
    double t1 = 1.0;
    double rtol = 1e-10;
    double atol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    // Times inside (t0, t1) where the integrator must land exactly.
    std::vector<double> stops;
    // Optional: integration halts (status DomainExit) once this returns false.
    std::function<bool(double, const State&)> inside;
};

enum class OdeStatus { Completed, DomainExit, StepUnderflow, NonFinite };

const char* to_string(OdeStatus s);

// Accepted steps of an embedded Dormand-Prince 5(4) run. Between accepted
// steps the solution is the cubic Hermite interpolant of (y, y').
class OdeSolution {
public:
    std::vector<double> t;
    std::vector<State> y;
    std::vector<State> dy;
    OdeStatus status = OdeStatus::Completed;
    std::string message;
    int rhs_evaluations = 0;

    bool ok() const { return status == OdeStatus::Completed; }
    double t_end() const { return t.back(); }
    const State& final_state() const { return y.back(); }

    // Dense output; t_query is clamped to the integrated range.
    State operator()(double t_query) const;

    // Index of the accepted point at exactly this time (a requested stop).
    int index_at(double time) const;
};

OdeSolution integrate_ode(const OdeProblem& problem);

} // namespace curvatur
