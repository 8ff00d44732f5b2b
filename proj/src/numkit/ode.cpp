#include "curvatur/numkit/ode.hpp"

#include <algorithm>
#include <cmath>

namespace curvatur {

const char* to_string(OdeStatus s)
{
    switch (s) {
    case OdeStatus::Completed: return "completed";
    case OdeStatus::DomainExit: return "domain-exit";
    case OdeStatus::StepUnderflow: return "step-underflow";
    case OdeStatus::NonFinite: return "non-finite";
    }
    return "unknown";
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b* (error weights)
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

bool finite(const State& v) { return v.allFinite(); }

} // namespace

State OdeSolution::operator()(double tq) const
{
    if (t.size() == 1) return y.front();
    tq = std::clamp(tq, t.front(), t.back());
    auto it = std::upper_bound(t.begin(), t.end(), tq);
    std::size_t i = (it == t.begin()) ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
    if (i >= t.size() - 1) return y.back();
    double h = t[i + 1] - t[i];
    double s = (tq - t[i]) / h;
    double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    double h10 = s * (1 - s) * (1 - s);
    double h01 = s * s * (3 - 2 * s);
    double h11 = s * s * (s - 1);
    return h00 * y[i] + h10 * h * dy[i] + h01 * y[i + 1] + h11 * h * dy[i + 1];
}

int OdeSolution::index_at(double time) const
{
    auto it = std::lower_bound(t.begin(), t.end(), time);
    if (it != t.end() && *it == time) return static_cast<int>(it - t.begin());
    return -1;
}

OdeSolution integrate_ode(const OdeProblem& p)
{
    OdeSolution sol;
    const Eigen::Index n = p.y0.size();
    const double dir = p.t1 >= p.t0 ? 1.0 : -1.0;
    const double span = std::abs(p.t1 - p.t0);

    std::vector<double> stops;
    for (double s : p.stops)
        if ((s - p.t0) * dir > 0 && (p.t1 - s) * dir > 0) stops.push_back(s);
    std::sort(stops.begin(), stops.end(), [dir](double a, double b) { return a * dir < b * dir; });
    stops.push_back(p.t1);
    std::size_t next_stop = 0;

    State y = p.y0, k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);
    double t = p.t0;
    p.rhs(t, y, k1);
    ++sol.rhs_evaluations;
    sol.t.push_back(t);
    sol.y.push_back(y);
    sol.dy.push_back(k1);
    if (!finite(k1)) {
        sol.status = OdeStatus::NonFinite;
        sol.message = "non-finite right-hand side at the initial state";
        return sol;
    }
    if (span == 0.0) return sol;

    // initial step from the usual scale heuristic
    double d0 = 0, d1 = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double sc = p.atol + p.rtol * std::abs(y[i]);
        d0 += (y[i] / sc) * (y[i] / sc);
        d1 += (k1[i] / sc) * (k1[i] / sc);
    }
    d0 = std::sqrt(d0 / std::max<Eigen::Index>(n, 1));
    d1 = std::sqrt(d1 / std::max<Eigen::Index>(n, 1));
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min({h, p.max_step, span});
    const double h_min = 1e-14 * std::max(1.0, std::abs(p.t0) + span);

    while (true) {
        double target = stops[next_stop];
        double remaining = (target - t) * dir;
        bool land = false;
        double step = h;
        if (step >= remaining) {
            step = remaining;
            land = true;
        }
        double hs = dir * step;

        ytmp = y + hs * (a21 * k1);
        p.rhs(t + c2 * hs, ytmp, k2);
        ytmp = y + hs * (a31 * k1 + a32 * k2);
        p.rhs(t + c3 * hs, ytmp, k3);
        ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
        p.rhs(t + c4 * hs, ytmp, k4);
        ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        p.rhs(t + c5 * hs, ytmp, k5);
        ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        p.rhs(t + hs, ytmp, k6);
        ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        double tnew = land ? target : t + hs;
        p.rhs(tnew, ynew, k7);
        sol.rhs_evaluations += 6;

        bool ok_values = finite(ynew) && finite(k7);
        double err = 0.0;
        if (ok_values) {
            for (Eigen::Index i = 0; i < n; ++i) {
                double ei = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                double sc = p.atol + p.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                err = std::max(err, std::abs(ei) / sc);
            }
        }

        if (!ok_values || err > 1.0) {
            double fac = ok_values ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.25;
            h = step * fac;
            if (h < h_min) {
                sol.status = ok_values ? OdeStatus::StepUnderflow : OdeStatus::NonFinite;
                sol.message = ok_values ? "step size underflow" : "non-finite right-hand side";
                return sol;
            }
            continue;
        }

        if (p.inside && !p.inside(tnew, ynew)) {
            // keep the last good state; tighten the step to approach the boundary
            if (step > 1e-9 * std::max(1.0, span)) {
                h = step * 0.25;
                continue;
            }
            sol.status = OdeStatus::DomainExit;
            sol.message = "left the domain";
            return sol;
        }

        t = tnew;
        y = ynew;
        k1 = k7;
        sol.t.push_back(t);
        sol.y.push_back(y);
        sol.dy.push_back(k1);

        if (land) {
            if (next_stop + 1 == stops.size()) return sol;
            ++next_stop;
        }
        double fac = err == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
        double proposed = step * fac;
        if (land && step < h) proposed = std::max(proposed, h); // clipped step says nothing about scale
        h = std::min(proposed, p.max_step);
    }
}

} // namespace curvatur
