#pragma once

#include <array>
#include <functional>

namespace curvatur {

// Adaptive Gauss-Kronrod (7/15) on [a, b] with absolute error <= tol.
// Throws ConvergenceError (carrying the best estimate) when the recursion
// depth limit is hit before the tolerance is met.
double quadrature(const std::function<double(double)>& f, double a, double b, double tol,
                  int max_depth = 40);

// Fixed-order Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    static constexpr int order = 8;
    static const std::array<double, order>& nodes();
    static const std::array<double, order>& weights();
};

// Nodes and weights of an n-point Gauss-Legendre rule on [a, b] (any n >= 1,
// computed by Newton on the Legendre recurrence).
void gauss_legendre(int n, double a, double b, double* nodes, double* weights);

struct Box2 {
    double u0, u1, v0, v1;
};

} // namespace curvatur
