#include "curvatur/numkit/linalg.hpp"

#include "curvatur/error.hpp"

#include <cmath>

namespace curvatur {

GeneralizedEigen generalized_symmetric_eigen(const Mat2& q, const Mat2& g)
{
    const double g11 = g(0, 0), g12 = 0.5 * (g(0, 1) + g(1, 0)), g22 = g(1, 1);
    const double det_g = g11 * g22 - g12 * g12;
    if (!(g11 > 0.0) || !(det_g > 0.0)) throw PreconditionError("generalized eigenproblem: g is not positive definite");

    // g = L L^T, then A = L^-1 q L^-T is symmetric with the same eigenvalues.
    const double l11 = std::sqrt(g11);
    const double l21 = g12 / l11;
    const double l22 = std::sqrt(det_g) / l11;
    Mat2 linv;
    linv << 1.0 / l11, 0.0, -l21 / (l11 * l22), 1.0 / l22;
    Mat2 qs = 0.5 * (q + q.transpose());
    Mat2 a = linv * qs * linv.transpose();
    const double a11 = a(0, 0), a22 = a(1, 1), a12 = 0.5 * (a(0, 1) + a(1, 0));

    const double mean = 0.5 * (a11 + a22);
    const double half_gap = std::hypot(0.5 * (a11 - a22), a12);
    GeneralizedEigen out;
    out.lambda_plus = mean + half_gap;
    out.lambda_minus = mean - half_gap;

    Vec2 y_plus, y_minus;
    if (2.0 * half_gap < 1e-10) {
        out.degenerate = true;
        y_plus = Vec2(1.0, 0.0);
        y_minus = Vec2(0.0, 1.0);
    } else {
        // eigenvector of the symmetric 2x2 via the half-angle form
        double theta = 0.5 * std::atan2(2.0 * a12, a11 - a22);
        y_plus = Vec2(std::cos(theta), std::sin(theta));
        y_minus = Vec2(-std::sin(theta), std::cos(theta));
    }
    // v = L^-T y is g-orthonormal when y is Euclidean-orthonormal
    out.vectors.col(0) = linv.transpose() * y_plus;
    out.vectors.col(1) = linv.transpose() * y_minus;
    return out;
}

} // namespace curvatur
