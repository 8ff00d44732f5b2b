#pragma once

#include <Eigen/Dense>

namespace curvatur {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
// Chart-sized (dimension 2 or 3) vectors and matrices without heap storage.
using VecN = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using MatN = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

struct GeneralizedEigen {
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
    // Columns: eigenvectors for lambda_plus and lambda_minus, g-orthonormal.
    Mat2 vectors = Mat2::Identity();
    // Eigenvalues coincide within 1e-10; vectors are then the g-orthonormalized
    // coordinate basis.
    bool degenerate = false;
};

// Solves det(q - lambda g) = 0 for symmetric q and symmetric positive definite
// g. Throws PreconditionError when g is not positive definite.
GeneralizedEigen generalized_symmetric_eigen(const Mat2& q, const Mat2& g);

} // namespace curvatur
