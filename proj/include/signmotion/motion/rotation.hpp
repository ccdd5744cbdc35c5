#pragma once

#include <Eigen/Core>

namespace signmotion {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

// Rodrigues map; a zero vector maps to the identity.
Mat3 axis_angle_to_matrix(const Vec3& v);

// Inverse of axis_angle_to_matrix with angle in [0, pi].
Vec3 matrix_to_axis_angle(const Mat3& r);

// First two columns of R, stacked.  R must be orthonormal within 1e-6.
Vec6 matrix_to_sixd(const Mat3& r);

// Gram-Schmidt on the two 3-vectors; b3 = b1 x b2.
Mat3 sixd_to_matrix(const Vec6& s);

bool is_rotation(const Mat3& r, double tol);

}  // namespace signmotion
