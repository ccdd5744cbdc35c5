#include "signmotion/motion/rotation.hpp"

#include <Eigen/Geometry>
#include <cmath>

#include "signmotion/common/error.hpp"

namespace signmotion {

namespace {
constexpr double kOrthonormalTol = 1e-6;
constexpr double kDegenerateTol = 1e-8;
}  // namespace

Mat3 axis_angle_to_matrix(const Vec3& v) {
    require(v.allFinite(), ErrorCode::invalid_argument, "axis_angle_to_matrix: non-finite input");
    const double theta = v.norm();
    if (theta == 0.0) return Mat3::Identity();
    const Vec3 k = v / theta;
    Mat3 kx;
    kx << 0, -k.z(), k.y(),
          k.z(), 0, -k.x(),
          -k.y(), k.x(), 0;
    // For tiny angles sin/theta and the (1-cos) term stay accurate since k is unit.
    return Mat3::Identity() + std::sin(theta) * kx + (1.0 - std::cos(theta)) * (kx * kx);
}

Vec3 matrix_to_axis_angle(const Mat3& r) {
    require(r.allFinite(), ErrorCode::invalid_argument, "matrix_to_axis_angle: non-finite input");
    require(is_rotation(r, kOrthonormalTol), ErrorCode::invalid_argument,
            "matrix_to_axis_angle: not a rotation matrix");
    // Quaternion extraction is stable at every angle, including pi.
    Eigen::Quaterniond q(r);
    q.normalize();
    if (q.w() < 0) q.coeffs() = -q.coeffs();
    const double s = q.vec().norm();
    if (s == 0.0) return Vec3::Zero();
    const double angle = 2.0 * std::atan2(s, q.w());
    return q.vec() / s * angle;
}

bool is_rotation(const Mat3& r, double tol) {
    if (!r.allFinite()) return false;
    const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
    return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

Vec6 matrix_to_sixd(const Mat3& r) {
    require(is_rotation(r, kOrthonormalTol), ErrorCode::invalid_argument,
            "matrix_to_sixd: input is not orthonormal within 1e-6");
    Vec6 s;
    s << r.col(0), r.col(1);
    return s;
}

Mat3 sixd_to_matrix(const Vec6& s) {
    require(s.allFinite(), ErrorCode::invalid_argument, "sixd_to_matrix: non-finite input");
    const Vec3 a1 = s.head<3>();
    const Vec3 a2 = s.tail<3>();
    const double n1 = a1.norm();
    require(n1 > kDegenerateTol, ErrorCode::degenerate_input, "sixd_to_matrix: first vector is degenerate");
    const Vec3 b1 = a1 / n1;
    const Vec3 orth = a2 - b1.dot(a2) * b1;
    const double n2 = orth.norm();
    require(n2 > kDegenerateTol * std::max(1.0, a2.norm()), ErrorCode::degenerate_input,
            "sixd_to_matrix: second vector is parallel to the first");
    const Vec3 b2 = orth / n2;
    Mat3 r;
    r.col(0) = b1;
    r.col(1) = b2;
    r.col(2) = b1.cross(b2);
    return r;
}

}  // namespace signmotion
