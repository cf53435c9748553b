#pragma once

#include <Eigen/Core>
#include <cmath>

namespace emba {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat23 = Eigen::Matrix<double, 2, 3>;
using Mat32 = Eigen::Matrix<double, 3, 2>;

/// Skew-symmetric matrix such that hat(v) * w == v.cross(w).
inline Mat3 hat(const Vec3& v)
{
    Mat3 m;
    m <<    0, -v(2),  v(1),
         v(2),     0, -v(0),
        -v(1),  v(0),     0;
    return m;
}

/// Rodrigues formula; series expansion below 1e-8 where sin/angle degenerates.
inline Mat3 exp_so3(const Vec3& omega)
{
    const double theta = omega.norm();
    const Mat3 W = hat(omega);
    if (theta < 1e-8) {
        return Mat3::Identity() + W + 0.5 * W * W;
    }
    const double s = std::sin(theta) / theta;
    const double c = (1.0 - std::cos(theta)) / (theta * theta);
    return Mat3::Identity() + s * W + c * W * W;
}

/// Inverse of exp_so3; returned vector has norm in [0, pi].
/// The angle-pi case is resolved through the largest diagonal entry of R,
/// so it stays well conditioned where R - R^T vanishes.
inline Vec3 log_so3(const Mat3& R)
{
    const Vec3 axis_sin(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
    const double s = 0.5 * axis_sin.norm();           // sin(theta)
    const double c = 0.5 * (R.trace() - 1.0);         // cos(theta)
    const double theta = std::atan2(s, std::min(1.0, std::max(-1.0, c)));

    if (s > 1e-6) {
        return (0.5 * theta / s) * axis_sin;
    }
    if (c > 0.0) {
        // theta near 0: R ~ I + hat(w), second-order correction keeps 1e-12 round-trips
        return 0.5 * (1.0 + theta * theta / 6.0) * axis_sin;
    }

    // theta near pi: extract the axis from the symmetric part
    const Mat3 S = 0.5 * (R + Mat3::Identity());      // ~ axis * axis^T at theta == pi
    int k = 0;
    S.diagonal().maxCoeff(&k);
    Vec3 axis = S.col(k) / std::sqrt(S(k, k));
    // pick the sign consistent with the antisymmetric part when it is not fully degenerate
    if (axis.dot(axis_sin) < 0.0) axis = -axis;
    return theta * axis.normalized();
}

/// Orthonormality and orientation check used by type invariants.
inline bool is_rotation(const Mat3& R, double tol = 1e-9)
{
    return (R * R.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() < tol
        && std::abs(R.determinant() - 1.0) < tol;
}

}  // namespace emba
