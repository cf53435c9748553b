#pragma once

#include <numbers>
#include <stdexcept>

#include "emba/so3.hpp"

namespace emba {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Normalized-elevation guard band: the projection Jacobian is singular at the poles.
inline constexpr double kPoleBand = 1e-9;

/// Wrap a panorama u coordinate into [0, W).
inline double wrap_u(double u, int map_width)
{
    u = std::fmod(u, static_cast<double>(map_width));
    if (u < 0.0) u += map_width;
    if (u >= map_width) u = 0.0;  // fmod may return exactly W for tiny negatives
    return u;
}

/// Shortest signed azimuthal difference, in (-W/2, W/2].
inline double wrap_du(double du, int map_width)
{
    const double w = static_cast<double>(map_width);
    du = std::fmod(du, w);
    if (du > 0.5 * w) du -= w;
    if (du <= -0.5 * w) du += w;
    return du;
}

/// Azimuth measured from +z toward +x; v grows with +y (camera-down maps to
/// panorama-bottom). u in [0, W), v in [0, H].
inline Vec2 project_equirect(const Vec3& z, int map_width, int map_height)
{
    const double rho = z.norm();
    if (rho < 1e-15)
        throw std::invalid_argument("project_equirect: zero-norm bearing");
    const double az = std::atan2(z(0), z(2));
    const double el = std::asin(std::min(1.0, std::max(-1.0, z(1) / rho)));
    return Vec2(wrap_u((az / kTwoPi + 0.5) * map_width, map_width),
                (el / kPi + 0.5) * map_height);
}

/// Unit bearing whose equirectangular projection is p.
inline Vec3 unproject_equirect(const Vec2& p, int map_width, int map_height)
{
    const double az = (p(0) / map_width - 0.5) * kTwoPi;
    const double el = (p(1) / map_height - 0.5) * kPi;
    const double c = std::cos(el);
    return Vec3(c * std::sin(az), std::sin(el), c * std::cos(az));
}

inline bool near_pole(const Vec3& z, double band = kPoleBand)
{
    return std::abs(z(1)) >= (1.0 - band) * z.norm();
}

/// Analytical Jacobian of project_equirect. Homogeneous of degree -1 in z.
inline Mat23 jac_equirect(const Vec3& z, int map_width, int map_height)
{
    if (near_pole(z))
        throw std::domain_error("jac_equirect: bearing inside pole guard band");
    const double rho2 = z.squaredNorm();
    const double r2 = z(0) * z(0) + z(2) * z(2);
    const double r = std::sqrt(r2);
    const double cu = map_width / kTwoPi;
    const double cv = map_height / kPi;
    Mat23 J;
    J(0, 0) = cu * z(2) / r2;
    J(0, 1) = 0.0;
    J(0, 2) = -cu * z(0) / r2;
    J(1, 0) = -cv * z(1) * z(0) / (r * rho2);
    J(1, 1) = cv * r / rho2;
    J(1, 2) = -cv * z(1) * z(2) / (r * rho2);
    return J;
}

/// Maps a left rotation perturbation to a map-point displacement:
/// projecting exp(dphi^) * z moves the map point by -e_matrix(z) * dphi.
inline Mat23 e_matrix(const Vec3& z, int map_width, int map_height)
{
    return jac_equirect(z, map_width, map_height) * hat(z);
}

}  // namespace emba
