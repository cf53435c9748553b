#pragma once

#include <stdexcept>

#include "emba/so3.hpp"

namespace emba {

/// Pinhole intrinsics. Bearings are the unnormalized rays z = K^-1 * (x, y, 1).
class CameraModel {
public:
    CameraModel(const Mat3& K, int width, int height)
        : K_(K), width_(width), height_(height)
    {
        if (width <= 0 || height <= 0)
            throw std::invalid_argument("CameraModel: sensor dimensions must be positive");
        if (K(0, 0) <= 0.0 || K(1, 1) <= 0.0)
            throw std::invalid_argument("CameraModel: focal lengths must be positive");
        if (std::abs(K.determinant()) < 1e-12)
            throw std::invalid_argument("CameraModel: K is not invertible");
        K_inv_ = K.inverse();
    }

    /// fx = fy = focal, principal point at the sensor center.
    static CameraModel simple(double focal, int width, int height)
    {
        Mat3 K = Mat3::Identity();
        K(0, 0) = K(1, 1) = focal;
        K(0, 2) = 0.5 * (width - 1);
        K(1, 2) = 0.5 * (height - 1);
        return CameraModel(K, width, height);
    }

    const Mat3& K() const { return K_; }
    const Mat3& K_inv() const { return K_inv_; }
    int width() const { return width_; }
    int height() const { return height_; }

    bool contains(double x, double y) const
    {
        return x >= 0.0 && x < width_ && y >= 0.0 && y < height_;
    }

private:
    Mat3 K_;
    Mat3 K_inv_;
    int width_;
    int height_;
};

/// Ray through pixel x in the camera frame (rotation applied by the caller).
inline Vec3 pixel_bearing(const Vec2& x, const CameraModel& cam)
{
    if (!cam.contains(x(0), x(1)))
        throw std::out_of_range("pixel_bearing: pixel outside sensor bounds");
    return cam.K_inv() * Vec3(x(0), x(1), 1.0);
}

}  // namespace emba
