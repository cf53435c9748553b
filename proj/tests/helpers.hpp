#pragma once

#include <random>

#include <Eigen/Geometry>

#include "emba/gradient_map.hpp"
#include "emba/so3.hpp"

namespace emba::test {

inline std::mt19937_64 rng(uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline Vec3 random_vec3(std::mt19937_64& g, double scale = 1.0)
{
    return Vec3(uniform(g, -scale, scale), uniform(g, -scale, scale), uniform(g, -scale, scale));
}

inline Eigen::Quaterniond random_quaternion(std::mt19937_64& g)
{
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Quaterniond q(n(g), n(g), n(g), n(g));
    q.normalize();
    return q;
}

inline Mat3 random_rotation(std::mt19937_64& g)
{
    return random_quaternion(g).toRotationMatrix();
}

/// Bearing away from the poles (normalized |y| below the given bound).
inline Vec3 random_bearing_off_pole(std::mt19937_64& g, double max_abs_el = 0.8)
{
    while (true) {
        Vec3 z = random_vec3(g);
        const double n = z.norm();
        if (n < 0.1) continue;
        if (std::abs(z(1)) / n < max_abs_el) return z;
    }
}

/// Smooth random gradient field: per-channel sums of low-frequency waves,
/// periodic in u.
inline GradientMap random_smooth_gradient_map(int W, int H, uint64_t seed,
                                              int n_waves = 6, double amplitude = 0.5)
{
    auto g = rng(seed);
    GradientMap map(W, H);
    for (int ch = 0; ch < 2; ++ch) {
        for (int w = 0; w < n_waves; ++w) {
            const double a = uniform(g, -amplitude, amplitude);
            const int fu = static_cast<int>(uniform(g, 1.0, 5.0));
            const double fv = uniform(g, 0.5, 4.0);
            const double phase = uniform(g, 0.0, 2.0 * kPi);
            for (int i = 0; i < H; ++i)
                for (int j = 0; j < W; ++j)
                    map.at(j, i)(ch) += a * std::sin(2.0 * kPi * (fu * j / double(W) +
                                                                  fv * i / double(H)) + phase);
        }
    }
    return map;
}

}  // namespace emba::test
