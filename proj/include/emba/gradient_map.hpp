#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "emba/equirect.hpp"

namespace emba {

/// Nearest grid pixel for a continuous panorama point: u wraps, v clamps.
inline std::pair<int, int> nearest_pixel(const Vec2& p, int width, int height)
{
    int ix = static_cast<int>(std::lround(p(0)));
    ix %= width;
    if (ix < 0) ix += width;
    int iy = static_cast<int>(std::lround(p(1)));
    if (iy < 0) iy = 0;
    if (iy >= height) iy = height - 1;
    return {ix, iy};
}

/// Two-channel equirectangular panorama of brightness gradients (gx, gy):
/// the map unknowns of the optimization. Invalid pixels hold exactly zero.
class GradientMap {
public:
    GradientMap(int width, int height)
        : width_(width), height_(height), data_(static_cast<size_t>(width) * height, Vec2::Zero())
    {
        if (width <= 0 || height <= 0)
            throw std::invalid_argument("GradientMap: dimensions must be positive");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    size_t pixel_count() const { return data_.size(); }

    Vec2& at(int ix, int iy) { return data_[static_cast<size_t>(iy) * width_ + ix]; }
    const Vec2& at(int ix, int iy) const { return data_[static_cast<size_t>(iy) * width_ + ix]; }

    double squared_norm() const
    {
        double s = 0.0;
        for (const Vec2& g : data_) s += g.squaredNorm();
        return s;
    }

    bool all_finite() const
    {
        for (const Vec2& g : data_)
            if (!g.allFinite()) return false;
        return true;
    }

private:
    int width_;
    int height_;
    std::vector<Vec2> data_;
};

/// Gradient at the nearest pixel. Exactly one pixel is touched per call;
/// this is what keeps the map block of the normal equations 2x2 block-diagonal.
inline Vec2 sample_gradient_nn(const GradientMap& G, const Vec2& p)
{
    const auto [ix, iy] = nearest_pixel(p, G.width(), G.height());
    return G.at(ix, iy);
}

/// Spatial derivative of both gradient channels at the nearest pixel:
/// rows (d gx / d(u,v); d gy / d(u,v)). Central differences, wrapped in u,
/// one-sided at the top/bottom rows.
inline Mat2 gradient_hessian_nn(const GradientMap& G, const Vec2& p)
{
    const int W = G.width(), H = G.height();
    const auto [ix, iy] = nearest_pixel(p, W, H);
    const int xm = (ix + W - 1) % W, xp = (ix + 1) % W;
    const Vec2 du = 0.5 * (G.at(xp, iy) - G.at(xm, iy));
    Vec2 dv;
    if (iy == 0)
        dv = G.at(ix, 1) - G.at(ix, 0);
    else if (iy == H - 1)
        dv = G.at(ix, H - 1) - G.at(ix, H - 2);
    else
        dv = 0.5 * (G.at(ix, iy + 1) - G.at(ix, iy - 1));
    Mat2 D;
    D << du(0), dv(0),
         du(1), dv(1);
    return D;
}

/// Pixels that received enough warped events to be optimized, with the
/// dense index map used by the normal equations.
class ValidMask {
public:
    ValidMask(std::vector<int32_t> counts, int width, int height, int threshold)
        : width_(width), height_(height), threshold_(threshold), counts_(std::move(counts)),
          dense_index_(static_cast<size_t>(width) * height, -1)
    {
        if (counts_.size() != static_cast<size_t>(width) * height)
            throw std::invalid_argument("ValidMask: count table size mismatch");
        for (size_t i = 0; i < counts_.size(); ++i) {
            if (counts_[i] > threshold) {
                dense_index_[i] = static_cast<int32_t>(pixels_.size());
                pixels_.push_back(static_cast<int32_t>(i));
            }
        }
        if (pixels_.empty())
            throw std::runtime_error("ValidMask: no valid pixels (no observable map)");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    int threshold() const { return threshold_; }
    int n_valid() const { return static_cast<int>(pixels_.size()); }

    bool is_valid(int ix, int iy) const { return dense_index(ix, iy) >= 0; }
    int32_t dense_index(int ix, int iy) const
    {
        return dense_index_[static_cast<size_t>(iy) * width_ + ix];
    }
    int32_t count(int ix, int iy) const
    {
        return counts_[static_cast<size_t>(iy) * width_ + ix];
    }
    /// (ix, iy) of the dense index j.
    std::pair<int, int> pixel(int32_t j) const
    {
        const int32_t flat = pixels_[j];
        return {flat % width_, flat / width_};
    }

private:
    int width_, height_, threshold_;
    std::vector<int32_t> counts_;
    std::vector<int32_t> dense_index_;
    std::vector<int32_t> pixels_;
};

/// valid <=> count > threshold (strictly more events than the threshold).
inline ValidMask build_valid_mask(std::vector<int32_t> counts, int width, int height,
                                  int threshold = 5)
{
    return ValidMask(std::move(counts), width, height, threshold);
}

/// Log-intensity panorama recovered from the gradient map.
struct IntensityMap {
    int width = 0;
    int height = 0;
    std::vector<double> values;  // row-major

    IntensityMap() = default;
    IntensityMap(int w, int h) : width(w), height(h), values(static_cast<size_t>(w) * h, 0.0) {}

    double& at(int ix, int iy) { return values[static_cast<size_t>(iy) * width + ix]; }
    double at(int ix, int iy) const { return values[static_cast<size_t>(iy) * width + ix]; }

    double mean() const
    {
        double s = 0.0;
        for (double v : values) s += v;
        return values.empty() ? 0.0 : s / values.size();
    }
};

}  // namespace emba
