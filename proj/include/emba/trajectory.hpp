#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "emba/so3.hpp"

namespace emba {

/// Segment index and fraction locating a query time between two control poses.
struct PoseWeights {
    int index;   // first pose of the bracketing pair (0-based)
    double tau;  // fraction in [0, 1] within the segment
};

/// Rotation trajectory over control poses on a fixed-rate time grid.
/// Interpolation between neighbors follows the SO(3) geodesic (constant
/// angular velocity per segment). Immutable after construction.
class Trajectory {
public:
    Trajectory(double t0, double rate, std::vector<Mat3> poses)
        : t0_(t0), rate_(rate), poses_(std::move(poses))
    {
        if (!(rate_ > 0.0) || !std::isfinite(rate_) || !std::isfinite(t0_))
            throw std::invalid_argument("Trajectory: rate must be positive and finite");
        if (poses_.size() < 2)
            throw std::invalid_argument("Trajectory: needs at least two control poses");
        for (const Mat3& R : poses_)
            if (!is_rotation(R))
                throw std::invalid_argument("Trajectory: control pose is not a rotation");
    }

    double t_start() const { return t0_; }
    double t_end() const { return t0_ + (poses_.size() - 1) / rate_; }
    double rate() const { return rate_; }
    int size() const { return static_cast<int>(poses_.size()); }
    double time_of(int i) const { return t0_ + i / rate_; }
    const Mat3& pose(int i) const { return poses_[i]; }
    const std::vector<Mat3>& poses() const { return poses_; }

    bool in_span(double t) const { return t >= t_start() && t <= t_end(); }

    PoseWeights weights(double t) const
    {
        if (!in_span(t))
            throw std::out_of_range("Trajectory: query time outside span");
        double s = (t - t0_) * rate_;
        int i = static_cast<int>(std::floor(s));
        if (i >= size() - 1) i = size() - 2;  // t == t_end maps to the last segment, tau = 1
        return PoseWeights{i, s - i};
    }

    Mat3 interpolate(double t) const
    {
        const PoseWeights w = weights(t);
        if (w.tau == 0.0) return poses_[w.index];
        const Vec3 omega = log_so3(poses_[w.index].transpose() * poses_[w.index + 1]);
        return poses_[w.index] * exp_so3(w.tau * omega);
    }

    /// Left-multiplies each control pose by exp of its 3-vector slice of dalpha.
    /// The gauge block (first pose) is the caller's responsibility.
    Trajectory apply_update(const Eigen::VectorXd& dalpha) const
    {
        if (dalpha.size() != 3 * size())
            throw std::invalid_argument("apply_update: expected a 3*Nc vector");
        if (!dalpha.allFinite())
            throw std::invalid_argument("apply_update: non-finite update");
        std::vector<Mat3> updated(poses_.size());
        for (int i = 0; i < size(); ++i)
            updated[i] = exp_so3(dalpha.segment<3>(3 * i)) * poses_[i];
        return Trajectory(t0_, rate_, std::move(updated));
    }

private:
    double t0_;
    double rate_;
    std::vector<Mat3> poses_;
};

/// First-order weights distributing a perturbation at time t onto the two
/// bracketing control poses: dphi(t) ~ (1 - tau) * dphi_i + tau * dphi_{i+1}.
inline PoseWeights pose_perturbation_jacobian(const Trajectory& traj, double t)
{
    return traj.weights(t);
}

/// Time-stamped rotations at arbitrary (strictly increasing) timestamps,
/// e.g. front-end output before resampling, or a reference for evaluation.
class RotationSamples {
public:
    RotationSamples() = default;

    void push_back(double t, const Mat3& R)
    {
        if (!samples_.empty() && t <= samples_.back().first)
            throw std::invalid_argument("RotationSamples: timestamps must be strictly increasing");
        if (!is_rotation(R))
            throw std::invalid_argument("RotationSamples: not a rotation");
        samples_.emplace_back(t, R);
    }

    size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    double t_start() const { return samples_.front().first; }
    double t_end() const { return samples_.back().first; }
    const std::pair<double, Mat3>& operator[](size_t i) const { return samples_[i]; }

    bool in_span(double t) const { return t >= t_start() && t <= t_end(); }

    Mat3 interpolate(double t) const
    {
        if (samples_.empty())
            throw std::out_of_range("RotationSamples: empty");
        if (!in_span(t))
            throw std::out_of_range("RotationSamples: query time outside span");
        size_t lo = 0, hi = samples_.size() - 1;
        while (hi - lo > 1) {
            const size_t mid = (lo + hi) / 2;
            (samples_[mid].first <= t ? lo : hi) = mid;
        }
        const auto& [ta, Ra] = samples_[lo];
        const auto& [tb, Rb] = samples_[hi];
        const double tau = (t - ta) / (tb - ta);
        if (tau == 0.0) return Ra;
        return Ra * exp_so3(tau * log_so3(Ra.transpose() * Rb));
    }

    static RotationSamples from_trajectory(const Trajectory& traj)
    {
        RotationSamples s;
        for (int i = 0; i < traj.size(); ++i)
            s.push_back(traj.time_of(i), traj.pose(i));
        return s;
    }

private:
    std::vector<std::pair<double, Mat3>> samples_;
};

/// Resample onto a uniform grid at the given rate, spanning as much of the
/// input as the grid allows. The grid starts at the first sample time.
inline Trajectory resample_uniform(const RotationSamples& samples, double rate)
{
    if (samples.size() < 2)
        throw std::invalid_argument("resample_uniform: needs at least two samples");
    const double t0 = samples.t_start();
    const int n = 1 + static_cast<int>(std::floor((samples.t_end() - t0) * rate + 1e-9));
    if (n < 2)
        throw std::invalid_argument("resample_uniform: span too short for the pose rate");
    std::vector<Mat3> poses(n);
    for (int i = 0; i < n; ++i)
        poses[i] = samples.interpolate(std::min(t0 + i / rate, samples.t_end()));
    return Trajectory(t0, rate, std::move(poses));
}

}  // namespace emba
