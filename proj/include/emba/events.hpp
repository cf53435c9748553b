#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "emba/camera.hpp"
#include "emba/equirect.hpp"
#include "emba/gradient_map.hpp"
#include "emba/parallel.hpp"
#include "emba/trajectory.hpp"

namespace emba {

/// One asynchronous brightness-change measurement.
struct Event {
    double t = 0.0;       // seconds
    uint16_t x = 0;       // sensor pixel
    uint16_t y = 0;
    int8_t polarity = 1;  // +1 or -1
};

/// Event paired with the previous event at the same camera pixel.
struct PairedEvent {
    double t = 0.0;
    double dt = 0.0;  // time since the previous event at this pixel, > 0
    uint16_t x = 0;
    uint16_t y = 0;
    int8_t polarity = 1;
};

/// One event's association at the current operating point.
struct ResidualTerm {
    double t_curr, t_prev;     // t_k and t_k - dt_k
    Vec3 z_curr, z_prev;       // rotated bearings
    Vec2 p_curr, p_prev;       // warped map points
    Vec2 dp;                   // p_curr - p_prev with wrapped azimuth
    double contrast;           // polarity * C
    int32_t pixel;             // dense valid-pixel index of round(p_curr)
    int32_t pix_x, pix_y;      // nearest pixel coordinates
    PoseWeights w_curr, w_prev;
};

struct DropCounts {
    int64_t out_of_span = 0;
    int64_t pole = 0;
    int64_t invalid_pixel = 0;
    int64_t total() const { return out_of_span + pole + invalid_pixel; }
};

struct EventStats {
    int64_t n_events = 0;
    int64_t n_paired = 0;
    int64_t n_terms = 0;
    DropCounts dropped;
};

/// Pairs each event with its predecessor at the same camera pixel, regardless
/// of polarity. First events per pixel emit no pair.
inline std::vector<PairedEvent> pair_events(const std::vector<Event>& events,
                                            int sensor_width, int sensor_height)
{
    std::vector<double> last(static_cast<size_t>(sensor_width) * sensor_height, -1.0);
    std::vector<uint8_t> seen(last.size(), 0);
    std::vector<PairedEvent> pairs;
    pairs.reserve(events.size());
    double prev_t = -std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < events.size(); ++k) {
        const Event& e = events[k];
        if (e.t < prev_t)
            throw std::invalid_argument("pair_events: non-monotonic timestamp at event " +
                                        std::to_string(k + 1));
        prev_t = e.t;
        if (e.x >= sensor_width || e.y >= sensor_height)
            throw std::out_of_range("pair_events: pixel outside sensor at event " +
                                    std::to_string(k + 1));
        const size_t idx = static_cast<size_t>(e.y) * sensor_width + e.x;
        if (seen[idx] && e.t > last[idx])
            pairs.push_back({e.t, e.t - last[idx], e.x, e.y, e.polarity});
        last[idx] = e.t;
        seen[idx] = 1;
    }
    return pairs;
}

/// Precomputed per-pixel bearing table with the warp onto the panorama.
class EventWarper {
public:
    EventWarper(const CameraModel& cam, int map_width, int map_height)
        : cam_(cam), map_width_(map_width), map_height_(map_height)
    {
        bearings_.reserve(static_cast<size_t>(cam.width()) * cam.height());
        for (int y = 0; y < cam.height(); ++y)
            for (int x = 0; x < cam.width(); ++x)
                bearings_.push_back(pixel_bearing(Vec2(x, y), cam));
    }

    const CameraModel& camera() const { return cam_; }
    int map_width() const { return map_width_; }
    int map_height() const { return map_height_; }

    const Vec3& bearing(uint16_t x, uint16_t y) const
    {
        return bearings_[static_cast<size_t>(y) * cam_.width() + x];
    }

    Vec3 rotated_bearing(uint16_t x, uint16_t y, const Mat3& R) const
    {
        return R * bearing(x, y);
    }

    Vec2 warp(uint16_t x, uint16_t y, const Mat3& R) const
    {
        return project_equirect(rotated_bearing(x, y, R), map_width_, map_height_);
    }

private:
    CameraModel cam_;
    int map_width_, map_height_;
    std::vector<Vec3> bearings_;
};

/// Warp of a single sensor pixel at time t onto the panorama.
inline Vec2 warp_event(const Vec2& x, double t, const Trajectory& traj,
                       const CameraModel& cam, int map_width, int map_height)
{
    return project_equirect(traj.interpolate(t) * pixel_bearing(x, cam),
                            map_width, map_height);
}

/// Per-map-pixel hit counts from warping every in-span event; the input of
/// the valid mask. Out-of-span events are skipped (and counted).
inline std::vector<int32_t> map_hit_counts(const std::vector<Event>& events,
                                           const Trajectory& traj, const EventWarper& warper,
                                           int64_t* n_out_of_span = nullptr)
{
    const int W = warper.map_width(), H = warper.map_height();
    std::vector<int32_t> counts(static_cast<size_t>(W) * H, 0);
    int64_t skipped = 0;
    for (const Event& e : events) {
        if (!traj.in_span(e.t)) {
            ++skipped;
            continue;
        }
        const Vec2 p = warper.warp(e.x, e.y, traj.interpolate(e.t));
        const auto [ix, iy] = nearest_pixel(p, W, H);
        ++counts[static_cast<size_t>(iy) * W + ix];
    }
    if (n_out_of_span) *n_out_of_span = skipped;
    return counts;
}

/// Associates paired events at the current trajectory: warps both endpoints,
/// applies the drop rules (span, pole guard, invalid nearest pixel) and emits
/// residual terms. Accounting is exact: terms + drops == pairs.
inline std::vector<ResidualTerm> associate_terms(const std::vector<PairedEvent>& pairs,
                                                 const Trajectory& traj,
                                                 const EventWarper& warper,
                                                 const ValidMask& mask, double contrast,
                                                 DropCounts* drops = nullptr, int threads = 1)
{
    const int W = warper.map_width(), H = warper.map_height();
    const int n_chunks = threads > 1 ? threads : 1;
    std::vector<std::vector<ResidualTerm>> terms_per(n_chunks);
    std::vector<DropCounts> drops_per(n_chunks);

    parallel_chunks(pairs.size(), threads, [&](int chunk, size_t begin, size_t end) {
        auto& out = terms_per[chunk];
        auto& dc = drops_per[chunk];
        out.reserve(end - begin);
        for (size_t k = begin; k < end; ++k) {
            const PairedEvent& pe = pairs[k];
            const double t_prev = pe.t - pe.dt;
            if (!traj.in_span(pe.t) || !traj.in_span(t_prev)) {
                ++dc.out_of_span;
                continue;
            }
            ResidualTerm term;
            term.t_curr = pe.t;
            term.t_prev = t_prev;
            term.z_curr = warper.rotated_bearing(pe.x, pe.y, traj.interpolate(pe.t));
            term.z_prev = warper.rotated_bearing(pe.x, pe.y, traj.interpolate(t_prev));
            if (near_pole(term.z_curr) || near_pole(term.z_prev)) {
                ++dc.pole;
                continue;
            }
            term.p_curr = project_equirect(term.z_curr, W, H);
            term.p_prev = project_equirect(term.z_prev, W, H);
            const auto [ix, iy] = nearest_pixel(term.p_curr, W, H);
            const int32_t dense = mask.dense_index(ix, iy);
            if (dense < 0) {
                ++dc.invalid_pixel;
                continue;
            }
            term.dp = Vec2(wrap_du(term.p_curr(0) - term.p_prev(0), W),
                           term.p_curr(1) - term.p_prev(1));
            term.contrast = pe.polarity * contrast;
            term.pixel = dense;
            term.pix_x = ix;
            term.pix_y = iy;
            term.w_curr = traj.weights(pe.t);
            term.w_prev = traj.weights(t_prev);
            out.push_back(term);
        }
    });

    std::vector<ResidualTerm> terms;
    size_t total = 0;
    for (const auto& v : terms_per) total += v.size();
    terms.reserve(total);
    DropCounts all;
    for (int c = 0; c < n_chunks; ++c) {
        terms.insert(terms.end(), terms_per[c].begin(), terms_per[c].end());
        all.out_of_span += drops_per[c].out_of_span;
        all.pole += drops_per[c].pole;
        all.invalid_pixel += drops_per[c].invalid_pixel;
    }
    if (drops) *drops = all;
    return terms;
}

/// pair + associate over a raw stream; errors if nothing survives.
inline std::pair<std::vector<ResidualTerm>, EventStats> build_terms(
    const std::vector<Event>& events, const Trajectory& traj, const EventWarper& warper,
    const ValidMask& mask, double contrast, int threads = 1)
{
    EventStats stats;
    stats.n_events = static_cast<int64_t>(events.size());
    const auto pairs = pair_events(events, warper.camera().width(), warper.camera().height());
    stats.n_paired = static_cast<int64_t>(pairs.size());
    auto terms = associate_terms(pairs, traj, warper, mask, contrast, &stats.dropped, threads);
    stats.n_terms = static_cast<int64_t>(terms.size());
    if (terms.empty())
        throw std::runtime_error("build_terms: no residual terms survive the drop rules");
    return {std::move(terms), stats};
}

/// e_k = G(nearest pixel of p(t_k)) . dp - polarity * C
inline double residual(const ResidualTerm& term, const GradientMap& G)
{
    return G.at(term.pix_x, term.pix_y).dot(term.dp) - term.contrast;
}

}  // namespace emba
