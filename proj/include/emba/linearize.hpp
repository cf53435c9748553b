#pragma once

#include <array>
#include <optional>

#include "emba/events.hpp"

namespace emba {

/// One Jacobian row in sparse form: up to 4 distinct control-pose blocks
/// (1x3 each, duplicates merged) and one valid-pixel block (1x2).
struct TermJacobianRow {
    struct PoseEntry {
        int32_t pose;
        Eigen::RowVector3d j;
    };
    std::array<PoseEntry, 4> pose_entries;
    int n_pose = 0;
    int32_t pixel = -1;
    Eigen::RowVector2d j_map = Eigen::RowVector2d::Zero();
    double res = 0.0;

    void add_pose(int32_t pose, const Eigen::RowVector3d& j)
    {
        for (int i = 0; i < n_pose; ++i) {
            if (pose_entries[i].pose == pose) {
                pose_entries[i].j += j;
                return;
            }
        }
        pose_entries[n_pose++] = {pose, j};
    }

    bool finite() const
    {
        if (!j_map.allFinite() || !std::isfinite(res)) return false;
        for (int i = 0; i < n_pose; ++i)
            if (!pose_entries[i].j.allFinite()) return false;
        return true;
    }
};

/// Analytical linearization of one error term around the operating point.
///
/// Map block:   dp^T at the nearest valid pixel.
/// Pose block:  -(dp^T * ddG + G^T) * E(t_k) at the event time and
///              +G^T * E(t_k - dt_k) at the paired time, each distributed to
///              its two bracketing control poses with weights (1-tau, tau).
///
/// Returns nullopt if either bearing fell inside the pole guard band (the
/// term is skipped for this iteration). The term carries everything needed
/// from the operating point: bearings, map points and pose weights.
inline std::optional<TermJacobianRow> linearize_term(const ResidualTerm& term,
                                                     const GradientMap& G)
{
    if (near_pole(term.z_curr) || near_pole(term.z_prev)) return std::nullopt;

    const int W = G.width(), H = G.height();
    const Mat23 E_curr = e_matrix(term.z_curr, W, H);
    const Mat23 E_prev = e_matrix(term.z_prev, W, H);
    const Vec2 g = G.at(term.pix_x, term.pix_y);
    const Mat2 ddG = gradient_hessian_nn(G, term.p_curr);

    TermJacobianRow row;
    row.pixel = term.pixel;
    row.j_map = term.dp.transpose();
    row.res = g.dot(term.dp) - term.contrast;

    const Eigen::RowVector3d row_curr = -(term.dp.transpose() * ddG + g.transpose()) * E_curr;
    const Eigen::RowVector3d row_prev = g.transpose() * E_prev;

    row.add_pose(term.w_curr.index, (1.0 - term.w_curr.tau) * row_curr);
    row.add_pose(term.w_curr.index + 1, term.w_curr.tau * row_curr);
    row.add_pose(term.w_prev.index, (1.0 - term.w_prev.tau) * row_prev);
    row.add_pose(term.w_prev.index + 1, term.w_prev.tau * row_prev);
    return row;
}

/// Huber loss of the supplementary: u^2 inside the band, (2|u|-delta)*delta outside.
inline double huber_cost(double u, double delta)
{
    const double a = std::abs(u);
    return a < delta ? u * u : (2.0 * a - delta) * delta;
}

/// IRLS weight such that sum w*e^2 is the Gauss-Newton surrogate of sum rho(e).
inline double huber_weight(double u, double delta)
{
    const double a = std::abs(u);
    return a < delta ? 1.0 : delta / a;
}

/// Scales each row and its residual by sqrt(w).
inline void huber_reweight(std::vector<TermJacobianRow>& rows, double delta)
{
    for (TermJacobianRow& row : rows) {
        const double s = std::sqrt(huber_weight(row.res, delta));
        if (s == 1.0) continue;
        row.j_map *= s;
        for (int i = 0; i < row.n_pose; ++i) row.pose_entries[i].j *= s;
        row.res *= s;
    }
}

}  // namespace emba
