#pragma once

#include <algorithm>
#include <unordered_map>

#include <Eigen/Dense>

#include "emba/linearize.hpp"

namespace emba {

/// Partitioned regularized normal equations, formed cumulatively from row
/// outer products without materializing the Jacobian.
///
///   A11: dense 3*Nc' x 3*Nc' pose block (Nc' = free poses),
///   A12: sparse coupling, one 3x2 block per touched (pose, pixel),
///   A22: strictly 2x2 block-diagonal map block, one block per valid pixel.
struct NormalEquations {
    int n_pose_blocks = 0;  // free control poses
    int n_pixels = 0;       // valid map pixels
    Eigen::MatrixXd A11;
    Eigen::VectorXd b1;
    std::vector<Mat2> A22;
    Eigen::VectorXd b2;
    std::unordered_map<uint64_t, Mat32> A12;  // key = pose * n_pixels + pixel

    NormalEquations() = default;
    NormalEquations(int n_pose, int n_pix)
        : n_pose_blocks(n_pose), n_pixels(n_pix),
          A11(Eigen::MatrixXd::Zero(3 * n_pose, 3 * n_pose)),
          b1(Eigen::VectorXd::Zero(3 * n_pose)),
          A22(static_cast<size_t>(n_pix), Mat2::Zero()),
          b2(Eigen::VectorXd::Zero(2 * n_pix)) {}

    uint64_t key(int pose, int pixel) const
    {
        return static_cast<uint64_t>(pose) * n_pixels + pixel;
    }

    /// A12 grouped by pixel with pose-sorted entries; the deterministic
    /// layout used for solving and matrix-vector products.
    std::vector<std::vector<std::pair<int, Mat32>>> coupling_by_pixel() const
    {
        std::vector<std::vector<std::pair<int, Mat32>>> by_pixel(n_pixels);
        for (const auto& [k, block] : A12)
            by_pixel[k % n_pixels].emplace_back(static_cast<int>(k / n_pixels), block);
        for (auto& col : by_pixel)
            std::sort(col.begin(), col.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
        return by_pixel;
    }

    void merge(const NormalEquations& other)
    {
        A11 += other.A11;
        b1 += other.b1;
        b2 += other.b2;
        for (int j = 0; j < n_pixels; ++j) A22[j] += other.A22[j];
        for (const auto& [k, block] : other.A12) {
            auto [it, inserted] = A12.try_emplace(k, block);
            if (!inserted) it->second += block;
        }
    }
};

/// Adds one row's outer-product contribution. Pose indices below
/// first_free_pose are the gauge and do not enter the system.
inline void accumulate_row(NormalEquations& ne, const TermJacobianRow& row,
                           int first_free_pose)
{
    const double e = row.res;
    // map-map and map rhs
    ne.A22[row.pixel] += row.j_map.transpose() * row.j_map;
    ne.b2.segment<2>(2 * row.pixel) -= row.j_map.transpose() * e;

    for (int a = 0; a < row.n_pose; ++a) {
        const int pa = row.pose_entries[a].pose - first_free_pose;
        if (pa < 0) continue;
        const auto& ja = row.pose_entries[a].j;
        ne.b1.segment<3>(3 * pa) -= ja.transpose() * e;
        auto [it, inserted] = ne.A12.try_emplace(ne.key(pa, row.pixel),
                                                 ja.transpose() * row.j_map);
        if (!inserted) it->second += ja.transpose() * row.j_map;
        for (int b = 0; b < row.n_pose; ++b) {
            const int pb = row.pose_entries[b].pose - first_free_pose;
            if (pb < 0) continue;
            ne.A11.block<3, 3>(3 * pa, 3 * pb) +=
                ja.transpose() * row.pose_entries[b].j;
        }
    }
}

/// Forms A and b from one linearization pass. n_poses counts all control
/// poses; the first first_free_pose of them are held fixed (gauge).
inline NormalEquations accumulate(const std::vector<TermJacobianRow>& rows, int n_poses,
                                  int n_pixels, int first_free_pose = 1, int threads = 1)
{
    const int n_free = n_poses - first_free_pose;
    if (n_free < 1)
        throw std::invalid_argument("accumulate: no free poses");

    if (threads <= 1) {
        NormalEquations ne(n_free, n_pixels);
        for (size_t k = 0; k < rows.size(); ++k) {
            if (!rows[k].finite())
                throw std::runtime_error("accumulate: non-finite contribution from term " +
                                         std::to_string(k));
            accumulate_row(ne, rows[k], first_free_pose);
        }
        return ne;
    }

    std::vector<NormalEquations> partial;
    for (int c = 0; c < threads; ++c) partial.emplace_back(n_free, n_pixels);
    std::vector<std::string> errors(threads);
    parallel_chunks(rows.size(), threads, [&](int chunk, size_t begin, size_t end) {
        for (size_t k = begin; k < end; ++k) {
            if (!rows[k].finite()) {
                errors[chunk] = "accumulate: non-finite contribution from term " +
                                std::to_string(k);
                return;
            }
            accumulate_row(partial[chunk], rows[k], first_free_pose);
        }
    });
    for (const auto& err : errors)
        if (!err.empty()) throw std::runtime_error(err);
    NormalEquations ne = std::move(partial[0]);
    for (int c = 1; c < threads; ++c) ne.merge(partial[c]);
    return ne;
}

/// L2 map prior: eta*I on every valid-pixel block, -eta * G_op on its rhs.
/// Invalid pixels are not state; their analytic update is -G_op, which keeps
/// them at exactly zero.
inline void apply_regularization(NormalEquations& ne, double eta, const GradientMap& G_op,
                                 const ValidMask& mask)
{
    if (eta == 0.0) return;
    if (eta < 0.0) throw std::invalid_argument("apply_regularization: eta must be >= 0");
    for (int j = 0; j < ne.n_pixels; ++j) {
        const auto [ix, iy] = mask.pixel(j);
        ne.A22[j] += eta * Mat2::Identity();
        ne.b2.segment<2>(2 * j) -= eta * G_op.at(ix, iy);
    }
}

}  // namespace emba
