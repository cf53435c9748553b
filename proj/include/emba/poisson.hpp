#pragma once

#include <cmath>
#include <vector>

#include "emba/gradient_map.hpp"

namespace emba {

struct PoissonResult {
    IntensityMap map;
    int iterations = 0;
    double rel_residual = 0.0;
    bool converged = false;
};

namespace detail {

// Forward differences: periodic in u, zero beyond the bottom row in v.
// Their adjoints give the backward-difference divergence, so the normal
// equations below are exactly the discrete Poisson equation
// (Du^T Du + Dv^T Dv) M = Du^T gx + Dv^T gy with Neumann top/bottom rows.
inline void laplacian_apply(const std::vector<double>& x, std::vector<double>& y,
                            int W, int H)
{
    for (int i = 0; i < H; ++i) {
        const size_t row = static_cast<size_t>(i) * W;
        for (int j = 0; j < W; ++j) {
            const int jm = (j + W - 1) % W, jp = (j + 1) % W;
            double v = 2.0 * x[row + j] - x[row + jm] - x[row + jp];
            if (i > 0) v += x[row + j] - x[row - W + j];
            if (i < H - 1) v += x[row + j] - x[row + W + j];
            y[row + j] = v;
        }
    }
}

inline std::vector<double> divergence_rhs(const GradientMap& G)
{
    const int W = G.width(), H = G.height();
    std::vector<double> b(static_cast<size_t>(W) * H);
    for (int i = 0; i < H; ++i) {
        for (int j = 0; j < W; ++j) {
            const int jm = (j + W - 1) % W;
            double v = G.at(jm, i)(0) - G.at(j, i)(0);
            if (i > 0) v += G.at(j, i - 1)(1);
            if (i < H - 1) v -= G.at(j, i)(1);
            b[static_cast<size_t>(i) * W + j] = v;
        }
    }
    return b;
}

inline void remove_mean(std::vector<double>& x)
{
    double m = 0.0;
    for (double v : x) m += v;
    m /= x.size();
    for (double& v : x) v -= m;
}

}  // namespace detail

/// Least-squares intensity map from the gradient field: conjugate gradient on
/// the 5-point Laplacian (periodic in azimuth, Neumann at top/bottom), with
/// divergence right-hand side and mean-zero gauge. If a mask is given, the
/// gradients of invalid pixels enter the right-hand side as zero.
inline PoissonResult poisson_reconstruct(const GradientMap& G, const ValidMask* mask = nullptr,
                                         double tol = 1e-8, int max_iters = 0)
{
    const int W = G.width(), H = G.height();
    const size_t n = static_cast<size_t>(W) * H;
    if (max_iters <= 0) max_iters = 10 * W;

    const GradientMap* src = &G;
    GradientMap masked(1, 1);
    if (mask) {
        masked = G;
        for (int i = 0; i < H; ++i)
            for (int j = 0; j < W; ++j)
                if (!mask->is_valid(j, i)) masked.at(j, i).setZero();
        src = &masked;
    }

    std::vector<double> b = detail::divergence_rhs(*src);
    detail::remove_mean(b);  // project out the constant null space

    PoissonResult out;
    out.map = IntensityMap(W, H);

    double b_norm2 = 0.0;
    for (double v : b) b_norm2 += v * v;
    if (b_norm2 == 0.0) {
        out.converged = true;
        return out;
    }

    std::vector<double> x(n, 0.0), r = b, p = b, Ap(n);
    double rr = b_norm2;
    int it = 0;
    for (; it < max_iters; ++it) {
        if (std::sqrt(rr / b_norm2) <= tol) break;
        detail::laplacian_apply(p, Ap, W, H);
        double pAp = 0.0;
        for (size_t k = 0; k < n; ++k) pAp += p[k] * Ap[k];
        if (pAp <= 0.0) break;  // numerically exhausted
        const double alpha = rr / pAp;
        for (size_t k = 0; k < n; ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * Ap[k];
        }
        double rr_new = 0.0;
        for (size_t k = 0; k < n; ++k) rr_new += r[k] * r[k];
        const double beta = rr_new / rr;
        for (size_t k = 0; k < n; ++k) p[k] = r[k] + beta * p[k];
        rr = rr_new;
    }

    detail::remove_mean(x);
    out.map.values = std::move(x);
    out.iterations = it;
    out.rel_residual = std::sqrt(rr / b_norm2);
    out.converged = out.rel_residual <= tol;
    return out;
}

}  // namespace emba
