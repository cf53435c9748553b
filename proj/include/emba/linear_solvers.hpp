#pragma once

#include <Eigen/Cholesky>

#include "emba/normal_equations.hpp"

namespace emba {

struct SolveResult {
    Eigen::VectorXd dalpha;  // 3 * n_pose_blocks
    Eigen::VectorXd dbeta;   // 2 * n_pixels
    bool ok = false;
    std::string error;
    int iterations = 0;       // cg backend only
    double rel_residual = 0;  // cg backend only
};

namespace detail {

inline bool invert_damped_block(const Mat2& A, double lambda, Mat2& inv)
{
    const double a = A(0, 0) + lambda, b = A(0, 1), c = A(1, 0), d = A(1, 1) + lambda;
    const double det = a * d - b * c;
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d), 1e-300});
    if (std::abs(det) < 1e-12 * scale * scale) return false;
    inv << d, -b, -c, a;
    inv /= det;
    return true;
}

}  // namespace detail

/// Eliminates the block-diagonal map part, solves the reduced dense pose
/// system by LDLT, then back-substitutes the map update:
///   (A11 + lambda*I - A12 * (A22 + lambda*I)^-1 * A12^T) da = b1 - A12 * ...
inline SolveResult schur_solve(const NormalEquations& ne, double lambda)
{
    SolveResult out;
    const int np = 3 * ne.n_pose_blocks;
    Eigen::MatrixXd S = ne.A11 + lambda * Eigen::MatrixXd::Identity(np, np);
    Eigen::VectorXd rhs = ne.b1;

    const auto by_pixel = ne.coupling_by_pixel();
    std::vector<Mat2> inv(ne.n_pixels);
    for (int j = 0; j < ne.n_pixels; ++j) {
        if (!detail::invert_damped_block(ne.A22[j], lambda, inv[j])) {
            out.error = "schur_solve: singular damped map block " + std::to_string(j) +
                        "; increase lambda";
            return out;
        }
        const auto& col = by_pixel[j];
        if (col.empty()) continue;
        const Eigen::Vector2d b2j = ne.b2.segment<2>(2 * j);
        for (const auto& [pa, Ba] : col) {
            const Mat32 Ba_inv = Ba * inv[j];
            rhs.segment<3>(3 * pa) -= Ba_inv * b2j;
            for (const auto& [pb, Bb] : col)
                S.block<3, 3>(3 * pa, 3 * pb) -= Ba_inv * Bb.transpose();
        }
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
    const double pivot_scale = std::max(S.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    if (ldlt.info() != Eigen::Success ||
        (ldlt.vectorD().array().abs() < 1e-12 * pivot_scale).any()) {
        out.error = "schur_solve: singular reduced pose system; increase lambda";
        return out;
    }
    out.dalpha = ldlt.solve(rhs);

    out.dbeta.resize(2 * ne.n_pixels);
    for (int j = 0; j < ne.n_pixels; ++j) {
        Eigen::Vector2d r = ne.b2.segment<2>(2 * j);
        for (const auto& [pa, Ba] : by_pixel[j])
            r -= Ba.transpose() * out.dalpha.segment<3>(3 * pa);
        out.dbeta.segment<2>(2 * j) = inv[j] * r;
    }
    out.ok = true;
    return out;
}

/// Full damped system assembled densely; oracle and small-problem backend.
inline Eigen::MatrixXd assemble_dense(const NormalEquations& ne, double lambda)
{
    const int np = 3 * ne.n_pose_blocks, nm = 2 * ne.n_pixels, n = np + nm;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    H.topLeftCorner(np, np) = ne.A11;
    for (int j = 0; j < ne.n_pixels; ++j)
        H.block<2, 2>(np + 2 * j, np + 2 * j) = ne.A22[j];
    for (const auto& [k, B] : ne.A12) {
        const int pixel = static_cast<int>(k % ne.n_pixels);
        const int pose = static_cast<int>(k / ne.n_pixels);
        H.block<3, 2>(3 * pose, np + 2 * pixel) = B;
        H.block<2, 3>(np + 2 * pixel, 3 * pose) = B.transpose();
    }
    H.diagonal().array() += lambda;
    return H;
}

inline SolveResult dense_solve(const NormalEquations& ne, double lambda)
{
    SolveResult out;
    const int np = 3 * ne.n_pose_blocks;
    const Eigen::MatrixXd H = assemble_dense(ne, lambda);
    Eigen::VectorXd b(H.rows());
    b << ne.b1, ne.b2;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    const double pivot_scale = std::max(H.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    if (ldlt.info() != Eigen::Success ||
        (ldlt.vectorD().array().abs() < 1e-12 * pivot_scale).any()) {
        out.error = "dense_solve: singular damped system; increase lambda";
        return out;
    }
    const Eigen::VectorXd x = ldlt.solve(b);
    out.dalpha = x.head(np);
    out.dbeta = x.tail(2 * ne.n_pixels);
    out.ok = true;
    return out;
}

/// Jacobi-preconditioned conjugate gradient on the full damped system;
/// the generic comparison backend that does not exploit the sparsity.
inline SolveResult cg_solve(const NormalEquations& ne, double lambda, double tol = 1e-10)
{
    SolveResult out;
    const int np = 3 * ne.n_pose_blocks, nm = 2 * ne.n_pixels, n = np + nm;
    const auto by_pixel = ne.coupling_by_pixel();

    const auto matvec = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
        y.head(np).noalias() = ne.A11 * x.head(np);
        for (int j = 0; j < ne.n_pixels; ++j)
            y.segment<2>(np + 2 * j).noalias() = ne.A22[j] * x.segment<2>(np + 2 * j);
        for (int j = 0; j < ne.n_pixels; ++j) {
            for (const auto& [pa, B] : by_pixel[j]) {
                y.segment<3>(3 * pa).noalias() += B * x.segment<2>(np + 2 * j);
                y.segment<2>(np + 2 * j).noalias() += B.transpose() * x.segment<3>(3 * pa);
            }
        }
        y += lambda * x;
    };

    Eigen::VectorXd diag(n);
    diag.head(np) = ne.A11.diagonal();
    for (int j = 0; j < ne.n_pixels; ++j) {
        diag(np + 2 * j) = ne.A22[j](0, 0);
        diag(np + 2 * j + 1) = ne.A22[j](1, 1);
    }
    diag.array() += lambda;
    const Eigen::VectorXd precond =
        (diag.array().abs() > 1e-300).select(diag.cwiseInverse(), Eigen::VectorXd::Ones(n));

    Eigen::VectorXd b(n);
    b << ne.b1, ne.b2;
    const double b_norm = b.norm();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    if (b_norm == 0.0) {
        out.dalpha = x.head(np);
        out.dbeta = x.tail(nm);
        out.ok = true;
        return out;
    }

    Eigen::VectorXd r = b, z = precond.cwiseProduct(r), p = z, Ap(n);
    double rz = r.dot(z);
    const int max_iters = 10 * n;
    int it = 0;
    for (; it < max_iters; ++it) {
        if (r.norm() / b_norm <= tol) break;
        matvec(p, Ap);
        const double pAp = p.dot(Ap);
        if (!(pAp > 0.0)) break;
        const double alpha = rz / pAp;
        x += alpha * p;
        r -= alpha * Ap;
        z = precond.cwiseProduct(r);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    out.iterations = it;
    out.rel_residual = r.norm() / b_norm;
    out.ok = out.rel_residual <= tol;
    if (!out.ok)
        out.error = "cg_solve: no convergence after " + std::to_string(it) +
                    " iterations, relative residual " + std::to_string(out.rel_residual);
    out.dalpha = x.head(np);
    out.dbeta = x.tail(nm);
    return out;
}

}  // namespace emba
