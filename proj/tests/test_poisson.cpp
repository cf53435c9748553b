#include <catch2/catch_amalgamated.hpp>

#include "emba/poisson.hpp"
#include "helpers.hpp"

using namespace emba;

namespace {

IntensityMap smooth_image(int W, int H, uint64_t seed)
{
    auto g = test::rng(seed);
    IntensityMap img(W, H);
    for (int w = 0; w < 8; ++w) {
        const double a = test::uniform(g, -0.4, 0.4);
        const int fu = static_cast<int>(test::uniform(g, 1.0, 4.0));
        const double fv = test::uniform(g, 0.5, 3.0);
        const double phase = test::uniform(g, 0.0, 2.0 * kPi);
        for (int i = 0; i < H; ++i)
            for (int j = 0; j < W; ++j)
                img.at(j, i) += a * std::sin(2.0 * kPi * (fu * j / double(W) +
                                                          fv * i / double(H)) + phase);
    }
    return img;
}

/// Forward differences matching the solver stencil: u wrapped, gy zero at the
/// bottom row.
GradientMap forward_gradient(const IntensityMap& img)
{
    GradientMap G(img.width, img.height);
    for (int i = 0; i < img.height; ++i)
        for (int j = 0; j < img.width; ++j) {
            G.at(j, i)(0) = img.at((j + 1) % img.width, i) - img.at(j, i);
            G.at(j, i)(1) = (i + 1 < img.height) ? img.at(j, i + 1) - img.at(j, i) : 0.0;
        }
    return G;
}

double aligned_rmse(const IntensityMap& a, const IntensityMap& b)
{
    const double shift = b.mean() - a.mean();
    double s = 0.0;
    for (size_t k = 0; k < a.values.size(); ++k) {
        const double d = a.values[k] + shift - b.values[k];
        s += d * d;
    }
    return std::sqrt(s / a.values.size());
}

}  // namespace

TEST_CASE("zero gradients give a constant map")
{
    const GradientMap G(64, 32);
    const PoissonResult r = poisson_reconstruct(G);
    CHECK(r.converged);
    for (double v : r.map.values) CHECK(v == 0.0);
}

TEST_CASE("ramp image round trip is exact")
{
    const int W = 64, H = 32;
    IntensityMap ramp(W, H);
    for (int i = 0; i < H; ++i)
        for (int j = 0; j < W; ++j) ramp.at(j, i) = 0.05 * i;
    const PoissonResult r = poisson_reconstruct(forward_gradient(ramp), nullptr, 1e-12);
    REQUIRE(r.converged);
    CHECK(aligned_rmse(r.map, ramp) < 1e-6);
}

TEST_CASE("random smooth image round trip")
{
    const int W = 128, H = 64;
    const IntensityMap img = smooth_image(W, H, 50);
    const PoissonResult r = poisson_reconstruct(forward_gradient(img));
    REQUIRE(r.converged);
    CHECK(aligned_rmse(r.map, img) < 1e-3);
}

TEST_CASE("result is mean-zero and gauge invariant")
{
    const int W = 48, H = 24;
    const IntensityMap img = smooth_image(W, H, 51);
    const GradientMap G = forward_gradient(img);
    const PoissonResult r = poisson_reconstruct(G);
    REQUIRE(r.converged);
    CHECK(std::abs(r.map.mean()) < 1e-10);

    // scaling the field scales the solution: the mean removal pins the gauge
    GradientMap G2 = G;
    for (int i = 0; i < H; ++i)
        for (int j = 0; j < W; ++j) G2.at(j, i) *= 2.0;
    const PoissonResult r2 = poisson_reconstruct(G2);
    REQUIRE(r2.converged);
    for (size_t k = 0; k < r.map.values.size(); ++k)
        CHECK(std::abs(r2.map.values[k] - 2.0 * r.map.values[k]) < 1e-6);
}

TEST_CASE("mask zeroes invalid gradients in the right-hand side")
{
    const int W = 16, H = 8;
    GradientMap G(W, H);
    for (int i = 0; i < H; ++i)
        for (int j = 0; j < W; ++j) G.at(j, i) = Vec2(0.3, -0.2);

    std::vector<int32_t> counts(W * H, 0);
    counts[3] = 10;  // one valid pixel
    const ValidMask mask(counts, W, H, 5);

    const PoissonResult with_mask = poisson_reconstruct(G, &mask);
    GradientMap manual(W, H);
    manual.at(3, 0) = Vec2(0.3, -0.2);
    const PoissonResult expect = poisson_reconstruct(manual);
    REQUIRE(with_mask.converged);
    for (size_t k = 0; k < expect.map.values.size(); ++k)
        CHECK(std::abs(with_mask.map.values[k] - expect.map.values[k]) < 1e-10);
}

TEST_CASE("non-convergence is reported, not thrown")
{
    const IntensityMap img = smooth_image(64, 32, 52);
    const PoissonResult r = poisson_reconstruct(forward_gradient(img), nullptr, 1e-8, 3);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 3);
    CHECK(r.rel_residual > 1e-8);
}
