#include <catch2/catch_amalgamated.hpp>

#include "emba/gradient_map.hpp"
#include "helpers.hpp"

using namespace emba;

TEST_CASE("nearest-neighbor sampling")
{
    GradientMap G(32, 16);
    G.at(3, 8) = Vec2(1.5, -2.5);

    CHECK((sample_gradient_nn(G, Vec2(3.4, 7.6)) - Vec2(1.5, -2.5)).norm() == 0.0);
    CHECK(sample_gradient_nn(G, Vec2(3.6, 7.6)).norm() == 0.0);

    SECTION("uniform map returns the constant anywhere")
    {
        GradientMap U(32, 16);
        for (int i = 0; i < 16; ++i)
            for (int j = 0; j < 32; ++j) U.at(j, i) = Vec2(0.25, -0.75);
        auto g = test::rng(40);
        for (int k = 0; k < 100; ++k) {
            const Vec2 p(test::uniform(g, 0, 32), test::uniform(g, 0, 16));
            CHECK((sample_gradient_nn(U, p) - Vec2(0.25, -0.75)).norm() == 0.0);
        }
    }

    SECTION("u wraps")
    {
        GradientMap Gw(32, 16);
        Gw.at(0, 5) = Vec2(9, 9);
        CHECK((sample_gradient_nn(Gw, Vec2(31.8, 5.2)) - Vec2(9, 9)).norm() == 0.0);
    }

    SECTION("exactly one pixel is touched")
    {
        // the sample must depend only on the rounded pixel: randomizing every
        // other pixel cannot change the result
        auto g = test::rng(41);
        for (int k = 0; k < 50; ++k) {
            const Vec2 p(test::uniform(g, 0, 32), test::uniform(g, 0, 15.49));
            const auto [ix, iy] = nearest_pixel(p, 32, 16);
            GradientMap A(32, 16), B(32, 16);
            for (int i = 0; i < 16; ++i)
                for (int j = 0; j < 32; ++j) {
                    A.at(j, i) = Vec2(test::uniform(g, -1, 1), test::uniform(g, -1, 1));
                    B.at(j, i) = Vec2(test::uniform(g, -1, 1), test::uniform(g, -1, 1));
                }
            B.at(ix, iy) = A.at(ix, iy);
            CHECK((sample_gradient_nn(A, p) - sample_gradient_nn(B, p)).norm() == 0.0);
        }
    }
}

TEST_CASE("gradient hessian stencil")
{
    SECTION("constant map has zero derivative")
    {
        GradientMap G(16, 8);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 16; ++j) G.at(j, i) = Vec2(0.4, -0.1);
        CHECK(gradient_hessian_nn(G, Vec2(7.2, 3.9)).cwiseAbs().maxCoeff() == 0.0);
    }

    SECTION("linear ramp in u")
    {
        GradientMap G(16, 8);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 16; ++j) G.at(j, i) = Vec2(j, 0.0);
        const Mat2 D = gradient_hessian_nn(G, Vec2(7.0, 3.0));  // away from the wrap seam
        CHECK(std::abs(D(0, 0) - 1.0) < 1e-14);
        CHECK(std::abs(D(0, 1)) < 1e-14);
        CHECK(std::abs(D(1, 0)) < 1e-14);
        CHECK(std::abs(D(1, 1)) < 1e-14);
    }

    SECTION("matches the identical stencil applied to samples")
    {
        const GradientMap G = test::random_smooth_gradient_map(48, 24, 42);
        auto g = test::rng(43);
        for (int k = 0; k < 200; ++k) {
            const Vec2 p(test::uniform(g, 0, 48), test::uniform(g, 1.51, 22.49));
            const auto [ix, iy] = nearest_pixel(p, 48, 24);
            const Mat2 D = gradient_hessian_nn(G, p);
            const Vec2 du = 0.5 * (sample_gradient_nn(G, Vec2(ix + 1.0, iy)) -
                                   sample_gradient_nn(G, Vec2(ix - 1.0, iy)));
            const Vec2 dv = 0.5 * (sample_gradient_nn(G, Vec2(ix, iy + 1.0)) -
                                   sample_gradient_nn(G, Vec2(ix, iy - 1.0)));
            CHECK(std::abs(D(0, 0) - du(0)) < 1e-10);
            CHECK(std::abs(D(1, 0) - du(1)) < 1e-10);
            CHECK(std::abs(D(0, 1) - dv(0)) < 1e-10);
            CHECK(std::abs(D(1, 1) - dv(1)) < 1e-10);
        }
    }

    SECTION("one-sided rows at the v boundaries")
    {
        const GradientMap G = test::random_smooth_gradient_map(16, 8, 44);
        const Mat2 top = gradient_hessian_nn(G, Vec2(5.0, 0.0));
        const Vec2 dv_top = G.at(5, 1) - G.at(5, 0);
        CHECK(std::abs(top(0, 1) - dv_top(0)) < 1e-14);
        const Mat2 bottom = gradient_hessian_nn(G, Vec2(5.0, 7.0));
        const Vec2 dv_bot = G.at(5, 7) - G.at(5, 6);
        CHECK(std::abs(bottom(1, 1) - dv_bot(1)) < 1e-14);
    }
}

TEST_CASE("valid mask thresholding")
{
    const int W = 8, H = 4;
    std::vector<int32_t> counts(W * H, 0);
    counts[5] = 5;   // exactly the threshold: invalid
    counts[6] = 6;   // strictly above: valid
    counts[17] = 100;

    const ValidMask mask = build_valid_mask(counts, W, H, 5);
    CHECK_FALSE(mask.is_valid(5, 0));
    CHECK(mask.is_valid(6, 0));
    CHECK(mask.is_valid(1, 2));
    CHECK(mask.n_valid() == 2);

    CHECK(mask.dense_index(6, 0) == 0);
    CHECK(mask.dense_index(1, 2) == 1);
    CHECK(mask.pixel(0) == std::pair<int, int>(6, 0));
    CHECK(mask.pixel(1) == std::pair<int, int>(1, 2));

    SECTION("no events anywhere is a hard error")
    {
        std::vector<int32_t> zeros(W * H, 0);
        CHECK_THROWS(build_valid_mask(zeros, W, H, 5));
    }

    SECTION("N_p equals the brute-force count")
    {
        auto g = test::rng(45);
        std::vector<int32_t> random_counts(W * H);
        int expected = 0;
        for (auto& c : random_counts) {
            c = static_cast<int32_t>(test::uniform(g, 0, 12));
            if (c > 5) ++expected;
        }
        if (expected == 0) {
            random_counts[0] = 7;
            expected = 1;
        }
        CHECK(build_valid_mask(random_counts, W, H, 5).n_valid() == expected);
    }
}
