#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tetropix/icegraph.hpp"
#include "tetropix/image_io.hpp"
#include "tetropix/metrics.hpp"
#include "tetropix/solvers.hpp"

using namespace tetropix;

namespace {

// Pillow float32 bicubic resize of the 8x8 test pattern below to 16x16,
// output rows/cols 4..11 (tests/oracles/compute_oracles.py).
constexpr double pil_bicubic[8][8] = {
    {0.6895413, 0.6069984, 0.5337345, 0.4966133, 0.4956346, 0.5299545, 0.5995731, 0.6765894},
    {0.6042667, 0.5414849, 0.5032309, 0.5046878, 0.5458555, 0.6114978, 0.7016148, 0.7820782},
    {0.4882948, 0.4604577, 0.4688652, 0.5126264, 0.5917414, 0.6782621, 0.7721881, 0.8396449},
    {0.3855080, 0.3945766, 0.4436409, 0.5174252, 0.6159297, 0.7049842, 0.7845887, 0.8275068},
    {0.2959065, 0.3438417, 0.4275580, 0.5190842, 0.6184202, 0.6916643, 0.7388166, 0.7456639},
    {0.2533946, 0.3274506, 0.4267023, 0.5169756, 0.5982707, 0.6433426, 0.6521916, 0.6250848},
    {0.2579722, 0.3454033, 0.4410735, 0.5110994, 0.5554810, 0.5600190, 0.5247135, 0.4657694},
    {0.3079072, 0.3909066, 0.4652339, 0.5036792, 0.5062423, 0.4732223, 0.4046189, 0.3280011},
};

GrayImage natural_crop(const std::string& name, std::size_t side) {
    const auto img = load_image(std::string(TETROPIX_TEST_DATA_DIR) + "/natural/" + name + ".png");
    return crop(img, 0, 0, side, side);
}

GrayImage smooth_image(std::size_t m, std::size_t n) {
    Field f(m, n);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c)
            f(r, c) = 0.5 + 0.2 * std::sin(2.0 * std::numbers::pi * r / m) *
                                std::cos(2.0 * std::numbers::pi * c / n);
    return GrayImage(std::move(f));
}

Field backprojection(const MeasurementOperator& op, const MeasurementVector& y) {
    Field b = adjoint(op, y);
    for (double& v : b.data)
        v *= 0.25;
    return b;
}

} // namespace

TEST(Bicubic, KernelPartitionOfUnity) {
    for (double t = 0.0; t < 1.0; t += 0.125) {
        double s = 0.0;
        for (int k = -1; k <= 2; ++k)
            s += cubic_kernel(t - k);
        EXPECT_NEAR(s, 1.0, 1e-15);
    }
    EXPECT_EQ(cubic_kernel(0.0), 1.0);
    EXPECT_EQ(cubic_kernel(1.0), 0.0);
    EXPECT_EQ(cubic_kernel(2.5), 0.0);
}

TEST(Bicubic, ConstantAndSize) {
    const auto up = bicubic_upscale(GrayImage(15, 15, 0.5));
    EXPECT_EQ(up.rows(), 30u);
    EXPECT_EQ(up.cols(), 30u);
    for (double v : up.samples())
        EXPECT_NEAR(v, 0.5, 1e-15);
}

TEST(Bicubic, ReproducesAffineRampInInterior) {
    const std::size_t h = 16;
    Field lr(h, h);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < h; ++c)
            lr(r, c) = static_cast<double>(r) / h;
    const auto up = bicubic_upscale(GrayImage(lr));
    for (std::size_t a = 4; a < 2 * h - 4; ++a)
        for (std::size_t b = 0; b < 2 * h; ++b)
            EXPECT_NEAR(up(a, b), (static_cast<double>(a) - 0.5) / 2.0 / h, 1e-3);
}

TEST(Bicubic, MatchesPillowInInterior) {
    Field lr(8, 8);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j)
            lr(i, j) = static_cast<float>(0.5 + 0.4 * std::sin(0.9 * i + 0.4 * j) * std::cos(0.5 * j));
    const auto up = bicubic_upscale(GrayImage(lr));
    for (std::size_t r = 0; r < 8; ++r)
        for (std::size_t c = 0; c < 8; ++c)
            EXPECT_NEAR(up(r + 4, c + 4), pil_bicubic[r][c], 2e-6);
}

TEST(Registry, TwoSolvers) {
    const auto& reg = solver_registry();
    ASSERT_EQ(reg.size(), 2u);
    EXPECT_TRUE(solver_supports(find_solver("spl"), ShapeClass::tlz_mixed));
    EXPECT_TRUE(solver_supports(find_solver("bicubic"), ShapeClass::square2x2));
    EXPECT_FALSE(solver_supports(find_solver("bicubic"), ShapeClass::t_only));
    EXPECT_THROW(find_solver("vdsr"), ParameterError);
    const auto op = build_operator(layout_t4x4(), 32, 32);
    EXPECT_THROW(reconstruct(Method::bicubic, op, measure(op, GrayImage(32, 32, 0.5))), UnsupportedError);
}

TEST(SplConfig, Validation) {
    SplConfig c;
    EXPECT_NO_THROW(c.validate());
    c.window = 15;
    EXPECT_THROW(c.validate(), ParameterError);
    c = {};
    c.wiener = 4;
    EXPECT_THROW(c.validate(), ParameterError);
    c = {};
    c.decay = 1.5;
    EXPECT_THROW(c.validate(), ParameterError);
    c = {};
    c.max_iters = 0;
    EXPECT_THROW(c.validate(), ParameterError);
}

TEST(AxisTiling, PartialLastBlockAndSmallAxes) {
    const AxisTiling t(40, 16, 32);
    ASSERT_EQ(t.spans.size(), 3u);
    EXPECT_EQ(t.spans[2].block_len, 8u);
    EXPECT_EQ(t.spans[0].window_start, -8);
    const AxisTiling s(24, 16, 32);
    EXPECT_EQ(s.spans[0].window_len, 24u);
    EXPECT_EQ(s.spans[0].window_start, 0);
}

TEST(Spl, ConstantImage) {
    for (const auto& id : builtin_layout_ids()) {
        const auto l = *builtin_layout(id);
        const std::size_t n = l.cell() == 6 ? 48 : 64;
        const auto op = build_operator(l, n, n);
        const auto rec = spl_reconstruct(op, measure(op, GrayImage(n, n, 0.5)));
        for (double v : rec.image.samples())
            ASSERT_NEAR(v, 0.5, 1e-6) << id;
        EXPECT_LE(rec.residual, 1e-6);
    }
}

TEST(Spl, SquareBlockSumsMatchMeasurements) {
    // mid-range copy, so the final clamp to [0,1] never moves a pixel
    Field f = natural_crop("astronaut_a", 64).field();
    for (double& v : f.data)
        v = 0.25 + 0.5 * v;
    const GrayImage img(f);
    const auto op = build_operator(layout_square2x2(), 64, 64);
    const auto y = measure(op, img);
    const auto rec = spl_reconstruct(op, y);
    const auto again = measure(op, rec.image);
    for (std::size_t i = 0; i < y.size(); ++i)
        EXPECT_NEAR(again[i], y[i], 1e-3);
}

TEST(Spl, NaturalCropBeatsBackprojection) {
    const auto img = natural_crop("camera_c", 128);
    const auto op = build_operator(layout_t4x4(), 128, 128);
    const auto y = measure(op, img);
    const auto rec = spl_reconstruct(op, y);
    EXPECT_LE(rec.residual, 1e-2);
    const auto base = GrayImage::clamped(backprojection(op, y));
    EXPECT_GE(psnr(img, rec.image).as_double(), psnr(img, base).as_double());
}

TEST(Spl, LandweberStepNeverIncreasesResidual) {
    const auto img = natural_crop("coffee_a", 64);
    SplConfig cfg;
    cfg.record_trace = true;
    cfg.max_iters = 40;
    for (const auto& id : {"t4x4", "galdo6x6", "geared8x8"}) {
        const auto l = *builtin_layout(id);
        const std::size_t n = l.cell() == 6 ? 60 : 64;
        const auto small = crop(img, 0, 0, n, n);
        const auto op = build_operator(l, n, n);
        const auto rec = spl_reconstruct(op, measure(op, small), cfg);
        ASSERT_FALSE(rec.trace.empty());
        for (const auto& w : rec.trace) {
            ASSERT_EQ(w.before.size(), w.after.size());
            for (std::size_t k = 0; k < w.before.size(); ++k) {
                EXPECT_LE(w.after[k], w.before[k] + 1e-12);
                if (k > 0) { // projected residuals stay at the numerical floor
                    EXPECT_LE(w.after[k], w.after[k - 1] + 1e-10);
                }
            }
        }
    }
}

TEST(Spl, SeamFreeOnSmoothImage) {
    const auto img = smooth_image(96, 96);
    for (const auto& id : {"t4x4", "galdo6x6", "geared8x8"}) {
        const auto op = build_operator(*builtin_layout(id), 96, 96);
        const auto rec = spl_reconstruct(op, measure(op, img)).image;
        double worst = 0.0;
        for (std::size_t b = 16; b < 96; b += 16)
            for (std::size_t t = 0; t < 96; ++t) {
                const double jr = (rec(b, t) - rec(b - 1, t)) - (img(b, t) - img(b - 1, t));
                const double jc = (rec(t, b) - rec(t, b - 1)) - (img(t, b) - img(t, b - 1));
                worst = std::max({worst, std::abs(jr), std::abs(jc)});
            }
        EXPECT_LE(worst, 2.0 / 255.0) << id;
    }
}

TEST(Spl, DeterministicAndThreadIndependent) {
    const auto img = natural_crop("brick_a", 64);
    const auto op = build_operator(layout_geared8x8(), 64, 64);
    const auto y = measure(op, img);
    SplConfig one, three;
    three.threads = 3;
    const auto a = spl_reconstruct(op, y, one), b = spl_reconstruct(op, y, one),
               c = spl_reconstruct(op, y, three);
    EXPECT_EQ(a.image, b.image);
    EXPECT_EQ(a.image, c.image);
    EXPECT_EQ(a.residual, c.residual);
    EXPECT_EQ(a.iterations_used, c.iterations_used);
}

TEST(Spl, ApproximateMassConservation) {
    const auto img = natural_crop("chelsea_a", 96);
    const auto op = build_operator(layout_t4x4(), 96, 96);
    const auto y = measure(op, img);
    const auto rec = spl_reconstruct(op, y);
    double sf = 0, sy = 0;
    for (double v : rec.image.samples())
        sf += v;
    for (double v : y.values())
        sy += v;
    // sum binning: every pixel sits in exactly one support, so sum f = sum y
    EXPECT_LE(std::abs(sf - sy) / sy, 1e-2);
}

TEST(Spl, EveryMeasurementInfluencesTheOutput) {
    const auto img = natural_crop("rocket_a", 36);
    const auto op = build_operator(layout_galdo6x6(), 36, 36);
    const auto y = measure(op, img);
    SplConfig cfg;
    cfg.max_iters = 20;
    const auto ref = spl_reconstruct(op, y, cfg).image;
    for (std::size_t i = 0; i < y.size(); i += 7) {
        std::vector<double> v(y.values().begin(), y.values().end());
        if (v[i] == 0.0)
            continue;
        v[i] = 0.0;
        const MeasurementVector z(v, y.layout_id(), y.rows(), y.cols());
        EXPECT_FALSE(spl_reconstruct(op, z, cfg).image == ref) << i;
    }
}

TEST(Spl, RejectsCropModeOperator) {
    const auto op = build_operator(layout_t4x4(), 30, 30, BorderMode::crop);
    EXPECT_THROW(spl_reconstruct(op, measure(op, GrayImage(30, 30, 0.5))), PreconditionError);
}

TEST(Spl, NonConvergenceIsNotAnError) {
    const auto img = natural_crop("camera_b", 32);
    const auto op = build_operator(layout_t4x4(), 32, 32);
    SplConfig cfg;
    cfg.max_iters = 2;
    cfg.tol = 0.0;
    EXPECT_EQ(spl_reconstruct(op, measure(op, img), cfg).iterations_used, 2u);
}

TEST(BicubicSolver, ResidualAndImage) {
    const auto img = natural_crop("astronaut_b", 64);
    const auto op = build_operator(layout_square2x2(), 64, 64);
    const auto rec = reconstruct(Method::bicubic, op, measure(op, img));
    EXPECT_EQ(rec.method, Method::bicubic);
    EXPECT_EQ(rec.image.rows(), 64u);
    EXPECT_GT(rec.residual, 0.0);
    EXPECT_LT(rec.residual, 0.1);
}
