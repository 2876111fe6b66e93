#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dopo/spectral.hpp"

using namespace dopo;

namespace {

double max_diff(std::span<const cplx> a, std::span<const cplx> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

FluctuationField random_field(const GridPtr& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> n;
    FluctuationField f = FluctuationField::zeros(g);
    for (std::size_t j = 0; j < g->n_points(); ++j) {
        f.first[j] = {n(rng), n(rng)};
        f.second[j] = {n(rng), n(rng)};
    }
    return f;
}

} // namespace

TEST(Grid, LayoutAndWrap) {
    const auto g = make_grid(256, 40.0);
    EXPECT_DOUBLE_EQ(g->spacing(), 40.0 / 256);
    EXPECT_DOUBLE_EQ(g->x(0), -20.0);
    EXPECT_DOUBLE_EQ(g->x(128), 0.0);
    EXPECT_NEAR(g->wrap(21.0), -19.0, 1e-14);
    EXPECT_NEAR(g->wrap(-20.5), 19.5, 1e-14);
    EXPECT_THROW(make_grid(100, 40.0), ConfigError);
    EXPECT_THROW(make_grid(64, 0.0), ConfigError);
}

TEST(Grid, MismatchDetected) {
    EXPECT_THROW(require_same_grid(make_grid(64, 10), make_grid(128, 10)), GridMismatchError);
    EXPECT_NO_THROW(require_same_grid(make_grid(64, 10), make_grid(64, 10)));
}

TEST(Laplacian, ConstantGivesZero) {
    const auto g = make_grid(128, 40.0);
    const ComplexField f{g, CVec(128, cplx(2.5, -1.0))};
    for (auto v : laplacian(f).values)
        EXPECT_LT(std::abs(v), 1e-13);
}

TEST(Laplacian, FourierModeIsEigenfunction) {
    const auto g = make_grid(128, 40.0);
    for (int m : {1, 5, 63, -7}) {
        const double k = 2.0 * std::numbers::pi * m / g->length();
        ComplexField f = ComplexField::zeros(g);
        CVec expect(128);
        for (std::size_t j = 0; j < 128; ++j) {
            f.values[j] = std::polar(1.0, k * g->x(j));
            expect[j] = -k * k * f.values[j];
        }
        EXPECT_LT(max_diff(laplacian(f).values, expect), 1e-9 * std::max(1.0, k * k));
    }
}

TEST(Laplacian, SechMatchesAnalyticSecondDerivative) {
    // Wide enough that the periodic images and the derivative jump at the edge are below 1e-12.
    const auto g = make_grid(512, 60.0);
    RealField f = RealField::zeros(g);
    RVec expect(512);
    for (std::size_t j = 0; j < 512; ++j) {
        const double s = 1.0 / std::cosh(g->x(j));
        f.values[j] = s;
        expect[j] = s - 2.0 * s * s * s;
    }
    const RealField d2 = laplacian(f);
    double err = 0.0;
    for (std::size_t j = 0; j < 512; ++j)
        err = std::max(err, std::abs(d2.values[j] - expect[j]));
    EXPECT_LT(err, 1e-10);
}

TEST(Spectral, DerivativeAndShift) {
    const auto g = make_grid(256, 40.0);
    const SpectralOps ops(g);
    RVec f(256), df(256), shifted(256);
    for (std::size_t j = 0; j < 256; ++j) {
        const double x = g->x(j);
        f[j] = std::exp(-x * x);
        df[j] = -2.0 * x * f[j];
        shifted[j] = std::exp(-(x - 1.3) * (x - 1.3));
    }
    const RVec d = ops.derivative(f), s = ops.shift(f, 1.3);
    for (std::size_t j = 0; j < 256; ++j) {
        EXPECT_NEAR(d[j], df[j], 1e-11);
        EXPECT_NEAR(s[j], shifted[j], 1e-11);
    }
}

TEST(Spectral, DealiasedProductIsExactForBandLimitedFactors) {
    const auto g = make_grid(64, 2.0 * std::numbers::pi);
    const SpectralOps ops(g);
    CVec u(64), expect(64);
    for (std::size_t j = 0; j < 64; ++j) {
        const double x = g->x(j);
        u[j] = std::cos(10.0 * x);
        // cos^3 y = (3 cos y + cos 3y) / 4, all harmonics below the Nyquist mode
        expect[j] = (3.0 * std::cos(10.0 * x) + std::cos(30.0 * x)) / 4.0;
    }
    EXPECT_LT(max_diff(ops.triple_product(u, u, u), expect), 1e-12);
}

TEST(Spectral, ModeCoordinatesAreOrthonormal) {
    const auto g = make_grid(64, 12.0);
    const SpectralOps ops(g);
    const FluctuationField a = random_field(g, 1);
    const CVec p = ops.project(a.first);
    const CVec m = ops.to_modes(p);
    ASSERT_EQ(m.size(), ops.mode_count());
    EXPECT_NEAR(norm_squared(m, 1.0), norm_squared(p, g->spacing()), 1e-10);
    EXPECT_LT(max_diff(ops.from_modes(m), p), 1e-12);
}

TEST(InnerProduct, HermitianAndPositive) {
    const auto g = make_grid(64, 10.0);
    const auto b = random_field(g, 2), c = random_field(g, 3);
    const cplx bb = inner_product(b, b);
    EXPECT_GE(bb.real(), 0.0);
    EXPECT_EQ(bb.imag(), 0.0);
    EXPECT_LT(std::abs(inner_product(b, c) - std::conj(inner_product(c, b))), 1e-12);
}

TEST(InnerProduct, OrthogonalFourierModes) {
    const auto g = make_grid(64, 10.0);
    FluctuationField a = FluctuationField::zeros(g), b = FluctuationField::zeros(g);
    for (std::size_t j = 0; j < 64; ++j) {
        a.first[j] = std::polar(1.0, 2.0 * std::numbers::pi * 3 * g->x(j) / 10.0);
        b.first[j] = std::polar(1.0, 2.0 * std::numbers::pi * 4 * g->x(j) / 10.0);
        b.second[j] = std::polar(1.0, -2.0 * std::numbers::pi * 4 * g->x(j) / 10.0);
    }
    EXPECT_LT(std::abs(inner_product(a, b)), 1e-12);
}

TEST(Fft, AlignedAndUnalignedPlansAgree) {
    const std::size_t n = 128;
    CVec a(n);
    for (std::size_t j = 0; j < n; ++j)
        a[j] = {std::sin(0.3 * j), std::cos(0.7 * j)};
    const CVec ref = fft::forward(a);
    std::vector<cplx> buf(n + 1);
    std::copy(a.begin(), a.end(), buf.begin() + 1);  // 16-byte offset
    std::vector<cplx> out(n + 1);
    fft::plan(n).forward(buf.data() + 1, out.data() + 1);
    EXPECT_LT(max_diff(ref, std::span<const cplx>(out.data() + 1, n)), 1e-12);
    EXPECT_LT(max_diff(fft::inverse(ref), a), 1e-12);
}
