#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "dopo/stationary.hpp"

using namespace dopo;

namespace {

ReducedParams fig1() {
    ReducedParams p;
    p.sigma = 1;
    p.delta1 = 1.0;
    p.mu = 1.2;
    return p;
}

double max_diff(const RVec& a, const RVec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST(BetaSquared, ReferenceValues) {
    EXPECT_NEAR(beta_squared(fig1()), 1.0 + std::sqrt(0.44), 1e-15);
    EXPECT_NEAR(beta_squared(fig1()), 1.663325, 1e-6);
    ReducedParams p = fig1();
    p.mu = 1.0;
    EXPECT_EQ(beta_squared(p), 1.0);
    p.sigma = -1;
    p.delta1 = -1.0;
    EXPECT_EQ(beta_squared(p), 1.0);
    p.mu = 0.5;
    EXPECT_THROW(beta_squared(p), BelowThresholdError);
}

TEST(PumpPhase, ReferenceValuesAndModulus) {
    ReducedParams p = fig1();
    EXPECT_NEAR(pump_phase(p), 0.5 * std::atan(std::sqrt(0.44)), 1e-15);
    EXPECT_NEAR(pump_phase(p), 0.292843, 1e-6);
    for (double mu : {1.0, 1.05, 1.2, 2.0, 7.0}) {
        p.mu = mu;
        EXPECT_NEAR(std::abs(std::polar(mu, 2.0 * p.sigma * pump_phase(p))), mu, 1e-12);
        EXPECT_NEAR(std::abs(cplx(1.0, p.sigma * std::sqrt(mu * mu - 1.0))), mu, 1e-12);
    }
    p.mu = 1.0;
    EXPECT_EQ(pump_phase(p), 0.0);
}

TEST(BrightSoliton, PeakTailAndResidual) {
    const auto g = make_grid();
    const DsSolution ds = bright_soliton(fig1(), g);
    EXPECT_NEAR(std::sqrt(ds.beta_sq), 1.289700, 1e-6);
    EXPECT_NEAR(ds.profile.values[128], 1.823911, 1e-6);
    EXPECT_LT(ds.profile.values[0], 1e-10);
    EXPECT_LT(analytic_soliton_residual(fig1(), *g), 1e-10);
    EXPECT_EQ(ds.kind, DsKind::localized);
}

TEST(BrightSoliton, RequiresFocusingSign) {
    ReducedParams p = fig1();
    p.sigma = -1;
    EXPECT_THROW(bright_soliton(p, make_grid()), ConfigError);
}

TEST(Homogeneous, BranchesAndResidual) {
    const auto g = make_grid(64, 40.0);
    const DsSolution h = homogeneous_solution(fig1(), g);
    EXPECT_EQ(h.kind, DsKind::homogeneous);
    for (double v : h.profile.values)
        EXPECT_NEAR(v, 1.289700, 1e-6);
    EXPECT_LT(h.residual, 1e-12);
    const DsSolution z = homogeneous_solution(fig1(), g, false);
    EXPECT_TRUE(z.trivial());
    EXPECT_EQ(z.residual, 0.0);
    ReducedParams p = fig1();
    p.delta1 = -2.0;  // beta^2 < 0
    EXPECT_TRUE(homogeneous_solution(p, g).trivial());
}

TEST(TrivialSolution, ExistsBelowThreshold) {
    ReducedParams p = fig1();
    p.mu = 0.9;
    const DsSolution t = trivial_solution(p, make_grid(32, 10.0));
    EXPECT_TRUE(t.trivial());
    EXPECT_EQ(t.theta, 0.0);
}

TEST(Newton, RecoversSolitonFromScaledGuess) {
    const auto g = make_grid();
    const DsSolution exact = bright_soliton(fig1(), g);
    RealField guess = exact.profile;
    for (auto& v : guess.values)
        v *= 0.9;
    const DsSolution ds = newton_stationary(fig1(), g, guess);
    EXPECT_LE(ds.iterations, 10);
    EXPECT_LT(max_diff(ds.profile.values, exact.profile.values), 1e-9);
    EXPECT_LT(ds.residual, 1e-10);
    EXPECT_EQ(ds.kind, DsKind::localized);
}

TEST(Newton, ZeroGuessStaysTrivial) {
    const auto g = make_grid(64, 40.0);
    const DsSolution ds = newton_stationary(fig1(), g, RealField::zeros(g));
    EXPECT_TRUE(ds.trivial());
    EXPECT_EQ(ds.iterations, 0);
}

TEST(Newton, RecentersOffsetGuess) {
    const auto g = make_grid();
    RealField guess = bright_soliton(fig1(), g).profile;
    SpectralOps ops(g);
    guess.values = ops.shift(guess.values, 2.0);
    const DsSolution ds = newton_stationary(fig1(), g, guess);
    RVec I(ds.profile.values.size());
    for (std::size_t j = 0; j < I.size(); ++j)
        I[j] = ds.profile.values[j] * ds.profile.values[j];
    EXPECT_NEAR(intensity_centroid(*g, I), 0.0, 1e-9);
}

TEST(Newton, PeriodicPatternKeepsItsPeriod) {
    // sigma = -1: -F'' - beta^2 F + F^3 = 0 oscillates about F = 0 with beta^2 = 1.
    ReducedParams p;
    p.sigma = -1;
    p.delta1 = -1.0;
    p.mu = 1.0;
    const auto g = make_grid(128, 40.0);
    const double k0 = 2.0 * std::numbers::pi * 6.0 / g->length();
    RealField guess = RealField::zeros(g);
    for (std::size_t j = 0; j < 128; ++j)
        guess.values[j] = 0.4 * std::cos(k0 * g->x(j));
    const DsSolution ds = newton_stationary(p, g, guess);
    EXPECT_EQ(ds.kind, DsKind::periodic);
    EXPECT_LT(ds.residual, 1e-10);
    const CVec s = SpectralOps(g).spectrum(SpectralOps::to_complex(ds.profile.values));
    std::size_t peak = 1;
    for (std::size_t j = 1; j < 64; ++j)
        if (std::abs(s[j]) > std::abs(s[peak]))
            peak = j;
    EXPECT_EQ(peak, 6u);
}

TEST(Newton, FailureReportsResidual) {
    const auto g = make_grid();
    RealField guess = bright_soliton(fig1(), g).profile;
    for (auto& v : guess.values)
        v *= 0.5;
    NewtonOptions o;
    o.max_iter = 1;
    try {
        newton_stationary(fig1(), g, guess, o);
        FAIL() << "expected SolverError";
    } catch (const SolverError& e) {
        EXPECT_GT(e.last_residual(), 0.0);
    }
}

TEST(Continuation, FollowsBranchInMu) {
    const auto g = make_grid(256, 40.0);
    const DsSolution start = refined_bright_soliton(fig1(), g);
    const auto branch = continue_in_mu(start, 1.4, 0.1);
    ASSERT_EQ(branch.size(), 3u);
    ReducedParams p = fig1();
    p.mu = 1.4;
    const DsSolution exact = bright_soliton(p, g);
    EXPECT_LT(max_diff(branch.back().profile.values, exact.profile.values), 1e-8);
}

TEST(DsCsv, RoundTrip) {
    const auto g = make_grid(64, 30.0);
    ReducedParams p = fig1();
    p.kappa = 500.0;
    const DsSolution ds = bright_soliton(p, g);
    std::stringstream ss;
    write_ds_csv(ss, ds);
    const DsSolution back = read_ds_csv(ss);
    EXPECT_EQ(back.grid()->n_points(), 64u);
    EXPECT_EQ(back.grid()->length(), 30.0);
    EXPECT_EQ(back.params.mu, 1.2);
    EXPECT_EQ(back.params.kappa, 500.0);
    EXPECT_EQ(back.kind, DsKind::localized);
    EXPECT_EQ(back.profile.values, ds.profile.values);
}
