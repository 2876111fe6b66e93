#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "dopo/snapshot.hpp"
#include "fixtures.hpp"

using namespace dopo;

namespace {

SimConfig quiet_config(const GridPtr& g) {
    SimConfig c;
    c.params = fixtures::fig1();
    c.grid = g;
    c.dt = 0.01;
    c.noise = false;
    return c;
}

double max_diff(const CVec& a, const CVec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST(SquareRootBranch, PrincipalBranch) {
    EXPECT_NEAR(std::abs(square_root_branch(cplx(1.2, 0.0)) - std::sqrt(1.2)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(square_root_branch(cplx(-1.0, 0.0)) - cplx(0.0, 1.0)), 0.0, 1e-15);
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 1000; ++i) {
        const cplx z(u(rng), u(rng));
        const cplx r = square_root_branch(z);
        EXPECT_LT(std::abs(r * r - z), 1e-14 * std::max(1.0, std::abs(z)));
        EXPECT_GE(r.real(), 0.0);
    }
}

TEST(SimConfig, TimeStepBoundEnforced) {
    SimConfig c = quiet_config(make_grid());
    c.dt = 0.07;  // above 0.1 / beta^2 = 0.060
    EXPECT_THROW(c.validate(), ConfigError);
    c.dt = 0.05;
    EXPECT_NO_THROW(c.validate());
}

TEST(Integrator, SolitonIsNoiselessFixedPoint) {
    const auto g = make_grid();
    const DsSolution ds = refined_bright_soliton(fixtures::fig1(), g);
    const Integrator integ(quiet_config(g));
    auto ws = integ.make_workspace();
    TrajectoryState s = integ.initial_state(ds, 0);
    const CVec f0 = s.f().values;
    ASSERT_TRUE(integ.advance(s, 10000, ws));
    EXPECT_NEAR(s.t, 100.0, 1e-9);
    EXPECT_LT(max_diff(s.f().values, f0), 1e-6);
    const CVec f = s.f().values, fp = s.f_plus().values;
    double asym = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j)
        asym = std::max(asym, std::abs(fp[j] - std::conj(f[j])));
    EXPECT_LT(asym, 1e-10);
}

TEST(Integrator, HomogeneousStateStaysConstant) {
    const auto g = make_grid(64, 40.0);
    const DsSolution h = homogeneous_solution(fixtures::fig1(), g);
    const Integrator integ(quiet_config(g));
    auto ws = integ.make_workspace();
    TrajectoryState s = integ.initial_state(h, 0);
    const CVec f0 = s.f().values;
    ASSERT_TRUE(integ.advance(s, 2000, ws));
    EXPECT_LT(max_diff(s.f().values, f0), 1e-8);
}

TEST(Integrator, LinearDecayOfTrivialBackgroundPerturbation) {
    // Without nonlinearity (F = 0, tiny field) a k = 0 perturbation along (1, 1) grows at mu - 1.
    ReducedParams p = fixtures::fig1();
    p.mu = 0.5;
    p.delta1 = 0.0;
    const auto g = make_grid(32, 10.0);
    SimConfig c = quiet_config(g);
    c.params = p;
    const Integrator integ(c);
    auto ws = integ.make_workspace();
    TrajectoryState s = integ.initial_state(trivial_solution(p, g), 0);
    s.s1[0] = s.s2[0] = 1e-6 * 32;
    ASSERT_TRUE(integ.advance(s, 100, ws));
    EXPECT_NEAR(s.s1[0].real() / (1e-6 * 32), std::exp(-0.5 * 1.0), 1e-6);
}

TEST(Integrator, DivergenceFlagsTrajectory) {
    const auto g = make_grid(64, 40.0);
    SimConfig c = quiet_config(g);
    c.divergence_factor = 0.5;  // the soliton peak sqrt(2) beta already exceeds 0.5 beta
    const Integrator integ(c);
    auto ws = integ.make_workspace();
    TrajectoryState s = integ.initial_state(bright_soliton(fixtures::fig1(), g), 0);
    EXPECT_FALSE(integ.step(s, ws));
    EXPECT_TRUE(s.diverged);
}

TEST(TrackPosition, CentredShiftedAndWrapped) {
    const auto g = make_grid();
    const DsSolution ds = refined_bright_soliton(fixtures::fig1(), g);
    const SpectralOps ops(g);
    auto at = [&](double shift, double previous) {
        const CVec f = ops.shift(ds.field(), shift);
        CVec fc(f.size());
        for (std::size_t j = 0; j < f.size(); ++j)
            fc[j] = std::conj(f[j]);
        return track_position(*g, f, fc, previous);
    };
    EXPECT_NEAR(at(0.0, 0.0), 0.0, 1e-10);
    EXPECT_NEAR(at(5 * g->spacing(), 0.0), 5 * g->spacing(), 1e-8);
    EXPECT_NEAR(at(19.5, 19.0), 19.5, 1e-8);
    EXPECT_NEAR(at(20.5, 19.5), 20.5, 1e-8);   // crosses the boundary, stays unwrapped
    EXPECT_NEAR(at(-20.5, -19.5), -20.5, 1e-8);
}

TEST(TrackPosition, FailsWithoutStructure) {
    const auto g = make_grid(64, 40.0);
    const CVec z(64, cplx{});
    EXPECT_THROW(track_position(*g, z, z, 0.0), TrackingError);
}

TEST(Noise, TrajectoriesReproducibleAndDistinct) {
    const auto g = make_grid(128, 40.0);
    SimConfig c = quiet_config(g);
    c.noise = true;
    c.params.kappa = 100.0;
    c.dt = 0.025;
    c.seed = 77;
    const DsSolution ds = refined_bright_soliton(c.params, g);
    const Integrator integ(c);
    auto ws = integ.make_workspace();
    TrajectoryState a = integ.initial_state(ds, 3), b = integ.initial_state(ds, 3), d = integ.initial_state(ds, 4);
    integ.advance(a, 200, ws);
    integ.advance(b, 200, ws);
    integ.advance(d, 200, ws);
    EXPECT_EQ(a.s1, b.s1);
    EXPECT_EQ(a.s2, b.s2);
    EXPECT_NE(a.s1, d.s1);
    // positive-P: f+ departs from conj(f) once noise acts
    const CVec f = a.f().values, fp = a.f_plus().values;
    double asym = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j)
        asym = std::max(asym, std::abs(fp[j] - std::conj(f[j])));
    EXPECT_GT(asym, 1e-6);
}

TEST(Snapshot, RestartIsBitIdentical) {
    const auto g = make_grid(128, 40.0);
    SimConfig c = quiet_config(g);
    c.noise = true;
    c.params.kappa = 200.0;
    c.dt = 0.025;
    c.seed = 5;
    const DsSolution ds = refined_bright_soliton(c.params, g);
    const Integrator integ(c);
    auto ws = integ.make_workspace();
    TrajectoryState straight = integ.initial_state(ds, 2);
    integ.advance(straight, 300, ws);

    TrajectoryState first = integ.initial_state(ds, 2);
    integ.advance(first, 120, ws);
    const auto path = std::filesystem::temp_directory_path() / "dopo_restart_test.snap";
    write_snapshot(path.string(), first, c);
    TrajectoryState resumed = read_snapshot(path.string(), c);
    EXPECT_EQ(resumed.step, 120u);
    EXPECT_EQ(resumed.t, first.t);
    integ.advance(resumed, 180, ws);
    EXPECT_EQ(resumed.s1, straight.s1);
    EXPECT_EQ(resumed.s2, straight.s2);
    EXPECT_EQ(resumed.t, straight.t);

    SimConfig other = c;
    other.seed = 6;
    EXPECT_THROW(read_snapshot(path.string(), other), ConfigError);
    SimConfig finer = c;
    finer.grid = make_grid(256, 40.0);
    EXPECT_THROW(read_snapshot(path.string(), finer), GridMismatchError);
    std::filesystem::remove(path);
}
