#include <gtest/gtest.h>

#include <cmath>

#include "dopo/model.hpp"

using namespace dopo;

namespace {

ModelParams example_cavity() {
    ModelParams m;
    m.gamma0 = 1.0;
    m.gamma1 = 1.0;
    m.g = 1.0;
    m.delta0 = 2.0;
    m.delta1 = 0.0;
    m.pump_amplitude = 2.0;
    return m;
}

RegimeOptions permissive() {
    RegimeOptions o;
    o.threshold = 1.0;
    return o;
}

} // namespace

TEST(ReduceParameters, KappaAndMuFromDefinitions) {
    const ReducedParams r = reduce_parameters(example_cavity(), permissive());
    EXPECT_DOUBLE_EQ(r.kappa, 2.0);
    EXPECT_DOUBLE_EQ(r.mu, 1.0);
    EXPECT_EQ(r.sigma, +1);
}

TEST(ReduceParameters, ZeroPumpGivesZeroMu) {
    ModelParams m = example_cavity();
    m.pump_amplitude = 0.0;
    EXPECT_EQ(reduce_parameters(m, permissive()).mu, 0.0);
}

TEST(ReduceParameters, MuLinearInPumpKappaUnchanged) {
    ModelParams m = example_cavity();
    const ReducedParams a = reduce_parameters(m, permissive());
    m.pump_amplitude *= 2.0;
    const ReducedParams b = reduce_parameters(m, permissive());
    EXPECT_DOUBLE_EQ(b.mu, 2.0 * a.mu);
    EXPECT_DOUBLE_EQ(b.kappa, a.kappa);
}

TEST(ReduceParameters, SignOfPumpDetuningSetsSigma) {
    ModelParams m = example_cavity();
    m.delta0 = -2.0;
    EXPECT_EQ(reduce_parameters(m, permissive()).sigma, -1);
}

TEST(ReduceParameters, SmallPumpDetuningViolatesRegime) {
    EXPECT_THROW(reduce_parameters(example_cavity()), RegimeError);
    ModelParams m = example_cavity();
    m.delta0 = 0.0;
    EXPECT_THROW(reduce_parameters(m, permissive()), RegimeError);
}

TEST(ReduceParameters, LargePumpDetuningAccepted) {
    ModelParams m = example_cavity();
    m.delta0 = 50.0;
    m.delta1 = 1.0;
    EXPECT_NO_THROW(reduce_parameters(m));
}

TEST(ReduceParameters, RejectsNonPositiveRates) {
    ModelParams m = example_cavity();
    m.gamma1 = 0.0;
    EXPECT_THROW(reduce_parameters(m, permissive()), ConfigError);
}

TEST(ReducedParams, ValidateRejectsBadValues) {
    ReducedParams p;
    p.sigma = 0;
    EXPECT_THROW(validate(p), ConfigError);
    p.sigma = 1;
    p.kappa = -1.0;
    EXPECT_THROW(validate(p), ConfigError);
    p.kappa = 10.0;
    EXPECT_NO_THROW(validate(p));
    EXPECT_DOUBLE_EQ(p.noise_scale(), 0.1);
}

TEST(Units, RoundTrip) {
    const Units u(2.0, 0.5);
    EXPECT_DOUBLE_EQ(u.physical_omega(u.omega(3.0)), 3.0);
    EXPECT_DOUBLE_EQ(u.physical_length(u.length(7.0)), 7.0);
    EXPECT_DOUBLE_EQ(u.time(1.5), 3.0);
}
