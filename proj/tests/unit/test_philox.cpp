#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dopo/philox.hpp"

using dopo::NormalStream;
using dopo::Philox4x32;

TEST(Philox, KnownAnswerZero) {
    const auto r = Philox4x32::block({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(r, (Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerAllOnes) {
    const std::uint32_t f = 0xffffffffu;
    const auto r = Philox4x32::block({f, f, f, f}, {f, f});
    EXPECT_EQ(r, (Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPiDigits) {
    const auto r = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(r, (Philox4x32::Counter{0xd16cfe09u, 0x94fdcceb, 0x5001e420u, 0x24126ea1u}));
}

TEST(NormalStream, SameAddressSameNumbers) {
    NormalStream a(42), b(42);
    std::vector<double> x(33), y(33);
    a.fill(7, 123, 1, x);
    b.fill(7, 123, 1, y);
    EXPECT_EQ(x, y);
}

TEST(NormalStream, AddressesAreIndependent) {
    NormalStream s(42);
    std::vector<double> base(16), other(16);
    s.fill(0, 0, 0, base);
    for (auto [t, st, k] : {std::tuple{1u, 0ull, 0u}, {0u, 1ull, 0u}, {0u, 0ull, 1u}, {0u, 1ull << 32, 0u}}) {
        s.fill(t, st, k, other);
        EXPECT_NE(base, other);
    }
    NormalStream s2(43);
    s2.fill(0, 0, 0, other);
    EXPECT_NE(base, other);
}

TEST(NormalStream, MomentsAreStandardNormal) {
    NormalStream s(2024);
    std::vector<double> x(1 << 18);
    s.fill(0, 0, 0, x);
    double m = 0, v = 0, k = 0;
    for (double e : x)
        m += e;
    m /= x.size();
    for (double e : x) {
        v += (e - m) * (e - m);
        k += std::pow(e - m, 4);
    }
    v /= x.size();
    k /= x.size() * v * v;
    EXPECT_NEAR(m, 0.0, 5.0 / std::sqrt(x.size()));
    EXPECT_NEAR(v, 1.0, 0.01);
    EXPECT_NEAR(k, 3.0, 0.05);
}

TEST(NormalStream, UniformEndpoints) {
    EXPECT_EQ(NormalStream::uniform(0, 0), 0.0);
    EXPECT_LT(NormalStream::uniform(0xffffffffu, 0xffffffffu), 1.0);
    EXPECT_GT(NormalStream::open_uniform(0, 0), 0.0);
    EXPECT_EQ(NormalStream::open_uniform(0xffffffffu, 0xffffffffu), 1.0);
}
