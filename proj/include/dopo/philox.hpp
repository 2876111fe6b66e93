#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Every random
// number is a pure function of (key, counter), so trajectories can be generated
// in any order or on any worker and still reproduce bit-for-bit.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace dopo {

class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key) {
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                key[0] += W0;
                key[1] += W1;
            }
            ctr = round(ctr, key);
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t M0 = 0xD2511F53u;
    static constexpr std::uint32_t M1 = 0xCD9E8D57u;
    static constexpr std::uint32_t W0 = 0x9E3779B9u;
    static constexpr std::uint32_t W1 = 0xBB67AE85u;

    static Counter round(const Counter& c, const Key& k) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

/// Standard normal variates addressed by (trajectory, step, stream, index).
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    /// Fill out with normals for one (trajectory, step, stream) triple.
    void fill(std::uint32_t trajectory, std::uint64_t step, std::uint32_t stream, std::span<double> out) const {
        const auto step_lo = static_cast<std::uint32_t>(step);
        const auto step_hi = static_cast<std::uint32_t>(step >> 32);
        const std::uint32_t c2 = (stream << 16) ^ step_hi;
        std::size_t i = 0;
        for (std::uint32_t blk = 0; i < out.size(); ++blk) {
            const auto r = Philox4x32::block({blk, step_lo, c2, trajectory}, key_);
            const double u1 = open_uniform(r[0], r[1]);
            const double u2 = uniform(r[2], r[3]);
            const double rad = std::sqrt(-2.0 * std::log(u1));
            const double ang = 2.0 * std::numbers::pi * u2;
            out[i++] = rad * std::cos(ang);
            if (i < out.size())
                out[i++] = rad * std::sin(ang);
        }
    }

    /// 53-bit uniform on [0, 1).
    static double uniform(std::uint32_t a, std::uint32_t b) {
        const std::uint64_t x = (static_cast<std::uint64_t>(a) << 32 | b) >> 11;
        return static_cast<double>(x) * 0x1.0p-53;
    }
    /// 53-bit uniform on (0, 1].
    static double open_uniform(std::uint32_t a, std::uint32_t b) {
        const std::uint64_t x = (static_cast<std::uint64_t>(a) << 32 | b) >> 11;
        return static_cast<double>(x + 1) * 0x1.0p-53;
    }

private:
    Philox4x32::Key key_;
};

} // namespace dopo
