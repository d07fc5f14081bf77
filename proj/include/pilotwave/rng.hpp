#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

namespace pilotwave {

/// Philox 4x32-10 counter-based generator (Salmon, Moraes, Dror, Shaw 2011).
/// Stateless block function: a 128-bit counter and 64-bit key map to 128
/// output bits. Used to derive independent, reproducible per-pair substreams
/// from (master_seed, pair_index) so ensemble results do not depend on
/// scheduling or worker count.
struct Philox4x32 {
    static constexpr std::uint32_t M0 = 0xD2511F53u;
    static constexpr std::uint32_t M1 = 0xCD9E8D57u;
    static constexpr std::uint32_t W0 = 0x9E3779B9u;
    static constexpr std::uint32_t W1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += W0;
                key[1] += W1;
            }
            const std::uint64_t p0 = std::uint64_t(M0) * ctr[0];
            const std::uint64_t p1 = std::uint64_t(M1) * ctr[2];
            const std::uint32_t hi0 = std::uint32_t(p0 >> 32);
            const std::uint32_t lo0 = std::uint32_t(p0);
            const std::uint32_t hi1 = std::uint32_t(p1 >> 32);
            const std::uint32_t lo1 = std::uint32_t(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }
};

/// One pair's private random stream. Counter layout: words 0-1 hold the pair
/// index, words 2-3 a block counter that advances as values are drawn, so any
/// number of draws never collides with another pair's stream.
class PairStream {
public:
    PairStream(std::uint64_t master_seed, std::uint64_t pair_index)
        : key_{std::uint32_t(master_seed), std::uint32_t(master_seed >> 32)},
          pair_lo_(std::uint32_t(pair_index)), pair_hi_(std::uint32_t(pair_index >> 32)) {}

    std::uint64_t next_u64() {
        if (avail_ == 0) refill();
        const std::uint32_t lo = buf_[4 - avail_];
        const std::uint32_t hi = buf_[5 - avail_];
        avail_ -= 2;
        return (std::uint64_t(hi) << 32) | lo;
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double next_u01() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1]; safe as a log() argument.
    double next_u01_open() { return double((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Box-Muller pair of independent standard normals. Always consumes
    /// exactly two uniforms, keeping the draw count deterministic.
    std::pair<double, double> next_normal_pair() {
        const double u1 = next_u01_open();
        const double u2 = next_u01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        return {r * std::cos(theta), r * std::sin(theta)};
    }

private:
    void refill() {
        buf_ = Philox4x32::block({pair_lo_, pair_hi_, std::uint32_t(draw_), std::uint32_t(draw_ >> 32)},
                                 key_);
        ++draw_;
        avail_ = 4;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint32_t pair_lo_, pair_hi_;
    std::uint64_t draw_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int avail_ = 0;
};

} // namespace pilotwave
