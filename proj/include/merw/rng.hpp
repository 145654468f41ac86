#pragma once

#include "merw/arith.hpp"
#include "merw/error.hpp"

#include <array>
#include <bit>
#include <cstdint>

namespace merw {

// Generator identity (fixed so that seeded reports are reproducible across
// platforms): xoshiro256** by Blackman & Vigna, state initialized from the
// 64-bit seed through SplitMix64, one independent stream per worker obtained
// by applying jump() (a 2^128-step advance) stream-index times.

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

class Xoshiro256StarStar {
public:
    explicit Xoshiro256StarStar(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& w : state_) w = sm.next();
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1; // all-zero state is invalid
    }

    static Xoshiro256StarStar stream(std::uint64_t seed, std::uint64_t stream_index) {
        Xoshiro256StarStar g(seed);
        for (std::uint64_t k = 0; k < stream_index; ++k) g.jump();
        return g;
    }

    std::uint64_t next() {
        const std::uint64_t result = std::rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = std::rotl(state_[3], 45);
        return result;
    }

    /// Advances 2^128 steps; partitions the period into non-overlapping streams.
    void jump() {
        static constexpr std::array<std::uint64_t, 4> kJump = {0x180ec6d33cfd0abaull, 0xd5a61266f0c9392cull,
                                                               0xa9582618e03fc9aaull, 0x39abdc4529b1661cull};
        std::array<std::uint64_t, 4> acc = {0, 0, 0, 0};
        for (std::uint64_t word : kJump)
            for (int b = 0; b < 64; ++b) {
                if (word & (std::uint64_t{1} << b))
                    for (int i = 0; i < 4; ++i) acc[static_cast<size_t>(i)] ^= state_[static_cast<size_t>(i)];
                next();
            }
        state_ = acc;
    }

    /// Exact uniform draw in [0, bound): rejection sampling on the minimal
    /// number of bits, one fresh 64-bit word per bit chunk. No float bias.
    BigInt uniform_below(const BigInt& bound) {
        if (bound <= 0) throw PreconditionError("uniform_below: bound must be positive");
        if (bound == 1) return BigInt(0);
        const unsigned bits = boost::multiprecision::msb(bound - 1) + 1;
        const unsigned words = (bits + 63) / 64;
        const unsigned top_bits = bits - 64 * (words - 1);
        const std::uint64_t top_mask = top_bits >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << top_bits) - 1);
        for (;;) {
            BigInt x = 0;
            for (unsigned w = 0; w < words; ++w) {
                std::uint64_t word = next();
                if (w + 1 == words) word &= top_mask;
                x |= BigInt(word) << (64 * w);
            }
            if (x < bound) return x;
        }
    }

private:
    std::array<std::uint64_t, 4> state_;
};

} // namespace merw
