#pragma once

// Deterministic random number generation for the simulator.
//
// The generator and its seeding are pinned so that a (seed, replication)
// pair produces bit-identical streams on every platform:
//   - stream state is xoshiro256++ (Blackman/Vigna),
//   - state is filled from SplitMix64 seeded with
//     seed XOR (replication + 1) * 0x9E3779B97F4A7C15,
//   - uniforms take the top 53 bits ([0,1)),
//   - exponential variates are the inverse transform -log1p(-u)/rate.
// std::exponential_distribution is implementation-defined and is not used.

#include <cmath>
#include <cstdint>
#include <limits>

namespace tandemq {

struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    return seed ^ ((index + 1) * 0x9E3779B97F4A7C15ULL);
}

class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& word : s_) word = sm.next();
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x9E3779B97F4A7C15ULL;
    }

    static Xoshiro256pp for_substream(std::uint64_t seed, std::uint64_t index) {
        return Xoshiro256pp(substream_seed(seed, index));
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Exponential with the given rate; rate <= 0 yields +infinity
    // (an event that never happens).
    double exponential(double rate) {
        if (rate <= 0.0) return std::numeric_limits<double>::infinity();
        return -std::log1p(-uniform01()) / rate;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
};

} // namespace tandemq
