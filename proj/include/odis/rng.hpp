#pragma once

#include <cstdint>

namespace odis {

// Seedable, splittable randomness for scenario generation.
//
// Stream-splitting rule: every coefficient stream is an independent
// xoshiro256++ generator whose state is seeded with splitmix64 from
// (master_seed XOR fnv1a64(node_id, stream_kind)). Draws within a stream
// are consumed in a fixed documented order, so generated scenarios are
// bit-identical across platforms and across horizons (a T=200 stream is a
// prefix of the T=2000 stream for the same seed).

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// fnv-1a over the little-endian bytes of two 64-bit tags.
inline std::uint64_t stream_tag(std::uint64_t node, std::uint64_t kind) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int k = 0; k < 8; ++k) {
            h = (h ^ ((v >> (8 * k)) & 0xFF)) * 0x100000001b3ULL;
        }
    };
    mix(node);
    mix(kind);
    return h;
}

/// xoshiro256++ with splitmix64 state expansion.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64_next(sm);
    }

    /// Stream generator for (master seed, node, kind).
    static Rng stream(std::uint64_t seed, std::uint64_t node, std::uint64_t kind) {
        return Rng(seed ^ stream_tag(node, kind));
    }

    std::uint64_t next_u64() {
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

    /// Uniform double in [0,1) with 53 random bits; exact across platforms.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

}  // namespace odis
