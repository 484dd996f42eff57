#pragma once

// Deterministic, portable PRNG plumbing: splitmix64 (seeding / hashing) and
// xoshiro256++ (main stream).  Every stochastic component of the pipeline
// derives its own stream with derive_seed(), so results are independent of
// scheduling and worker count.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace lagpath::rng {

// splitmix64 state transition (Steele, Lea, Flood 2014).
inline constexpr std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Stateless finalizer used for hash chaining.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    std::uint64_t s = z;
    return splitmix64_next(s);
}

// FNV-1a, for folding tag strings (target names, stream labels) into seeds.
inline constexpr std::uint64_t hash_str(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Hash-chains (seed, w0, w1, ...) into one 64-bit stream seed.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                           std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = seed;
    for (std::uint64_t w : words) h = mix64(h ^ mix64(w));
    return h;
}

inline constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

// xoshiro256++ (Blackman & Vigna 2019); state seeded through splitmix64.
class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        for (auto& word : s_) word = splitmix64_next(seed);
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

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

    // Uniform integer in [0, bound) via 128-bit multiply-shift.
    std::uint64_t below(std::uint64_t bound) {
        using u128 = unsigned __int128;
        return static_cast<std::uint64_t>((static_cast<u128>(next()) * bound) >> 64);
    }

private:
    std::array<std::uint64_t, 4> s_{};
};

}  // namespace lagpath::rng
