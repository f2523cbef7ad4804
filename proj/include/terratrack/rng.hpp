#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string_view>

#include "terratrack/types.hpp"

// Counter-based random streams (Philox 4x32-10, Salmon et al., SC 2011).
// Every draw is a pure function of (stream key, context, index, draw number),
// so disjoint particle ranges can be processed on any number of threads in
// any order and still produce bit-identical results.

namespace terratrack::rng {

namespace detail {

inline constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mul_hi_lo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
    uint64_t p = static_cast<uint64_t>(a) * b;
    hi = static_cast<uint32_t>(p >> 32);
    lo = static_cast<uint32_t>(p);
}

}  // namespace detail

/// One 10-round Philox 4x32 block.
inline std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 2> key,
                                          std::array<uint32_t, 4> ctr) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += detail::kPhiloxW0;
            key[1] += detail::kPhiloxW1;
        }
        uint32_t hi0, lo0, hi1, lo1;
        detail::mul_hi_lo(detail::kPhiloxM0, ctr[0], hi0, lo0);
        detail::mul_hi_lo(detail::kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Derives the key of a named stream from the global seed. Used to fan one
/// user-facing seed out to independent streams (scenario, reports, filter,
/// gmm, ...) so that changing one consumer's settings cannot perturb another.
inline uint64_t derive_stream(uint64_t seed, std::string_view label) {
    uint64_t h = 0xCBF29CE484222325ull;  // FNV-1a, then splitmix finalizer
    for (int i = 0; i < 8; ++i) {
        h ^= (seed >> (8 * i)) & 0xFF;
        h *= 0x100000001B3ull;
    }
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return splitmix64(h);
}

/// Derives a child stream key from a parent key and an integer salt.
inline uint64_t derive_substream(uint64_t key, uint64_t salt) {
    return splitmix64(key + 0x9E3779B97F4A7C15ull * (salt + 1));
}

/// A deterministic random substream addressed by (key, context, index).
/// The context is typically a time step and the index a particle index;
/// the draw counter advances within the substream.
class Substream {
public:
    Substream(uint64_t stream_key, uint32_t context, uint64_t index)
        : key_{static_cast<uint32_t>(stream_key),
               static_cast<uint32_t>(stream_key >> 32)},
          context_(context),
          index_(index) {}

    uint64_t next_u64() {
        if (word_ >= 4) refill();
        uint64_t lo = buf_[word_];
        uint64_t hi = buf_[word_ + 1];
        word_ += 2;
        return lo | (hi << 32);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). Rejection keeps the draw exactly uniform.
    uint64_t uniform_below(uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_below: empty range");
        uint64_t rem = (std::numeric_limits<uint64_t>::max() % n + 1) % n;
        uint64_t bound = std::numeric_limits<uint64_t>::max() - rem;
        uint64_t v;
        do {
            v = next_u64();
        } while (v > bound);
        return v % n;
    }

    /// Standard normal via Box-Muller; the sine partner is cached so a pair
    /// of draws costs one uniform pair.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = kTwoPi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

private:
    void refill() {
        buf_ = philox4x32(key_, {draw_++, context_,
                                 static_cast<uint32_t>(index_),
                                 static_cast<uint32_t>(index_ >> 32)});
        word_ = 0;
    }

    std::array<uint32_t, 2> key_;
    uint32_t context_ = 0;
    uint64_t index_ = 0;
    uint32_t draw_ = 0;
    std::array<uint32_t, 4> buf_{};
    int word_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace terratrack::rng
