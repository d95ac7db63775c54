#pragma once

// Splittable pseudo-random number generation for reproducible parallel
// Monte Carlo.  Every simulated path owns a private generator whose seed is
// derived from (experiment seed, path index) alone, so partitioning paths
// across worker threads cannot change any draw.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace cogarch {

// Finalization mix of the splitmix64 generator (Steele, Lea, Flood 2014).
// Bijective on 64-bit words; used both as the generator's output stage and
// as the stream-derivation hash.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Derive the seed of an independent stream from a master seed and a stream
// index.  Two distinct (seed, index) pairs give unrelated streams for all
// practical purposes; identical pairs give identical streams by construction.
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) noexcept {
    // Advance the splitmix counter `index + 1` golden-gamma steps, then
    // finalize.  The +1 keeps stream 0 distinct from the raw master seed.
    return mix64(seed + 0x9E3779B97F4A7C15ULL * (index + 1));
}

class SplitMix64 {
  public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    // Uniform on [0, 1): 53 random bits scaled by 2^-53.
    double uniform01() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0, 1]; safe argument for std::log.
    double uniform_pos() noexcept {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller.  One value per call; the sine branch
    // is discarded so each call consumes exactly two words of the stream.
    double normal() noexcept {
        const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
        const double a = 2.0 * std::numbers::pi * uniform01();
        return r * std::cos(a);
    }

    // Exponential waiting time with the given rate.
    double exponential(double rate) noexcept {
        return -std::log(uniform_pos()) / rate;
    }

  private:
    std::uint64_t state_;
};

} // namespace cogarch
