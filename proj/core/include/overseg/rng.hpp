#pragma once

#include <cstdint>

namespace overseg {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// splitmix64 output function applied to a single state value
/// (increment by the golden gamma, then the two multiply-xorshift rounds).
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += kGoldenGamma;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Per-index seed for parallel-deterministic streams.
constexpr std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t index) noexcept {
    return splitmix64(global_seed ^ (index * kGoldenGamma));
}

/// xoshiro256** seeded from a splitmix64 sequence. Every draw helper below is
/// defined in terms of integer operations so streams are identical across
/// platforms; only `normal()` depends on libm.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept { return next(); }
    std::uint64_t next() noexcept;

    /// 53-bit uniform in [0,1).
    double uniform01() noexcept;
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }
    /// Unbiased uniform integer in [lo, hi] (rejection sampling).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept;
    bool bernoulli(double p) noexcept { return uniform01() < p; }
    /// Standard normal via Box-Muller; the second variate of each pair is cached.
    double normal() noexcept;

private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace overseg
