#pragma once

#include <cstdint>
#include <vector>

namespace pfeddst {

/// splitmix64 step; used to derive well-separated seeds from a master seed.
std::uint64_t mix64(std::uint64_t x);

/// Derive a stream seed from (master, purpose tag, indices). Every RNG in the
/// project is seeded through this so that streams never depend on how much
/// randomness another component consumed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                          std::uint64_t a = 0, std::uint64_t b = 0,
                          std::uint64_t c = 0);

// Stream purpose tags.
inline constexpr std::uint64_t kSeedData = 1;
inline constexpr std::uint64_t kSeedPartition = 2;
inline constexpr std::uint64_t kSeedInit = 3;
inline constexpr std::uint64_t kSeedTrain = 4;
inline constexpr std::uint64_t kSeedSampling = 5;
inline constexpr std::uint64_t kSeedSelect = 6;
inline constexpr std::uint64_t kSeedEval = 7;
inline constexpr std::uint64_t kSeedGraph = 8;

/// Deterministic PRNG (xoshiro-free: plain splitmix64 sequence) with the few
/// distributions the project needs. Hand-rolled so that results are stable
/// across standard libraries, not just across runs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();

    /// Uniform in [0, 1).
    double uniform01();

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);

    /// Standard normal via Box-Muller (no state carried between calls).
    double normal();

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t bounded(std::uint64_t n);

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// k distinct values sampled uniformly from [0, n) without replacement.
    std::vector<int> sample_without_replacement(int n, int k);

private:
    std::uint64_t state_;
};

} // namespace pfeddst
