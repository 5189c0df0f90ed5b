#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace ailboost {

/// Seedable, platform-stable generator. mt19937_64 has a standardized output
/// sequence; the derived draws below avoid std distributions, whose algorithms
/// are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). Unbiased (rejection on the top slice).
    std::uint64_t uniform_index(std::uint64_t n);

    /// Index i drawn with probability weights[i] / sum(weights).
    int categorical(std::span<const double> weights);

private:
    std::mt19937_64 engine_;
};

/// Mixes a base seed with a stream tag so independent consumers of one
/// user-facing seed never share a sequence.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace ailboost
