#include "ailboost/rng.hpp"

#include <limits>

#include "ailboost/table.hpp"

namespace ailboost {

std::uint64_t Rng::uniform_index(std::uint64_t n) {
    if (n == 0) {
        throw Error("uniform_index: empty range");
    }
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - (max % n + 1) % n;
    std::uint64_t x = engine_();
    while (x > limit) {
        x = engine_();
    }
    return x % n;
}

int Rng::categorical(std::span<const double> weights) {
    double sum = 0.0;
    for (double w : weights) {
        sum += w;
    }
    if (!(sum > 0.0)) {
        throw Error("categorical: weights must have positive mass");
    }
    const double u = uniform() * sum;
    double acc = 0.0;
    int last_positive = -1;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) {
            continue;
        }
        acc += weights[i];
        last_positive = static_cast<int>(i);
        if (u < acc) {
            return last_positive;
        }
    }
    // Rounding can leave u marginally above the accumulated sum.
    return last_positive;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over the combined key.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace ailboost
