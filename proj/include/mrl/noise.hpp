#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mrl/errors.hpp"
#include "mrl/rng.hpp"

namespace mrl {

// Unit-variance noise families. All have mean 0, variance 1, and finite
// moments of every order.
enum class NoiseDist { Rademacher, StandardGaussian, CenteredUniform };

inline const char* noise_dist_name(NoiseDist d) {
    switch (d) {
        case NoiseDist::Rademacher: return "rademacher";
        case NoiseDist::StandardGaussian: return "gaussian";
        case NoiseDist::CenteredUniform: return "uniform";
    }
    return "?";
}

inline NoiseDist noise_dist_from_name(const std::string& s) {
    if (s == "rademacher") return NoiseDist::Rademacher;
    if (s == "gaussian") return NoiseDist::StandardGaussian;
    if (s == "uniform") return NoiseDist::CenteredUniform;
    throw ArgumentError("unknown noise distribution '" + s + "'");
}

// Realized i.i.d. array Z_k, k in {1..n}^d, flattened row-major with axis 0
// slowest. Immutable after generation.
struct NoiseField {
    std::size_t n = 0;
    std::size_t d = 0;
    NoiseDist dist = NoiseDist::Rademacher;
    std::uint64_t seed = 0;
    std::vector<double> z;
};

inline constexpr std::uint64_t kDefaultNoiseBudget = 100000000ull;

/// Cell count n^d, guarded against overflow and the memory budget.
inline std::uint64_t noise_cell_count(std::size_t n, std::size_t d,
                                      std::uint64_t budget = kDefaultNoiseBudget) {
    if (n < 1 || d < 1) throw ArgumentError("noise: need n >= 1 and d >= 1");
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < d; ++i) {
        if (n != 0 && total > budget / n)
            throw BudgetError("noise: n^d exceeds the configured budget");
        total *= n;
    }
    if (total > budget) throw BudgetError("noise: n^d exceeds the configured budget");
    return total;
}

// Draw Z_k by flat counter, so the value attached to a given multi-index k
// depends only on (seed, dist, flat position), never on traversal order or
// thread schedule.
inline NoiseField generate_noise(std::size_t n, std::size_t d, NoiseDist dist,
                                 std::uint64_t seed,
                                 std::uint64_t budget = kDefaultNoiseBudget) {
    const std::uint64_t total = noise_cell_count(n, d, budget);
    NoiseField f;
    f.n = n;
    f.d = d;
    f.dist = dist;
    f.seed = seed;
    f.z.resize(total);
    CounterRng rng(seed);
    switch (dist) {
        case NoiseDist::Rademacher:
            for (std::uint64_t j = 0; j < total; ++j) f.z[j] = rng.rademacher(j);
            break;
        case NoiseDist::StandardGaussian:
            for (std::uint64_t j = 0; j < total; ++j) f.z[j] = rng.normal(j);
            break;
        case NoiseDist::CenteredUniform:
            for (std::uint64_t j = 0; j < total; ++j) f.z[j] = rng.unit_variance_uniform(j);
            break;
    }
    return f;
}

}  // namespace mrl
