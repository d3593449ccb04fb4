#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace cci::stats {

/// Linear-interpolation quantile between order statistics (Hyndman-Fan type 7).
/// `prob` in [0,1]; input need not be sorted.
[[nodiscard]] double quantile(std::vector<double> values, double prob);
[[nodiscard]] double quantile_sorted(std::span<const double> sorted, double prob);
[[nodiscard]] double median(std::vector<double> values);
[[nodiscard]] double mean(std::span<const double> values);

/// splitmix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream seed for replicate `index` of a run seeded with `master`.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

}  // namespace cci::stats
