#include "cci/stats.hpp"

#include "cci/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cci::stats {

double quantile_sorted(std::span<const double> sorted, double prob) {
    if (sorted.empty()) fail(ErrorKind::InvalidArgument, "quantile of an empty sample");
    if (!(prob >= 0.0 && prob <= 1.0)) fail(ErrorKind::InvalidArgument, "quantile probability outside [0,1]");
    const double h = prob * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double quantile(std::vector<double> values, double prob) {
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, prob);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double mean(std::span<const double> values) {
    if (values.empty()) fail(ErrorKind::InvalidArgument, "mean of an empty sample");
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace cci::stats
