#include "sigcmp/moments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sigcmp/error.hpp"

namespace sigcmp {

double mean(std::span<const double> x) {
    if (x.empty()) throw DataError("mean of an empty sample");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

double sample_sd(std::span<const double> x) { return std::sqrt(sample_variance(x)); }

double median_inplace(std::vector<double>& buf) {
    if (buf.empty()) throw DataError("median of an empty sample");
    const std::size_t mid = buf.size() / 2;
    std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(mid), buf.end());
    const double upper = buf[mid];
    if (buf.size() % 2 == 1) return upper;
    const double lower = *std::max_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(mid));
    return (lower + upper) / 2.0;
}

double median(std::span<const double> x) {
    std::vector<double> buf(x.begin(), x.end());
    return median_inplace(buf);
}

double quantile_sorted(std::span<const double> sorted, double prob) {
    if (sorted.empty()) throw DataError("quantile of an empty sample");
    prob = std::clamp(prob, 0.0, 1.0);
    const double h = prob * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace sigcmp
