#include "sigcmp/effect_size.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "sigcmp/error.hpp"
#include "sigcmp/moments.hpp"
#include "sigcmp/significance.hpp"

namespace sigcmp {

namespace {

void require_finite(std::span<const double> w) {
    for (double x : w) {
        if (!std::isfinite(x)) throw DataError("sample contains a non-finite difference");
    }
}

double walsh(double a, double b) { return 0.5 * (a + b); }

// Pairs (i, j) over a sorted sample with j >= i + offset (offset 1: i != j,
// offset 0: self-pairs included).
class WalshPairs {
public:
    WalshPairs(std::vector<double> sorted, std::size_t offset) : x_(std::move(sorted)), offset_(offset) {}

    std::uint64_t size() const {
        const auto n = static_cast<std::uint64_t>(x_.size());
        return offset_ == 0 ? n * (n + 1) / 2 : n * (n - 1) / 2;
    }

    // Number of pairs whose average is <= v.
    std::uint64_t count_le(double v) const {
        const std::size_t n = x_.size();
        std::uint64_t count = 0;
        std::ptrdiff_t j = static_cast<std::ptrdiff_t>(n) - 1;
        for (std::size_t i = 0; i < n; ++i) {
            const auto first = static_cast<std::ptrdiff_t>(i + offset_);
            while (j >= first && walsh(x_[i], x_[static_cast<std::size_t>(j)]) > v) --j;
            if (j < first) break;
            count += static_cast<std::uint64_t>(j - first + 1);
        }
        return count;
    }

    // Averages in (lo, hi].
    std::vector<double> collect(double lo, double hi) const {
        std::vector<double> out;
        const std::size_t n = x_.size();
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t first = i + offset_;
            if (first >= n) break;
            auto begin = std::partition_point(x_.begin() + static_cast<std::ptrdiff_t>(first), x_.end(),
                                              [&](double y) { return walsh(x_[i], y) <= lo; });
            for (auto it = begin; it != x_.end(); ++it) {
                const double a = walsh(x_[i], *it);
                if (a > hi) break;
                out.push_back(a);
            }
        }
        return out;
    }

    // k-th smallest average, 1-based.
    double select(std::uint64_t k) const {
        double lo = std::nextafter(walsh(x_.front(), x_[offset_]), -std::numeric_limits<double>::infinity());
        double hi = walsh(x_[x_.size() - 1 - offset_], x_.back());
        std::uint64_t count_lo = 0;
        std::uint64_t count_hi = size();
        const std::uint64_t small = x_.size();
        while (count_hi - count_lo > small) {
            const double mid = lo + (hi - lo) / 2.0;
            if (mid <= lo || mid >= hi) return hi;  // adjacent doubles: every candidate equals hi
            const std::uint64_t c = count_le(mid);
            if (c >= k) {
                hi = mid;
                count_hi = c;
            } else {
                lo = mid;
                count_lo = c;
            }
        }
        auto candidates = collect(lo, hi);
        const auto idx = static_cast<std::ptrdiff_t>(k - count_lo - 1);
        std::nth_element(candidates.begin(), candidates.begin() + idx, candidates.end());
        return candidates[static_cast<std::size_t>(idx)];
    }

private:
    std::vector<double> x_;
    std::size_t offset_;
};

}  // namespace

EffectSizeEstimate cohens_d(std::span<const double> w) {
    require_finite(w);
    if (w.size() < 2) throw DataError("Cohen's d needs at least 2 observations");
    const double sd = sample_sd(w);
    if (sd == 0.0) throw DegenerateError("Cohen's d: differences have zero standard deviation");
    return {EffectIndex::cohens_d, mean(w) / sd, w.size(), true};
}

EffectSizeEstimate hedges_g(std::span<const double> w) {
    if (w.size() < 3) throw DataError("Hedges' g needs at least 3 observations");
    const auto d = cohens_d(w);
    const double n = static_cast<double>(w.size());
    return {EffectIndex::hedges_g, d.value * (1.0 - 3.0 / (4.0 * n - 9.0)), w.size(), true};
}

EffectSizeEstimate wilcoxon_r(std::span<const double> w) {
    require_finite(w);
    const auto s = signed_rank_stats(w);
    if (s.n == 0) throw DegenerateError("Wilcoxon r: all differences are zero");
    if (s.n < 2) throw DataError("Wilcoxon r needs at least 2 non-zero differences");
    return {EffectIndex::wilcoxon_r, s.z / std::sqrt(static_cast<double>(s.n)), s.n, true};
}

EffectSizeEstimate hodges_lehmann(std::span<const double> w, const HodgesLehmannOptions& options) {
    require_finite(w);
    if (w.size() < 2) throw DataError("Hodges-Lehmann estimator needs at least 2 observations");
    const std::size_t n = w.size();
    const std::size_t offset = options.include_self_pairs ? 0 : 1;

    double value = 0.0;
    if (n <= options.enumeration_max_n) {
        std::vector<double> averages;
        averages.reserve(offset == 0 ? n * (n + 1) / 2 : n * (n - 1) / 2);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + offset; j < n; ++j) averages.push_back(walsh(w[i], w[j]));
        }
        value = median_inplace(averages);
    } else {
        std::vector<double> sorted(w.begin(), w.end());
        std::sort(sorted.begin(), sorted.end());
        const WalshPairs pairs(std::move(sorted), offset);
        const std::uint64_t total = pairs.size();
        if (total % 2 == 1) {
            value = pairs.select(total / 2 + 1);
        } else {
            value = (pairs.select(total / 2) + pairs.select(total / 2 + 1)) / 2.0;
        }
    }
    return {EffectIndex::hodges_lehmann, value, n, false};
}

EffectSizeEstimate estimate(EffectIndex index, std::span<const double> w) {
    switch (index) {
        case EffectIndex::cohens_d: return cohens_d(w);
        case EffectIndex::hedges_g: return hedges_g(w);
        case EffectIndex::wilcoxon_r: return wilcoxon_r(w);
        case EffectIndex::hodges_lehmann: return hodges_lehmann(w);
    }
    throw ConfigError("unknown effect size index");
}

std::string_view to_string(EffectIndex index) noexcept {
    switch (index) {
        case EffectIndex::cohens_d: return "cohens_d";
        case EffectIndex::hedges_g: return "hedges_g";
        case EffectIndex::wilcoxon_r: return "wilcoxon_r";
        case EffectIndex::hodges_lehmann: return "hodges_lehmann";
    }
    return "unknown";
}

EffectIndex parse_effect_index(std::string_view s) {
    if (s == "cohens_d") return EffectIndex::cohens_d;
    if (s == "hedges_g") return EffectIndex::hedges_g;
    if (s == "wilcoxon_r") return EffectIndex::wilcoxon_r;
    if (s == "hodges_lehmann") return EffectIndex::hodges_lehmann;
    throw ConfigError("unknown effect size index '" + std::string(s) +
                      "' (expected cohens_d, hedges_g, wilcoxon_r or hodges_lehmann)");
}

}  // namespace sigcmp
