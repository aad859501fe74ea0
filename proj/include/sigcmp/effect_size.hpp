#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace sigcmp {

enum class EffectIndex { cohens_d, hedges_g, wilcoxon_r, hodges_lehmann };

struct EffectSizeEstimate {
    EffectIndex index = EffectIndex::cohens_d;
    double value = 0;
    std::size_t n = 0;
    bool standardized = true;  // false only for Hodges-Lehmann
};

struct HodgesLehmannOptions {
    /// Also include the n self-pairs (w_i + w_i)/2, giving the classical Walsh
    /// average estimator. Off by default: only pairs with i != j.
    bool include_self_pairs = false;
    /// Above this n the median is found by value bisection instead of
    /// materialising all n(n-1)/2 averages.
    std::size_t enumeration_max_n = 2000;
};

/// Mean of w over its n-1 standard deviation.
EffectSizeEstimate cohens_d(std::span<const double> w);

/// d * (1 - 3 / (4n - 9)); needs n >= 3.
EffectSizeEstimate hedges_g(std::span<const double> w);

/// Z / sqrt(n) with the signed-rank Z (tie-corrected) and n counted after
/// dropping zero differences.
EffectSizeEstimate wilcoxon_r(std::span<const double> w);

EffectSizeEstimate hodges_lehmann(std::span<const double> w, const HodgesLehmannOptions& options = {});

EffectSizeEstimate estimate(EffectIndex index, std::span<const double> w);

std::string_view to_string(EffectIndex index) noexcept;
EffectIndex parse_effect_index(std::string_view s);

}  // namespace sigcmp
