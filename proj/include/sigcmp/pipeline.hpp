#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sigcmp/report.hpp"

namespace sigcmp {

inline constexpr std::uint64_t kDefaultPowerTrials = 1000;

/// Everything `compare` needs beyond the data. Unset fields take the documented
/// defaults: the first recommended test, the effect indices matching the
/// recommended statistic, and bootstrap power at {ceil(n/2), n, 2n}.
struct CompareOptions {
    double alpha1 = 0.05;
    std::optional<std::size_t> histogram_bins;
    std::optional<TestId> test_id;
    TestConfig test;  // test_id is overwritten by the choice above
    std::vector<EffectIndex> effect_indices;
    bool power = true;
    PowerMethod power_method = PowerMethod::bootstrap;
    std::vector<std::size_t> power_sizes;
    std::uint64_t power_trials = kDefaultPowerTrials;
    std::uint64_t power_inner_trials = 200;
    std::optional<ProspectiveSpec> prospective;
};

/// Effect indices for the statistic the analysis recommends:
/// mean -> Cohen's d, Hedges' g; median -> Wilcoxon r, Hodges-Lehmann.
std::vector<EffectIndex> default_effect_indices(const AnalysisReport& analysis);

/// {ceil(n/2), n, 2n}, deduplicated and at least 2.
std::vector<std::size_t> default_power_sizes(std::size_t n);

/// Seed of the power simulation, derived from the test seed.
std::uint64_t power_seed(std::uint64_t test_seed);

/// Retrospective power for the test in `config` on the observed series.
PowerCurve retrospective_power(const EuSeries& series, const TestConfig& config, PowerMethod method,
                               std::vector<std::size_t> sizes, std::uint64_t trials, std::uint64_t inner_trials,
                               Exec exec = Exec::parallel);

/// Estimates each index; indices that are undefined for the sample are skipped and
/// reported in `warnings`.
std::vector<EffectSizeEstimate> estimate_all(std::span<const double> w, const std::vector<EffectIndex>& indices,
                                             std::vector<std::string>& warnings);

/// Full pipeline: analysis, test, effect sizes, power, assembled report.
ComparisonReport compare(const EuSeries& series, const CompareOptions& options, Exec exec = Exec::parallel);

}  // namespace sigcmp
