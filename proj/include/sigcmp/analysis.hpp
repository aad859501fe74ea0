#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sigcmp/ingest.hpp"
#include "sigcmp/test_id.hpp"

namespace sigcmp {

struct SummaryStats {
    std::size_t count = 0;
    double mean = 0;
    double median = 0;
    double std_dev = 0;  // n-1 denominator
    double min = 0;
    double max = 0;
    double skewness = 0;  // adjusted Fisher-Pearson G1; 0 when degenerate
    bool degenerate = false;  // n < 3 or zero spread: skewness is undefined
};

struct HistogramData {
    std::vector<double> bin_edges;
    std::vector<std::size_t> counts;
    std::string label;  // "u", "v" or "u-v"
};

enum class SkewCategory { roughly_symmetric, slightly_skewed, highly_skewed };
enum class CentralStatistic { mean, median };

struct SkewClass {
    double gamma = 0;
    SkewCategory category = SkewCategory::roughly_symmetric;
    CentralStatistic recommended_statistic = CentralStatistic::mean;
    bool degenerate = false;
};

enum class NormalityVerdict { normal, not_normal, skipped };

struct NormalityResult {
    bool performed = false;
    double w_statistic = 0;
    double p_value = 0;
    double alpha1 = 0.05;
    NormalityVerdict verdict = NormalityVerdict::skipped;
};

/// Which tests to suggest for each analysis outcome. The defaults are the
/// documented policy; callers may swap in their own lists.
struct RecommendationPolicy {
    std::vector<TestId> symmetric_normal{TestId::t_test, TestId::bootstrap_t, TestId::permutation,
                                         TestId::wilcoxon_signed_rank};
    std::vector<TestId> symmetric_not_normal{TestId::bootstrap_t, TestId::permutation,
                                             TestId::wilcoxon_signed_rank, TestId::sign_test};
    std::vector<TestId> skewed{TestId::wilcoxon_signed_rank, TestId::sign_test,
                               TestId::bootstrap_median};
};

struct AnalysisReport {
    SummaryStats stats_u;
    SummaryStats stats_v;
    SummaryStats stats_diff;
    std::vector<HistogramData> histograms;  // u, v, u-v in that order
    SkewClass skew;
    NormalityResult normality;
    std::vector<TestId> recommended_tests;
    std::vector<std::string> warnings;
};

inline constexpr std::size_t kShapiroWilkMaxN = 5000;

SummaryStats summarize(std::span<const double> sample);

/// Equal-width bins over [min, max]. `bins` unset means ceil(sqrt(n)) clamped to
/// [5, 50]. An all-equal sample gets one bin of width 1 centred on the value.
HistogramData histogram(std::span<const double> sample, std::optional<std::size_t> bins = std::nullopt,
                        std::string label = "");

/// |gamma| in [0, 0.5) symmetric, [0.5, 1) slightly skewed, [1, inf) highly skewed.
SkewClass classify_skew(const SummaryStats& stats_diff);

/// Shapiro-Wilk W and p-value following Royston's AS R94 (3 <= n <= 5000).
NormalityResult shapiro_wilk(std::span<const double> sample, double alpha1);

std::vector<TestId> recommend(const SkewClass& skew, const NormalityResult& normality,
                              const RecommendationPolicy& policy = {});

/// Full data-analysis step on an EU series: summaries and histograms of u, v and
/// u-v, the skewness rule, Shapiro-Wilk on u-v when it is roughly symmetric, and
/// the recommended tests.
AnalysisReport analyze(const EuSeries& series, double alpha1 = 0.05,
                       std::optional<std::size_t> bins = std::nullopt,
                       const RecommendationPolicy& policy = {});

std::string_view to_string(SkewCategory c) noexcept;
std::string_view to_string(CentralStatistic s) noexcept;
std::string_view to_string(NormalityVerdict v) noexcept;

}  // namespace sigcmp
