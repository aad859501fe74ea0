#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sigcmp/ingest.hpp"
#include "sigcmp/kernels.hpp"
#include "sigcmp/test_id.hpp"

namespace sigcmp {

using kernels::Exec;

inline constexpr std::uint64_t kDefaultTrials = 10000;
inline constexpr std::uint64_t kMinTrials = 100;
/// Permutation tests enumerate all 2^n sign flips up to this n.
inline constexpr std::size_t kExactPermutationMaxN = 20;
/// Wilcoxon uses the exact null distribution up to this n when there are no ties.
inline constexpr std::size_t kExactWilcoxonMaxN = 25;

/// Parameters of one paired test. H0: the test statistic of w equals `delta`, so
/// every test runs on d_i = w_i - delta.
struct TestConfig {
    TestId test_id = TestId::t_test;
    Direction direction = Direction::two_sided;
    double delta = 0.0;
    double alpha2 = 0.05;
    std::uint64_t trials = kDefaultTrials;  // resampling tests only
    std::uint64_t seed = 0;

    friend bool operator==(const TestConfig&, const TestConfig&) = default;
};

/// Confidence interval; an infinite bound marks a one-sided interval.
struct Interval {
    double low = 0;
    double high = 0;
    friend bool operator==(const Interval&, const Interval&) = default;
};

struct TestResult {
    TestConfig config;
    std::string statistic_name;
    double statistic_value = 0;
    double p_value = 1;
    bool reject_h0 = false;  // p_value < alpha2, strictly
    std::optional<Interval> confidence_interval;  // for the statistic of w, level 1 - alpha2
    std::size_t n = 0;       // sample size handed to the test
    std::size_t n_used = 0;  // after dropping zero differences (Wilcoxon, sign)
    std::string method;      // "t_distribution", "exact", "normal_approx", "bootstrap", "monte_carlo"
};

/// Throws ConfigError unless alpha2 is in (0, 1) and resampling tests have trials >= 100.
void validate(const TestConfig& config);

TestResult t_test(std::span<const double> w, const TestConfig& config);
TestResult wilcoxon_signed_rank(std::span<const double> w, const TestConfig& config);
TestResult sign_test(std::span<const double> w, const TestConfig& config);
TestResult bootstrap_test(std::span<const double> w, const TestConfig& config, Exec exec = Exec::parallel);
TestResult permutation_test(std::span<const double> w, const TestConfig& config, Exec exec = Exec::parallel);

/// Dispatches on config.test_id.
TestResult run_test(std::span<const double> w, const TestConfig& config, Exec exec = Exec::parallel);
TestResult run_test(const EuSeries& series, const TestConfig& config, Exec exec = Exec::parallel);

/// Signed-rank quantities shared by the Wilcoxon test and the r effect size.
/// Zeros are dropped first; ranks of |d| use average ranks for ties.
struct SignedRankStats {
    std::size_t n = 0;     // non-zero differences
    double w_plus = 0;     // rank sum of the positive differences
    double tie_term = 0;   // sum over tie groups of (t^3 - t) / 48
    double z = 0;          // (W - n(n+1)/4) / sqrt(n(n+1)(2n+1)/24 - tie_term)
    bool has_ties = false;
};

SignedRankStats signed_rank_stats(std::span<const double> d);

/// Exact null distribution of W+ for n untied ranks: counts[s] = number of
/// subsets of {1..n} with sum s (total 2^n). n <= 62.
std::vector<std::uint64_t> signed_rank_null_counts(std::size_t n);

/// Sign-test tails are summed in exact integer arithmetic up to this n and
/// rounded once; larger n use the regularized incomplete beta function.
inline constexpr std::size_t kExactSignMaxN = 4096;

/// Binomial(n, 1/2) tail probabilities: P(X >= k) and P(X <= k).
double binomial_half_upper(std::size_t n, std::size_t k);
double binomial_half_lower(std::size_t n, std::size_t k);

/// p'_j = min(1, k p_j). `family_size` defaults to p.size() and must be >= p.size().
std::vector<double> bonferroni_adjust(std::span<const double> p,
                                      std::optional<std::size_t> family_size = std::nullopt);

struct NamedColumn {
    std::string name;
    std::vector<double> scores;
};

struct GridCell {
    std::size_t row = 0;
    std::size_t col = 0;
    TestResult result;   // raw, unadjusted
    double adjusted_p = 1;
    bool significant = false;
};

struct GridResult {
    std::vector<std::string> systems;
    std::size_t comparisons = 0;  // S(S-1)/2
    double alpha2 = 0.05;
    std::vector<GridCell> cells;  // row < col, row-major
    std::vector<std::vector<double>> adjusted_p;  // symmetric S x S, diagonal 1
    std::vector<std::vector<bool>> significant;   // symmetric, diagonal false
};

/// Runs the configured test on every unordered pair of systems (u = row system,
/// v = column system), then Bonferroni-adjusts over the S(S-1)/2 comparisons.
GridResult pairwise_grid(const std::vector<NamedColumn>& systems, const EuConfig& eu, const TestConfig& config,
                         Exec exec = Exec::parallel);

/// Heatmap plot data: one line per ordered off-diagonal pair.
/// Columns: row,col,adjusted_p,significant.
std::string grid_to_csv(const GridResult& grid);

}  // namespace sigcmp
