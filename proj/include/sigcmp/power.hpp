#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sigcmp/kernels.hpp"
#include "sigcmp/test_id.hpp"

namespace sigcmp {

using kernels::Exec;

enum class Sidedness { two_sided, one_sided };

struct ProspectiveSpec {
    double expected_mean_diff = 0;
    double expected_std_dev = 1;
    double target_power = 0.8;
    double alpha = 0.05;
    Sidedness direction = Sidedness::two_sided;
};

struct SampleSizeResult {
    double effect = 0;               // |mean diff| / sd
    std::uint64_t closed_form = 0;   // ceil(((z_alpha + z_power) / e)^2)
    std::uint64_t refined = 0;       // smallest n whose noncentral-t power meets the target
    double achieved_power = 0;       // noncentral-t power at `refined`
};

inline constexpr std::uint64_t kDefaultSampleSizeCeiling = 1'000'000'000;

/// Minimal sample size for a one-sample (paired) t test.
SampleSizeResult prospective_sample_size(const ProspectiveSpec& spec,
                                         std::uint64_t ceiling = kDefaultSampleSizeCeiling);

/// Exact power of the t test at standardized effect e via the noncentral t
/// distribution (df = n - 1, noncentrality e * sqrt(n)).
double t_test_power(double effect, std::uint64_t n, double alpha, Sidedness direction);

enum class PowerMethod { monte_carlo, bootstrap };

struct PowerPoint {
    std::size_t sample_size = 0;
    double power = 0;
    double mc_stderr = 0;  // sqrt(p(1-p)/trials)
};

/// How each simulated dataset is tested.
struct PowerTest {
    TestId test_id = TestId::t_test;
    double alpha = 0.05;
    Direction direction = Direction::two_sided;
    double delta = 0.0;
    std::uint64_t inner_trials = 200;  // resampling tests run inside every trial
};

struct PowerCurve {
    std::vector<PowerPoint> points;
    PowerMethod method = PowerMethod::monte_carlo;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    PowerTest test;
};

struct NormalEffect {
    double mean = 0;
    double std_dev = 1;
};

/// {30, 50, 100, 200, 500, 1000, 2500, 5000, 10000, 25000}
std::vector<std::size_t> default_sample_sizes();

/// Simulates `trials` datasets of n Normal(mean, sd) differences per sample size
/// and records the fraction the test rejects.
PowerCurve retrospective_power_mc(const NormalEffect& effect, const PowerTest& test,
                                  std::span<const std::size_t> sample_sizes, std::uint64_t trials,
                                  std::uint64_t seed, Exec exec = Exec::parallel);

/// Same, but datasets are resamples (with replacement) of the observed differences.
PowerCurve retrospective_power_bootstrap(std::span<const double> w, const PowerTest& test,
                                         std::span<const std::size_t> sample_sizes, std::uint64_t trials,
                                         std::uint64_t seed, Exec exec = Exec::parallel);

inline constexpr std::size_t kBootstrapPowerMinN = 10;

struct NormalPair {
    double mu1 = 0, sigma1 = 1, mu2 = 0, sigma2 = 1;
};

struct BetaPair {
    double a1 = 1, b1 = 1, a2 = 1, b2 = 1;
};

using SweepGenerator = std::variant<NormalPair, BetaPair>;

struct SweepRow {
    std::size_t n = 0;
    double p_min = 0;
    double p_mean = 0;
    double p_max = 0;
    std::vector<double> p_values;  // one per iteration, in iteration order
};

struct SweepTable {
    std::vector<SweepRow> rows;
    SweepGenerator generator;
    TestId test_id = TestId::t_test;
    std::uint64_t iterations = 0;
    std::uint64_t seed = 0;
};

/// For every n and iteration, draws n independent pairs (u ~ first, v ~ second
/// distribution), runs the two-sided paired test on u - v and records p.
SweepTable pvalue_sweep(const SweepGenerator& generator, TestId test_id, std::span<const std::size_t> sample_sizes,
                        std::uint64_t iterations, std::uint64_t seed, Exec exec = Exec::parallel,
                        std::uint64_t inner_trials = 200);

/// n,power,stderr
std::string power_curve_to_csv(const PowerCurve& curve);
/// n,p_min,p_mean,p_max
std::string sweep_to_csv(const SweepTable& table);

std::string_view to_string(PowerMethod m) noexcept;
std::string_view to_string(Sidedness s) noexcept;
PowerMethod parse_power_method(std::string_view s);
Sidedness parse_sidedness(std::string_view s);

}  // namespace sigcmp
