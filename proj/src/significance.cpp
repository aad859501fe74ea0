#include "sigcmp/significance.hpp"

#include <algorithm>
#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "sigcmp/error.hpp"
#include "sigcmp/moments.hpp"
#include "sigcmp/rng.hpp"
#include "sigcmp/text.hpp"

namespace sigcmp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite(std::span<const double> w) {
    for (double x : w) {
        if (!std::isfinite(x)) throw DataError("sample contains a non-finite difference");
    }
}

std::vector<double> shifted(std::span<const double> w, double delta) {
    std::vector<double> d(w.begin(), w.end());
    if (delta != 0.0) {
        for (double& x : d) x -= delta;
    }
    return d;
}

std::vector<double> nonzero(std::span<const double> d) {
    std::vector<double> out;
    out.reserve(d.size());
    std::copy_if(d.begin(), d.end(), std::back_inserter(out), [](double x) { return x != 0.0; });
    return out;
}

// Tail probabilities combined per direction; two-sided doubles the smaller tail.
double directional_p(double lower_tail, double upper_tail, Direction dir) {
    switch (dir) {
        case Direction::right: return std::clamp(upper_tail, 0.0, 1.0);
        case Direction::left: return std::clamp(lower_tail, 0.0, 1.0);
        default: return std::clamp(2.0 * std::min(lower_tail, upper_tail), 0.0, 1.0);
    }
}

TestResult finish(TestResult r) {
    r.p_value = std::clamp(r.p_value, 0.0, 1.0);
    r.reject_h0 = r.p_value < r.config.alpha2;
    return r;
}

TestResult start(std::span<const double> w, const TestConfig& config, const char* statistic) {
    validate(config);
    require_finite(w);
    TestResult r;
    r.config = config;
    r.statistic_name = statistic;
    r.n = w.size();
    r.n_used = w.size();
    return r;
}

// Interval for a location estimate from lower/upper quantiles of its sampling
// distribution, honouring the direction's sidedness.
Interval directional_interval(double estimate_low, double estimate_high, Direction dir) {
    switch (dir) {
        case Direction::right: return {estimate_low, kInf};
        case Direction::left: return {-kInf, estimate_high};
        default: return {estimate_low, estimate_high};
    }
}

}  // namespace

void validate(const TestConfig& config) {
    if (!(config.alpha2 > 0.0 && config.alpha2 < 1.0)) throw ConfigError("alpha2 must lie in (0, 1)");
    if (!std::isfinite(config.delta)) throw ConfigError("delta must be finite");
    if (is_resampling(config.test_id) && config.trials < kMinTrials) {
        throw ConfigError("resampling tests need at least 100 trials");
    }
}

TestResult t_test(std::span<const double> w, const TestConfig& config) {
    auto r = start(w, config, "t");
    if (w.size() < 2) throw DataError("t test needs at least 2 observations");
    const auto d = shifted(w, config.delta);
    const double n = static_cast<double>(d.size());
    const double m = mean(d);
    const double sd = sample_sd(d);
    if (sd == 0.0) throw DegenerateError("t test: differences have zero variance");
    const double se = sd / std::sqrt(n);
    const double t = m / se;

    const boost::math::students_t_distribution<double> dist(n - 1.0);
    r.statistic_value = t;
    r.p_value = directional_p(boost::math::cdf(dist, t), boost::math::cdf(boost::math::complement(dist, t)),
                              config.direction);
    r.method = "t_distribution";

    const double alpha = config.alpha2;
    const double q = config.direction == Direction::two_sided
                         ? boost::math::quantile(boost::math::complement(dist, alpha / 2.0))
                         : boost::math::quantile(boost::math::complement(dist, alpha));
    const double est = m + config.delta;
    r.confidence_interval = directional_interval(est - q * se, est + q * se, config.direction);
    return finish(std::move(r));
}

SignedRankStats signed_rank_stats(std::span<const double> d) {
    const auto nz = nonzero(d);
    SignedRankStats s;
    s.n = nz.size();
    if (s.n == 0) return s;

    std::vector<std::size_t> order(s.n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return std::abs(nz[a]) < std::abs(nz[b]); });

    double ties = 0.0;
    for (std::size_t i = 0; i < s.n;) {
        std::size_t j = i;
        while (j + 1 < s.n && std::abs(nz[order[j + 1]]) == std::abs(nz[order[i]])) ++j;
        const double t = static_cast<double>(j - i + 1);
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) {
            if (nz[order[k]] > 0) s.w_plus += avg_rank;
        }
        if (t > 1) {
            s.has_ties = true;
            ties += t * t * t - t;
        }
        i = j + 1;
    }
    s.tie_term = ties / 48.0;
    const double n = static_cast<double>(s.n);
    const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - s.tie_term;
    s.z = (s.w_plus - n * (n + 1.0) / 4.0) / std::sqrt(var);
    return s;
}

std::vector<std::uint64_t> signed_rank_null_counts(std::size_t n) {
    if (n > 62) throw ConfigError("exact signed-rank distribution limited to n <= 62");
    const std::size_t max_sum = n * (n + 1) / 2;
    std::vector<std::uint64_t> counts(max_sum + 1, 0);
    counts[0] = 1;
    for (std::size_t rank = 1; rank <= n; ++rank) {
        const std::size_t top = rank * (rank + 1) / 2;
        for (std::size_t s = top; s >= rank; --s) counts[s] += counts[s - rank];
    }
    return counts;
}

TestResult wilcoxon_signed_rank(std::span<const double> w, const TestConfig& config) {
    auto r = start(w, config, "W+");
    const auto d = shifted(w, config.delta);
    const auto stats = signed_rank_stats(d);
    if (stats.n == 0) throw DegenerateError("degenerate sample: all differences equal delta");
    r.n_used = stats.n;
    r.statistic_value = stats.w_plus;

    if (stats.n <= kExactWilcoxonMaxN && !stats.has_ties) {
        const auto counts = signed_rank_null_counts(stats.n);
        const auto observed = static_cast<std::size_t>(std::llround(stats.w_plus));
        std::uint64_t upper = 0;
        std::uint64_t lower = 0;
        for (std::size_t s = 0; s < counts.size(); ++s) {
            if (s >= observed) upper += counts[s];
            if (s <= observed) lower += counts[s];
        }
        const int shift = -static_cast<int>(stats.n);
        r.p_value = directional_p(std::ldexp(static_cast<double>(lower), shift),
                                  std::ldexp(static_cast<double>(upper), shift), config.direction);
        r.method = "exact";
    } else {
        const boost::math::normal_distribution<double> stdnorm;
        r.p_value = directional_p(boost::math::cdf(stdnorm, stats.z),
                                  boost::math::cdf(boost::math::complement(stdnorm, stats.z)), config.direction);
        r.method = "normal_approx";
    }
    return finish(std::move(r));
}

namespace {

__extension__ using u128 = unsigned __int128;

// Tail sum of Binomial(n, 1/2) coefficients over [from, to], exact for n <= 62.
double binomial_half_exact(std::size_t n, std::size_t from, std::size_t to) {
    u128 c = 1;  // C(n, 0)
    u128 total = 0;
    for (std::size_t i = 0; i <= n; ++i) {
        if (i >= from && i <= to) total += c;
        c = c * (n - i) / (i + 1);
    }
    return std::ldexp(static_cast<double>(total), -static_cast<int>(n));
}

// Same sum with arbitrary-precision counts, rounded once to the nearest double.
double binomial_half_big(std::size_t n, std::size_t from, std::size_t to) {
    using boost::multiprecision::cpp_int;
    cpp_int c = 1;
    cpp_int total = 0;
    for (std::size_t i = 0; i <= to; ++i) {
        if (i >= from) total += c;
        c = c * (n - i) / (i + 1);
    }
    if (total == 0) return 0.0;
    const auto bits = static_cast<long>(boost::multiprecision::msb(total)) + 1;
    long shift = 0;
    if (bits > 64) {
        shift = bits - 64;
        const cpp_int low_mask = (cpp_int(1) << shift) - 1;
        const bool sticky = (total & low_mask) != 0;
        total >>= shift;
        if (sticky) total |= 1;  // 64 bits with a sticky bit round like the full value
    }
    const double top = static_cast<double>(total.convert_to<std::uint64_t>());
    return std::ldexp(top, static_cast<int>(shift) - static_cast<int>(n));
}

double binomial_half_tail(std::size_t n, std::size_t from, std::size_t to) {
    if (n <= 62) return binomial_half_exact(n, from, to);
    // Lower tails only: the upper tail over [k, n] mirrors to [0, n - k].
    if (from > 0) return binomial_half_big(n, 0, n - from);
    return binomial_half_big(n, from, to);
}

}  // namespace

double binomial_half_upper(std::size_t n, std::size_t k) {
    if (k == 0) return 1.0;
    if (k > n) return 0.0;
    if (n <= kExactSignMaxN) return binomial_half_tail(n, k, n);
    const boost::math::binomial_distribution<double> dist(static_cast<double>(n), 0.5);
    return boost::math::cdf(boost::math::complement(dist, static_cast<double>(k - 1)));
}

double binomial_half_lower(std::size_t n, std::size_t k) {
    if (k >= n) return 1.0;
    if (n <= kExactSignMaxN) return binomial_half_tail(n, 0, k);
    const boost::math::binomial_distribution<double> dist(static_cast<double>(n), 0.5);
    return boost::math::cdf(dist, static_cast<double>(k));
}

TestResult sign_test(std::span<const double> w, const TestConfig& config) {
    auto r = start(w, config, "positive_count");
    const auto nz = nonzero(shifted(w, config.delta));
    if (nz.empty()) throw DegenerateError("degenerate sample: all differences equal delta");
    const auto k = static_cast<std::size_t>(std::count_if(nz.begin(), nz.end(), [](double x) { return x > 0; }));
    r.n_used = nz.size();
    r.statistic_value = static_cast<double>(k);
    r.p_value = directional_p(binomial_half_lower(nz.size(), k), binomial_half_upper(nz.size(), k), config.direction);
    r.method = "exact";
    return finish(std::move(r));
}

TestResult bootstrap_test(std::span<const double> w, const TestConfig& config, Exec exec) {
    const bool studentized = config.test_id != TestId::bootstrap_median;
    auto r = start(w, config, studentized ? "t" : "median");
    if (w.size() < 2) throw DataError("bootstrap test needs at least 2 observations");
    const auto d = shifted(w, config.delta);
    const double n = static_cast<double>(d.size());

    double observed = 0.0;
    double center = 0.0;
    double scale = 1.0;  // maps replicate units back to the statistic of w
    if (studentized) {
        const double sd = sample_sd(d);
        if (sd == 0.0) throw DegenerateError("bootstrap t test: differences have zero variance");
        center = mean(d);
        scale = sd / std::sqrt(n);
        observed = center / scale;
    } else {
        center = median(d);
        observed = center;
    }

    const auto stat = studentized ? kernels::ResampleStatistic::studentized_mean : kernels::ResampleStatistic::median;
    auto reps = kernels::bootstrap_replicates(d, stat, center, config.trials, config.seed, exec);

    const double tol = 1e-12 * (1.0 + std::abs(observed));
    std::uint64_t hits = 0;
    for (double x : reps) {
        if (kernels::at_least_as_extreme(x, observed, config.direction, tol)) ++hits;
    }
    r.statistic_value = observed;
    r.p_value = (1.0 + static_cast<double>(hits)) / (static_cast<double>(config.trials) + 1.0);
    r.method = "bootstrap";

    std::sort(reps.begin(), reps.end());
    const double a = config.alpha2;
    const bool two = config.direction == Direction::two_sided;
    const double q_lo = quantile_sorted(reps, two ? a / 2.0 : a);
    const double q_hi = quantile_sorted(reps, two ? 1.0 - a / 2.0 : 1.0 - a);
    const double est = center + config.delta;
    if (studentized) {
        // Bootstrap-t interval: est - q_hi*se .. est - q_lo*se.
        r.confidence_interval = directional_interval(est - q_hi * scale, est - q_lo * scale, config.direction);
    } else {
        r.confidence_interval = directional_interval(est + q_lo, est + q_hi, config.direction);
    }
    return finish(std::move(r));
}

TestResult permutation_test(std::span<const double> w, const TestConfig& config, Exec exec) {
    auto r = start(w, config, "mean");
    if (w.empty()) throw DataError("permutation test needs at least 1 observation");
    const auto d = shifted(w, config.delta);
    const double observed_sum = std::accumulate(d.begin(), d.end(), 0.0);
    double abs_sum = 0.0;
    for (double x : d) abs_sum += std::abs(x);
    const double tol = 1e-9 * abs_sum;

    r.statistic_value = observed_sum / static_cast<double>(d.size());
    if (d.size() <= kExactPermutationMaxN) {
        const auto hits = kernels::sign_flip_exact(d, config.direction, observed_sum, tol, exec);
        r.p_value = std::ldexp(static_cast<double>(hits), -static_cast<int>(d.size()));
        r.method = "exact";
    } else {
        const auto hits =
            kernels::sign_flip_sampled(d, config.direction, observed_sum, tol, config.trials, config.seed, exec);
        r.p_value = (1.0 + static_cast<double>(hits)) / (static_cast<double>(config.trials) + 1.0);
        r.method = "monte_carlo";
    }
    return finish(std::move(r));
}

TestResult run_test(std::span<const double> w, const TestConfig& config, Exec exec) {
    switch (config.test_id) {
        case TestId::t_test: return t_test(w, config);
        case TestId::wilcoxon_signed_rank: return wilcoxon_signed_rank(w, config);
        case TestId::sign_test: return sign_test(w, config);
        case TestId::bootstrap_t:
        case TestId::bootstrap_median: return bootstrap_test(w, config, exec);
        case TestId::permutation: return permutation_test(w, config, exec);
    }
    throw ConfigError("unknown test id");
}

TestResult run_test(const EuSeries& series, const TestConfig& config, Exec exec) {
    return run_test(series.diffs(), config, exec);
}

std::vector<double> bonferroni_adjust(std::span<const double> p, std::optional<std::size_t> family_size) {
    const std::size_t k = family_size.value_or(p.size());
    if (k < 1) throw ConfigError("Bonferroni family size must be at least 1");
    if (k < p.size()) throw ConfigError("Bonferroni family size is smaller than the number of p-values");
    std::vector<double> out;
    out.reserve(p.size());
    for (double x : p) {
        if (!(x >= 0.0 && x <= 1.0)) throw ConfigError("p-values must lie in [0, 1]");
        out.push_back(std::min(1.0, static_cast<double>(k) * x));
    }
    return out;
}

GridResult pairwise_grid(const std::vector<NamedColumn>& systems, const EuConfig& eu, const TestConfig& config,
                         Exec exec) {
    validate(config);
    const std::size_t s = systems.size();
    if (s < 2) throw DataError("pairwise grid needs at least 2 systems");
    const std::size_t len = systems.front().scores.size();
    for (const auto& sys : systems) {
        if (sys.scores.size() != len) {
            throw DataError("system '" + sys.name + "' has " + std::to_string(sys.scores.size()) +
                            " scores; expected " + std::to_string(len));
        }
    }

    GridResult g;
    g.alpha2 = config.alpha2;
    for (const auto& sys : systems) g.systems.push_back(sys.name);
    g.comparisons = s * (s - 1) / 2;

    std::vector<double> raw;
    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = i + 1; j < s; ++j) {
            PairedScores pair;
            pair.source_name = systems[i].name + " vs " + systems[j].name;
            pair.rows.reserve(len);
            for (std::size_t k = 0; k < len; ++k) pair.rows.push_back({systems[i].scores[k], systems[j].scores[k]});
            const auto series = aggregate_to_eus(pair, eu);

            TestConfig cfg = config;
            cfg.seed = rng::substream(config.seed, {i, j});
            GridCell cell;
            cell.row = i;
            cell.col = j;
            try {
                cell.result = run_test(series, cfg, exec);
            } catch (const DegenerateError&) {
                // Identical columns: no evidence of any difference.
                cell.result.config = cfg;
                cell.result.statistic_name = "none";
                cell.result.p_value = 1.0;
                cell.result.n = series.n();
                cell.result.n_used = 0;
                cell.result.method = "degenerate";
            }
            raw.push_back(cell.result.p_value);
            g.cells.push_back(std::move(cell));
        }
    }

    const auto adjusted = bonferroni_adjust(raw, g.comparisons);
    g.adjusted_p.assign(s, std::vector<double>(s, 1.0));
    g.significant.assign(s, std::vector<bool>(s, false));
    for (std::size_t c = 0; c < g.cells.size(); ++c) {
        auto& cell = g.cells[c];
        cell.adjusted_p = adjusted[c];
        cell.significant = adjusted[c] < config.alpha2;
        g.adjusted_p[cell.row][cell.col] = g.adjusted_p[cell.col][cell.row] = cell.adjusted_p;
        g.significant[cell.row][cell.col] = g.significant[cell.col][cell.row] = cell.significant;
    }
    return g;
}

std::string grid_to_csv(const GridResult& grid) {
    std::ostringstream out;
    out << "row,col,adjusted_p,significant\n";
    const std::size_t s = grid.systems.size();
    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = 0; j < s; ++j) {
            if (i == j) continue;
            out << grid.systems[i] << ',' << grid.systems[j] << ',' << format_double(grid.adjusted_p[i][j]) << ','
                << (grid.significant[i][j] ? "true" : "false") << '\n';
        }
    }
    return out.str();
}

}  // namespace sigcmp
