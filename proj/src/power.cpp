#include "sigcmp/power.hpp"

#include <algorithm>
#include <boost/math/distributions/non_central_t.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/random/beta_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <cmath>
#include <sstream>

#include "sigcmp/error.hpp"
#include "sigcmp/rng.hpp"
#include "sigcmp/significance.hpp"
#include "sigcmp/text.hpp"

namespace sigcmp {

namespace {

void check_unit(double x, const char* what) {
    if (!(x > 0.0 && x < 1.0)) throw ConfigError(std::string(what) + " must lie in (0, 1)");
}

}  // namespace

double t_test_power(double effect, std::uint64_t n, double alpha, Sidedness direction) {
    check_unit(alpha, "alpha");
    if (n < 2) throw ConfigError("t test power needs n >= 2");
    const double df = static_cast<double>(n - 1);
    const double ncp = std::abs(effect) * std::sqrt(static_cast<double>(n));
    const boost::math::students_t_distribution<double> central(df);
    const boost::math::non_central_t_distribution<double> shifted(df, ncp);
    if (direction == Sidedness::one_sided) {
        const double crit = boost::math::quantile(boost::math::complement(central, alpha));
        return boost::math::cdf(boost::math::complement(shifted, crit));
    }
    const double crit = boost::math::quantile(boost::math::complement(central, alpha / 2.0));
    return boost::math::cdf(boost::math::complement(shifted, crit)) + boost::math::cdf(shifted, -crit);
}

SampleSizeResult prospective_sample_size(const ProspectiveSpec& spec, std::uint64_t ceiling) {
    check_unit(spec.alpha, "alpha");
    check_unit(spec.target_power, "target power");
    if (!(spec.target_power > spec.alpha)) throw ConfigError("target power must exceed alpha");
    if (!(spec.expected_std_dev > 0.0) || !std::isfinite(spec.expected_std_dev)) {
        throw ConfigError("expected standard deviation must be positive");
    }
    if (spec.expected_mean_diff == 0.0 || !std::isfinite(spec.expected_mean_diff)) {
        throw ConfigError("expected mean difference must be finite and non-zero");
    }

    SampleSizeResult r;
    r.effect = std::abs(spec.expected_mean_diff) / spec.expected_std_dev;
    const boost::math::normal_distribution<double> stdnorm;
    const double tail = spec.direction == Sidedness::two_sided ? spec.alpha / 2.0 : spec.alpha;
    const double z_alpha = boost::math::quantile(boost::math::complement(stdnorm, tail));
    const double z_power = boost::math::quantile(stdnorm, spec.target_power);
    const double closed = std::ceil(std::pow((z_alpha + z_power) / r.effect, 2.0));
    if (!(closed <= static_cast<double>(ceiling))) {
        throw DegenerateError("effect size too small: required sample size exceeds " + std::to_string(ceiling));
    }
    r.closed_form = std::max<std::uint64_t>(2, static_cast<std::uint64_t>(closed));

    const auto meets = [&](std::uint64_t n) {
        return t_test_power(r.effect, n, spec.alpha, spec.direction) >= spec.target_power;
    };

    // Power is increasing in n: bracket the smallest qualifying n around the
    // closed form, then bisect.
    std::uint64_t lo = 1;  // largest n known to fall short (1 = sentinel)
    std::uint64_t hi = 0;  // smallest n known to meet the target
    if (meets(r.closed_form)) {
        hi = r.closed_form;
        std::uint64_t step = 1;
        while (hi > 2) {
            const std::uint64_t probe = hi > step + 1 ? hi - step : 2;
            if (meets(probe)) {
                hi = probe;
                step *= 2;
            } else {
                lo = probe;
                break;
            }
        }
    } else {
        lo = r.closed_form;
        std::uint64_t step = 1;
        while (true) {
            if (lo > ceiling - step) {
                throw DegenerateError("required sample size exceeds " + std::to_string(ceiling));
            }
            const std::uint64_t probe = lo + step;
            if (meets(probe)) {
                hi = probe;
                break;
            }
            lo = probe;
            step *= 2;
        }
    }
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (mid >= 2 && meets(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    r.refined = hi;
    r.achieved_power = t_test_power(r.effect, hi, spec.alpha, spec.direction);
    return r;
}

std::vector<std::size_t> default_sample_sizes() { return {30, 50, 100, 200, 500, 1000, 2500, 5000, 10000, 25000}; }

namespace {

void check_sizes(std::span<const std::size_t> sizes) {
    if (sizes.empty()) throw ConfigError("at least one sample size is required");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] < 2) throw ConfigError("sample sizes must be at least 2");
        if (i > 0 && sizes[i] <= sizes[i - 1]) throw ConfigError("sample sizes must be strictly increasing");
    }
}

void check_power_test(const PowerTest& test, std::uint64_t trials) {
    check_unit(test.alpha, "alpha");
    if (!std::isfinite(test.delta)) throw ConfigError("delta must be finite");
    if (trials < kMinTrials) throw ConfigError("power analysis needs at least 100 trials");
    if (is_resampling(test.test_id) && test.inner_trials < kMinTrials) {
        throw ConfigError("resampling tests inside power analysis need at least 100 inner trials");
    }
}

TestConfig inner_config(const PowerTest& test, std::uint64_t seed) {
    TestConfig cfg;
    cfg.test_id = test.test_id;
    cfg.direction = test.direction;
    cfg.delta = test.delta;
    cfg.alpha2 = test.alpha;
    cfg.trials = test.inner_trials;
    cfg.seed = seed;
    return cfg;
}

bool rejects(std::span<const double> sample, const TestConfig& cfg) {
    try {
        return run_test(sample, cfg, Exec::serial).reject_h0;
    } catch (const DegenerateError&) {
        return false;
    }
}

// Runs trials for every sample size as one flat index space (size-major), so the
// result depends only on (seed, size index, trial index).
template <typename Draw>
PowerCurve simulate_curve(PowerMethod method, const PowerTest& test, std::span<const std::size_t> sizes,
                          std::uint64_t trials, std::uint64_t seed, Exec exec, Draw draw) {
    const std::size_t total = sizes.size() * trials;
    const auto outcome = kernels::map_indices<unsigned char>(total, exec, [&](std::size_t idx) -> unsigned char {
        const std::size_t k = idx / trials;
        const std::uint64_t t = idx % trials;
        auto engine = rng::make_engine(seed, {k, t});
        std::vector<double> sample(sizes[k]);
        draw(engine, sample);
        return rejects(sample, inner_config(test, rng::substream(seed, {k, t, 1}))) ? 1 : 0;
    });

    PowerCurve curve;
    curve.method = method;
    curve.trials = trials;
    curve.seed = seed;
    curve.test = test;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        std::uint64_t hits = 0;
        for (std::uint64_t t = 0; t < trials; ++t) hits += outcome[k * trials + t];
        const double p = static_cast<double>(hits) / static_cast<double>(trials);
        curve.points.push_back({sizes[k], p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials))});
    }
    return curve;
}

}  // namespace

PowerCurve retrospective_power_mc(const NormalEffect& effect, const PowerTest& test,
                                  std::span<const std::size_t> sample_sizes, std::uint64_t trials,
                                  std::uint64_t seed, Exec exec) {
    check_sizes(sample_sizes);
    check_power_test(test, trials);
    if (!(effect.std_dev > 0.0) || !std::isfinite(effect.std_dev) || !std::isfinite(effect.mean)) {
        throw ConfigError("simulated effect needs a finite mean and a positive standard deviation");
    }
    return simulate_curve(PowerMethod::monte_carlo, test, sample_sizes, trials, seed, exec,
                          [&](rng::Engine& engine, std::vector<double>& out) {
                              boost::random::normal_distribution<double> dist(effect.mean, effect.std_dev);
                              for (double& x : out) x = dist(engine);
                          });
}

PowerCurve retrospective_power_bootstrap(std::span<const double> w, const PowerTest& test,
                                         std::span<const std::size_t> sample_sizes, std::uint64_t trials,
                                         std::uint64_t seed, Exec exec) {
    check_sizes(sample_sizes);
    check_power_test(test, trials);
    if (w.size() < kBootstrapPowerMinN) {
        throw DataError("bootstrap power analysis needs at least 10 observations");
    }
    for (double x : w) {
        if (!std::isfinite(x)) throw DataError("sample contains a non-finite difference");
    }
    if (std::all_of(w.begin(), w.end(), [&](double x) { return x == w.front(); })) {
        throw DegenerateError("bootstrap power analysis: all differences are equal");
    }
    return simulate_curve(PowerMethod::bootstrap, test, sample_sizes, trials, seed, exec,
                          [&](rng::Engine& engine, std::vector<double>& out) {
                              boost::random::uniform_int_distribution<std::size_t> pick(0, w.size() - 1);
                              for (double& x : out) x = w[pick(engine)];
                          });
}

SweepTable pvalue_sweep(const SweepGenerator& generator, TestId test_id, std::span<const std::size_t> sample_sizes,
                        std::uint64_t iterations, std::uint64_t seed, Exec exec, std::uint64_t inner_trials) {
    check_sizes(sample_sizes);
    if (iterations < 2) throw ConfigError("p-value sweep needs at least 2 iterations");
    if (const auto* np = std::get_if<NormalPair>(&generator)) {
        if (!(np->sigma1 > 0.0 && np->sigma2 > 0.0) || !std::isfinite(np->mu1) || !std::isfinite(np->mu2) ||
            !std::isfinite(np->sigma1) || !std::isfinite(np->sigma2)) {
            throw ConfigError("normal generator needs finite means and positive standard deviations");
        }
    } else {
        const auto& bp = std::get<BetaPair>(generator);
        for (double v : {bp.a1, bp.b1, bp.a2, bp.b2}) {
            if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("beta generator parameters must be positive");
        }
    }

    PowerTest test;
    test.test_id = test_id;
    test.inner_trials = inner_trials;
    check_power_test(test, kMinTrials);

    const std::size_t total = sample_sizes.size() * iterations;
    const auto pvals = kernels::map_indices<double>(total, exec, [&](std::size_t idx) {
        const std::size_t k = idx / iterations;
        const std::uint64_t it = idx % iterations;
        auto engine = rng::make_engine(seed, {k, it});
        std::vector<double> w(sample_sizes[k]);
        if (const auto* np = std::get_if<NormalPair>(&generator)) {
            boost::random::normal_distribution<double> first(np->mu1, np->sigma1);
            boost::random::normal_distribution<double> second(np->mu2, np->sigma2);
            for (double& x : w) {
                const double u = first(engine);
                x = u - second(engine);
            }
        } else {
            const auto& bp = std::get<BetaPair>(generator);
            boost::random::beta_distribution<double> first(bp.a1, bp.b1);
            boost::random::beta_distribution<double> second(bp.a2, bp.b2);
            for (double& x : w) {
                const double u = first(engine);
                x = u - second(engine);
            }
        }
        try {
            return run_test(w, inner_config(test, rng::substream(seed, {k, it, 1})), Exec::serial).p_value;
        } catch (const DegenerateError&) {
            return 1.0;
        }
    });

    SweepTable table;
    table.generator = generator;
    table.test_id = test_id;
    table.iterations = iterations;
    table.seed = seed;
    for (std::size_t k = 0; k < sample_sizes.size(); ++k) {
        SweepRow row;
        row.n = sample_sizes[k];
        row.p_values.assign(pvals.begin() + static_cast<std::ptrdiff_t>(k * iterations),
                            pvals.begin() + static_cast<std::ptrdiff_t>((k + 1) * iterations));
        row.p_min = *std::min_element(row.p_values.begin(), row.p_values.end());
        row.p_max = *std::max_element(row.p_values.begin(), row.p_values.end());
        double sum = 0.0;
        for (double p : row.p_values) sum += p;
        row.p_mean = sum / static_cast<double>(row.p_values.size());
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string power_curve_to_csv(const PowerCurve& curve) {
    std::ostringstream out;
    out << "n,power,stderr\n";
    for (const auto& p : curve.points) {
        out << p.sample_size << ',' << format_double(p.power) << ',' << format_double(p.mc_stderr) << '\n';
    }
    return out.str();
}

std::string sweep_to_csv(const SweepTable& table) {
    std::ostringstream out;
    out << "n,p_min,p_mean,p_max\n";
    for (const auto& r : table.rows) {
        out << r.n << ',' << format_double(r.p_min) << ',' << format_double(r.p_mean) << ','
            << format_double(r.p_max) << '\n';
    }
    return out.str();
}

std::string_view to_string(PowerMethod m) noexcept {
    return m == PowerMethod::monte_carlo ? "monte_carlo" : "bootstrap";
}

std::string_view to_string(Sidedness s) noexcept { return s == Sidedness::two_sided ? "two_sided" : "one_sided"; }

PowerMethod parse_power_method(std::string_view s) {
    if (s == "monte_carlo" || s == "mc") return PowerMethod::monte_carlo;
    if (s == "bootstrap") return PowerMethod::bootstrap;
    throw ConfigError("unknown power method '" + std::string(s) + "' (expected mc or bootstrap)");
}

Sidedness parse_sidedness(std::string_view s) {
    if (s == "two_sided" || s == "two-sided") return Sidedness::two_sided;
    if (s == "one_sided" || s == "one-sided") return Sidedness::one_sided;
    throw ConfigError("unknown sidedness '" + std::string(s) + "' (expected two_sided or one_sided)");
}

}  // namespace sigcmp
