#include "sigcmp/pipeline.hpp"

#include <algorithm>

#include "sigcmp/error.hpp"
#include "sigcmp/moments.hpp"
#include "sigcmp/rng.hpp"

namespace sigcmp {

std::vector<EffectIndex> default_effect_indices(const AnalysisReport& analysis) {
    if (analysis.skew.recommended_statistic == CentralStatistic::mean) {
        return {EffectIndex::cohens_d, EffectIndex::hedges_g};
    }
    return {EffectIndex::wilcoxon_r, EffectIndex::hodges_lehmann};
}

std::vector<std::size_t> default_power_sizes(std::size_t n) {
    std::vector<std::size_t> sizes{std::max<std::size_t>(2, (n + 1) / 2), std::max<std::size_t>(2, n),
                                   std::max<std::size_t>(2, 2 * n)};
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    return sizes;
}

std::uint64_t power_seed(std::uint64_t test_seed) { return rng::substream(test_seed, {1}); }

PowerCurve retrospective_power(const EuSeries& series, const TestConfig& config, PowerMethod method,
                               std::vector<std::size_t> sizes, std::uint64_t trials, std::uint64_t inner_trials,
                               Exec exec) {
    if (sizes.empty()) sizes = default_power_sizes(series.n());
    PowerTest test;
    test.test_id = config.test_id;
    test.alpha = config.alpha2;
    test.direction = config.direction;
    test.delta = config.delta;
    test.inner_trials = inner_trials;
    const std::uint64_t seed = power_seed(config.seed);
    if (method == PowerMethod::bootstrap) {
        return retrospective_power_bootstrap(series.diffs(), test, sizes, trials, seed, exec);
    }
    const auto w = series.diffs();
    if (w.size() < 2) throw DataError("Monte-Carlo power needs at least 2 observations");
    const NormalEffect effect{mean(w), sample_sd(w)};
    if (effect.std_dev == 0.0) throw DegenerateError("Monte-Carlo power: differences have zero variance");
    return retrospective_power_mc(effect, test, sizes, trials, seed, exec);
}

std::vector<EffectSizeEstimate> estimate_all(std::span<const double> w, const std::vector<EffectIndex>& indices,
                                             std::vector<std::string>& warnings) {
    std::vector<EffectSizeEstimate> out;
    for (EffectIndex idx : indices) {
        try {
            out.push_back(estimate(idx, w));
        } catch (const DegenerateError& e) {
            warnings.push_back(std::string(to_string(idx)) + " not reported: " + e.what());
        } catch (const DataError& e) {
            warnings.push_back(std::string(to_string(idx)) + " not reported: " + e.what());
        }
    }
    return out;
}

ComparisonReport compare(const EuSeries& series, const CompareOptions& options, Exec exec) {
    ReportParts parts;
    parts.header = {options.alpha1, options.test.alpha2};
    parts.provenance = series.provenance();

    auto analysis = analyze(series, options.alpha1, options.histogram_bins);
    parts.plot_data.histograms = default_histogram_files();

    TestConfig config = options.test;
    config.test_id = options.test_id ? *options.test_id : analysis.recommended_tests.front();
    parts.test = run_test(series, config, exec);

    std::vector<std::string> notes;
    const auto indices = options.effect_indices.empty() ? default_effect_indices(analysis) : options.effect_indices;
    parts.effect_sizes = estimate_all(series.diffs(), indices, notes);

    if (options.power) {
        try {
            parts.power = retrospective_power(series, config, options.power_method, options.power_sizes,
                                              options.power_trials, options.power_inner_trials, exec);
            parts.plot_data.power_curve = kPowerCurveFile;
        } catch (const DegenerateError& e) {
            notes.push_back(std::string("power analysis skipped: ") + e.what());
        } catch (const DataError& e) {
            notes.push_back(std::string("power analysis skipped: ") + e.what());
        }
    }
    if (options.prospective) {
        parts.prospective = ProspectiveRecord{*options.prospective, prospective_sample_size(*options.prospective)};
    }
    parts.analysis = std::move(analysis);

    auto report = assemble(std::move(parts));
    report.warnings.insert(report.warnings.end(), notes.begin(), notes.end());
    return report;
}

}  // namespace sigcmp
