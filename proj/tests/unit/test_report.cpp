#include <gtest/gtest.h>

#include "sigcmp/error.hpp"
#include "sigcmp/json_io.hpp"
#include "sigcmp/pipeline.hpp"
#include "sigcmp/report.hpp"
#include "support.hpp"

using namespace sigcmp;

namespace {

EuSeries normal_series(std::size_t n, std::uint64_t seed, double shift) {
    return EuSeries::from_differences(support::normal_sample(n, seed, shift));
}

CompareOptions quick_options() {
    CompareOptions o;
    o.power_trials = 200;
    o.test.seed = 3;
    return o;
}

bool contains(const std::vector<std::string>& v, const std::string& needle) {
    for (const auto& s : v) {
        if (s.find(needle) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

TEST(Report, CompareProducesCompleteReport) {
    const auto r = compare(normal_series(60, 1, 0.5), quick_options());
    ASSERT_TRUE(r.analysis && r.test && r.power);
    EXPECT_FALSE(r.effect_sizes.empty());
    EXPECT_EQ(r.header.alpha1, 0.05);
    EXPECT_EQ(r.header.alpha2, r.test->config.alpha2);
    EXPECT_EQ(r.plot_data.histograms, default_histogram_files());
    EXPECT_EQ(r.plot_data.power_curve, std::string(kPowerCurveFile));
    EXPECT_FALSE(contains(r.warnings, "incomplete report"));
    EXPECT_EQ(r.power->seed, power_seed(3));
}

TEST(Report, JsonRoundTripIsByteIdentical) {
    auto o = quick_options();
    o.prospective = ProspectiveSpec{0.5, 1.0, 0.8, 0.05, Sidedness::two_sided};
    const auto r = compare(normal_series(40, 2, 0.3), o);
    const auto text = json::to_text(to_json(r));
    const auto back = report_from_json(json::Json::parse(text));
    EXPECT_EQ(json::to_text(to_json(back)), text);
    ASSERT_TRUE(back.prospective);
    EXPECT_EQ(back.prospective->result.refined, 34u);
}

TEST(Report, RejectsUnknownSchemaVersion) {
    auto j = to_json(compare(normal_series(30, 3, 0.0), quick_options()));
    j["schema_version"] = "9.9";
    EXPECT_THROW(report_from_json(j), DataError);
}

TEST(Report, AssembleRequiresCoreSections) {
    ReportParts parts;
    EXPECT_THROW(assemble(parts), ConfigError);
    const auto partial = assemble(parts, true);
    EXPECT_TRUE(contains(partial.warnings, "incomplete report"));
    EXPECT_TRUE(contains(partial.warnings, "no effect size"));
    parts.header.alpha2 = 1.0;
    EXPECT_THROW(assemble(parts, true), ConfigError);
}

TEST(Report, AssembleChecksAlphaConsistency) {
    const auto series = normal_series(40, 4, 0.2);
    ReportParts parts;
    parts.analysis = analyze(series, 0.05);
    TestConfig c;
    c.alpha2 = 0.01;
    parts.test = run_test(series, c);
    EXPECT_THROW(assemble(parts), ConfigError);
    parts.header.alpha2 = 0.01;
    EXPECT_NO_THROW(assemble(parts));
    parts.header.alpha1 = 0.1;
    EXPECT_THROW(assemble(parts), ConfigError);
}

TEST(Report, MissingPowerIsFlagged) {
    auto o = quick_options();
    o.power = false;
    const auto r = compare(normal_series(40, 5, 0.2), o);
    EXPECT_FALSE(r.power);
    EXPECT_TRUE(contains(r.warnings, "power"));
    EXPECT_NE(render_markdown(r).find("not performed"), std::string::npos);
}

TEST(Report, NonRecommendedTestWarns) {
    std::mt19937_64 eng(6);
    std::exponential_distribution<double> ex(1.0);
    std::vector<double> w(80);
    for (auto& x : w) x = ex(eng);
    auto o = quick_options();
    o.test_id = TestId::t_test;
    const auto r = compare(EuSeries::from_differences(w), o);
    EXPECT_TRUE(contains(r.warnings, "not among the recommended"));
}

TEST(Report, MarkdownStatesTheFiveItemsAndDecision) {
    const auto r = compare(normal_series(60, 7, 0.8), quick_options());
    const auto md = render_markdown(r);
    for (const char* item : {"significance test", "significance level", "effect size", "sample size", "power"}) {
        EXPECT_NE(md.find(item), std::string::npos) << item;
    }
    EXPECT_NE(md.find(r.test->reject_h0 ? "H0 rejected" : "H0 not rejected"), std::string::npos);
    EXPECT_NE(md.find("histogram_diff.csv"), std::string::npos);
}

TEST(Report, CompareIsDeterministicAcrossExecModes) {
    auto o = quick_options();
    o.test_id = TestId::bootstrap_t;
    o.test.trials = 500;
    const auto series = normal_series(50, 8, 0.1);
    const auto a = json::to_text(to_json(compare(series, o, Exec::serial)));
    const auto b = json::to_text(to_json(compare(series, o, Exec::parallel)));
    EXPECT_EQ(a, b);
}

TEST(Pipeline, Defaults) {
    EXPECT_EQ(default_power_sizes(10), (std::vector<std::size_t>{5, 10, 20}));
    EXPECT_EQ(default_power_sizes(1), (std::vector<std::size_t>{2}));
    AnalysisReport a;
    a.skew.recommended_statistic = CentralStatistic::median;
    EXPECT_EQ(default_effect_indices(a), (std::vector<EffectIndex>{EffectIndex::wilcoxon_r, EffectIndex::hodges_lehmann}));
    std::vector<std::string> warnings;
    const auto e = estimate_all(std::vector<double>{1, 2}, {EffectIndex::cohens_d, EffectIndex::hedges_g}, warnings);
    EXPECT_EQ(e.size(), 1u);
    EXPECT_EQ(warnings.size(), 1u);
}

TEST(JsonIo, StrictRequestMerging) {
    TestConfig c;
    json::merge_test_config(json::Json::parse(R"({"test_id":"sign_test","alpha2":0.01})"), c);
    EXPECT_EQ(c.test_id, TestId::sign_test);
    EXPECT_EQ(c.alpha2, 0.01);
    EXPECT_THROW(json::merge_test_config(json::Json::parse(R"({"alpah2":0.01})"), c), ConfigError);
    EXPECT_THROW(json::merge_test_config(json::Json::parse(R"({"trials":"many"})"), c), ConfigError);
    EuConfig eu;
    json::merge_eu_config(json::Json::parse(R"({"eu_size":5,"aggregator":"median"})"), eu);
    EXPECT_EQ(eu.eu_size, 5u);
    EXPECT_EQ(eu.aggregator, Aggregator::median);
}

TEST(JsonIo, InfiniteBoundsBecomeNull) {
    const auto w = support::normal_sample(20, 9, 0.3);
    TestConfig c;
    c.direction = Direction::right;
    const auto r = run_test(w, c);
    const auto j = json::encode(r);
    EXPECT_TRUE(j["confidence_interval"]["high"].is_null());
    const auto back = json::decode_as<TestResult>(j);
    EXPECT_TRUE(std::isinf(back.confidence_interval->high));
    EXPECT_EQ(json::encode(back).dump(), j.dump());
}

TEST(JsonIo, HistogramCsv) {
    HistogramData h;
    h.bin_edges = {0, 1, 2};
    h.counts = {3, 4};
    EXPECT_EQ(json::histogram_to_csv(h), "bin_start,bin_end,count\n0,1,3\n1,2,4\n");
}
