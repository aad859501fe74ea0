#include "sigcmp/json_io.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "sigcmp/error.hpp"
#include "sigcmp/text.hpp"

namespace sigcmp::json {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

const Json& field(const Json& j, const char* key) {
    if (!j.is_object()) throw DataError(std::string("expected a JSON object holding '") + key + "'");
    const auto it = j.find(key);
    if (it == j.end()) throw DataError(std::string("missing field '") + key + "'");
    return *it;
}

template <typename T>
T get(const Json& j, const char* key) {
    const Json& v = field(j, key);
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw DataError(std::string("field '") + key + "' has the wrong type");
    }
}

double get_double(const Json& j, const char* key, double if_null) {
    const Json& v = field(j, key);
    if (v.is_null()) return if_null;
    if (!v.is_number()) throw DataError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

SkewCategory parse_skew_category(std::string_view s) {
    if (s == "roughly_symmetric") return SkewCategory::roughly_symmetric;
    if (s == "slightly_skewed") return SkewCategory::slightly_skewed;
    if (s == "highly_skewed") return SkewCategory::highly_skewed;
    throw DataError("unknown skew class '" + std::string(s) + "'");
}

CentralStatistic parse_central(std::string_view s) {
    if (s == "mean") return CentralStatistic::mean;
    if (s == "median") return CentralStatistic::median;
    throw DataError("unknown central statistic '" + std::string(s) + "'");
}

NormalityVerdict parse_verdict(std::string_view s) {
    if (s == "normal") return NormalityVerdict::normal;
    if (s == "not_normal") return NormalityVerdict::not_normal;
    if (s == "skipped") return NormalityVerdict::skipped;
    throw DataError("unknown normality verdict '" + std::string(s) + "'");
}

// Enum parsers raise ConfigError; inside a stored document that is a data problem.
template <typename F>
auto as_data(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError& e) {
        throw DataError(e.what());
    }
}

}  // namespace

Json encode(const SummaryStats& s) {
    Json j;
    j["count"] = s.count;
    j["mean"] = s.mean;
    j["median"] = s.median;
    j["std_dev"] = s.std_dev;
    j["min"] = s.min;
    j["max"] = s.max;
    j["skewness"] = s.skewness;
    j["degenerate"] = s.degenerate;
    return j;
}

void decode(const Json& j, SummaryStats& out) {
    out.count = get<std::size_t>(j, "count");
    out.mean = get<double>(j, "mean");
    out.median = get<double>(j, "median");
    out.std_dev = get<double>(j, "std_dev");
    out.min = get<double>(j, "min");
    out.max = get<double>(j, "max");
    out.skewness = get<double>(j, "skewness");
    out.degenerate = get<bool>(j, "degenerate");
}

Json encode(const HistogramData& h) {
    Json j;
    j["label"] = h.label;
    j["bin_edges"] = h.bin_edges;
    j["counts"] = h.counts;
    return j;
}

void decode(const Json& j, HistogramData& out) {
    out.label = get<std::string>(j, "label");
    out.bin_edges = get<std::vector<double>>(j, "bin_edges");
    out.counts = get<std::vector<std::size_t>>(j, "counts");
    if (out.bin_edges.size() != out.counts.size() + 1) throw DataError("histogram needs one more edge than counts");
}

Json encode(const SkewClass& s) {
    Json j;
    j["gamma"] = s.gamma;
    j["class"] = to_string(s.category);
    j["recommended_statistic"] = to_string(s.recommended_statistic);
    j["degenerate"] = s.degenerate;
    return j;
}

void decode(const Json& j, SkewClass& out) {
    out.gamma = get<double>(j, "gamma");
    out.category = parse_skew_category(get<std::string>(j, "class"));
    out.recommended_statistic = parse_central(get<std::string>(j, "recommended_statistic"));
    out.degenerate = get<bool>(j, "degenerate");
}

Json encode(const NormalityResult& r) {
    Json j;
    j["test"] = "shapiro_wilk";
    j["performed"] = r.performed;
    j["w_statistic"] = r.performed ? Json(r.w_statistic) : Json(nullptr);
    j["p_value"] = r.performed ? Json(r.p_value) : Json(nullptr);
    j["alpha1"] = r.alpha1;
    j["verdict"] = to_string(r.verdict);
    return j;
}

void decode(const Json& j, NormalityResult& out) {
    out.performed = get<bool>(j, "performed");
    out.w_statistic = get_double(j, "w_statistic", 0.0);
    out.p_value = get_double(j, "p_value", 0.0);
    out.alpha1 = get<double>(j, "alpha1");
    out.verdict = parse_verdict(get<std::string>(j, "verdict"));
}

Json encode(const AnalysisReport& r) {
    Json j;
    j["stats_u"] = encode(r.stats_u);
    j["stats_v"] = encode(r.stats_v);
    j["stats_diff"] = encode(r.stats_diff);
    j["histograms"] = Json::array();
    for (const auto& h : r.histograms) j["histograms"].push_back(encode(h));
    j["skew"] = encode(r.skew);
    j["normality"] = encode(r.normality);
    j["recommended_tests"] = Json::array();
    for (TestId t : r.recommended_tests) j["recommended_tests"].push_back(to_string(t));
    j["warnings"] = r.warnings;
    return j;
}

void decode(const Json& j, AnalysisReport& out) {
    decode(field(j, "stats_u"), out.stats_u);
    decode(field(j, "stats_v"), out.stats_v);
    decode(field(j, "stats_diff"), out.stats_diff);
    out.histograms.clear();
    for (const auto& h : field(j, "histograms")) out.histograms.push_back(decode_as<HistogramData>(h));
    decode(field(j, "skew"), out.skew);
    decode(field(j, "normality"), out.normality);
    out.recommended_tests.clear();
    for (const auto& t : field(j, "recommended_tests")) {
        if (!t.is_string()) throw DataError("recommended_tests must hold strings");
        out.recommended_tests.push_back(as_data([&] { return parse_test_id(t.get<std::string>()); }));
    }
    out.warnings = get<std::vector<std::string>>(j, "warnings");
}

Json encode(const EuConfig& c) {
    Json j;
    j["eu_size"] = c.eu_size;
    j["aggregator"] = to_string(c.aggregator);
    j["shuffle_seed"] = c.shuffle_seed ? Json(*c.shuffle_seed) : Json(nullptr);
    return j;
}

void decode(const Json& j, EuConfig& out) {
    out.eu_size = get<std::size_t>(j, "eu_size");
    out.aggregator = as_data([&] { return parse_aggregator(get<std::string>(j, "aggregator")); });
    const Json& seed = field(j, "shuffle_seed");
    out.shuffle_seed.reset();
    if (!seed.is_null()) out.shuffle_seed = get<std::uint64_t>(j, "shuffle_seed");
}

Json encode(const Provenance& p) {
    Json j;
    j["source"] = p.source_name;
    j["input_rows"] = p.input_rows;
    j["dropped_rows"] = p.dropped_rows;
    j["header_skipped"] = p.header_skipped;
    j["comment_lines_skipped"] = p.comment_lines_skipped;
    j["blank_lines_skipped"] = p.blank_lines_skipped;
    j["eu"] = encode(p.eu);
    return j;
}

void decode(const Json& j, Provenance& out) {
    out.source_name = get<std::string>(j, "source");
    out.input_rows = get<std::size_t>(j, "input_rows");
    out.dropped_rows = get<std::size_t>(j, "dropped_rows");
    out.header_skipped = get<bool>(j, "header_skipped");
    out.comment_lines_skipped = get<std::size_t>(j, "comment_lines_skipped");
    out.blank_lines_skipped = get<std::size_t>(j, "blank_lines_skipped");
    decode(field(j, "eu"), out.eu);
}

Json encode(const TestConfig& c) {
    Json j;
    j["test_id"] = to_string(c.test_id);
    j["direction"] = to_string(c.direction);
    j["delta"] = c.delta;
    j["alpha2"] = c.alpha2;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    return j;
}

void decode(const Json& j, TestConfig& out) {
    out.test_id = as_data([&] { return parse_test_id(get<std::string>(j, "test_id")); });
    out.direction = as_data([&] { return parse_direction(get<std::string>(j, "direction")); });
    out.delta = get<double>(j, "delta");
    out.alpha2 = get<double>(j, "alpha2");
    out.trials = get<std::uint64_t>(j, "trials");
    out.seed = get<std::uint64_t>(j, "seed");
}

Json encode(const TestResult& r) {
    Json j;
    j["config"] = encode(r.config);
    j["statistic_name"] = r.statistic_name;
    j["statistic_value"] = r.statistic_value;
    j["p_value"] = r.p_value;
    j["reject_h0"] = r.reject_h0;
    if (r.confidence_interval) {
        Json ci;
        ci["level"] = 1.0 - r.config.alpha2;
        ci["low"] = finite_or_null(r.confidence_interval->low);
        ci["high"] = finite_or_null(r.confidence_interval->high);
        j["confidence_interval"] = std::move(ci);
    } else {
        j["confidence_interval"] = nullptr;
    }
    j["n"] = r.n;
    j["n_used"] = r.n_used;
    j["method"] = r.method;
    return j;
}

void decode(const Json& j, TestResult& out) {
    decode(field(j, "config"), out.config);
    out.statistic_name = get<std::string>(j, "statistic_name");
    out.statistic_value = get<double>(j, "statistic_value");
    out.p_value = get<double>(j, "p_value");
    out.reject_h0 = get<bool>(j, "reject_h0");
    const Json& ci = field(j, "confidence_interval");
    out.confidence_interval.reset();
    if (!ci.is_null()) out.confidence_interval = Interval{get_double(ci, "low", -kInf), get_double(ci, "high", kInf)};
    out.n = get<std::size_t>(j, "n");
    out.n_used = get<std::size_t>(j, "n_used");
    out.method = get<std::string>(j, "method");
}

Json encode(const EffectSizeEstimate& e) {
    Json j;
    j["index"] = to_string(e.index);
    j["value"] = e.value;
    j["n"] = e.n;
    j["standardized"] = e.standardized;
    return j;
}

void decode(const Json& j, EffectSizeEstimate& out) {
    out.index = as_data([&] { return parse_effect_index(get<std::string>(j, "index")); });
    out.value = get<double>(j, "value");
    out.n = get<std::size_t>(j, "n");
    out.standardized = get<bool>(j, "standardized");
}

Json encode(const PowerCurve& c) {
    Json j;
    j["method"] = to_string(c.method);
    j["test_id"] = to_string(c.test.test_id);
    j["alpha"] = c.test.alpha;
    j["direction"] = to_string(c.test.direction);
    j["delta"] = c.test.delta;
    j["trials"] = c.trials;
    j["inner_trials"] = c.test.inner_trials;
    j["seed"] = c.seed;
    j["points"] = Json::array();
    for (const auto& p : c.points) {
        Json pj;
        pj["sample_size"] = p.sample_size;
        pj["power"] = p.power;
        pj["mc_stderr"] = p.mc_stderr;
        j["points"].push_back(std::move(pj));
    }
    return j;
}

void decode(const Json& j, PowerCurve& out) {
    out.method = as_data([&] { return parse_power_method(get<std::string>(j, "method")); });
    out.test.test_id = as_data([&] { return parse_test_id(get<std::string>(j, "test_id")); });
    out.test.alpha = get<double>(j, "alpha");
    out.test.direction = as_data([&] { return parse_direction(get<std::string>(j, "direction")); });
    out.test.delta = get<double>(j, "delta");
    out.trials = get<std::uint64_t>(j, "trials");
    out.test.inner_trials = get<std::uint64_t>(j, "inner_trials");
    out.seed = get<std::uint64_t>(j, "seed");
    out.points.clear();
    for (const auto& pj : field(j, "points")) {
        out.points.push_back(
            {get<std::size_t>(pj, "sample_size"), get<double>(pj, "power"), get<double>(pj, "mc_stderr")});
    }
}

Json encode(const ProspectiveSpec& s) {
    Json j;
    j["expected_mean_diff"] = s.expected_mean_diff;
    j["expected_std_dev"] = s.expected_std_dev;
    j["target_power"] = s.target_power;
    j["alpha"] = s.alpha;
    j["direction"] = to_string(s.direction);
    return j;
}

void decode(const Json& j, ProspectiveSpec& out) {
    out.expected_mean_diff = get<double>(j, "expected_mean_diff");
    out.expected_std_dev = get<double>(j, "expected_std_dev");
    out.target_power = get<double>(j, "target_power");
    out.alpha = get<double>(j, "alpha");
    out.direction = as_data([&] { return parse_sidedness(get<std::string>(j, "direction")); });
}

Json encode(const SampleSizeResult& r) {
    Json j;
    j["effect"] = r.effect;
    j["closed_form"] = r.closed_form;
    j["refined"] = r.refined;
    j["achieved_power"] = r.achieved_power;
    return j;
}

void decode(const Json& j, SampleSizeResult& out) {
    out.effect = get<double>(j, "effect");
    out.closed_form = get<std::uint64_t>(j, "closed_form");
    out.refined = get<std::uint64_t>(j, "refined");
    out.achieved_power = get<double>(j, "achieved_power");
}

Json encode(const SweepTable& t) {
    Json j;
    Json gen;
    if (const auto* np = std::get_if<NormalPair>(&t.generator)) {
        gen["family"] = "normal";
        gen["mu1"] = np->mu1;
        gen["sigma1"] = np->sigma1;
        gen["mu2"] = np->mu2;
        gen["sigma2"] = np->sigma2;
    } else {
        const auto& bp = std::get<BetaPair>(t.generator);
        gen["family"] = "beta";
        gen["a1"] = bp.a1;
        gen["b1"] = bp.b1;
        gen["a2"] = bp.a2;
        gen["b2"] = bp.b2;
    }
    j["generator"] = std::move(gen);
    j["test_id"] = to_string(t.test_id);
    j["iterations"] = t.iterations;
    j["seed"] = t.seed;
    j["rows"] = Json::array();
    for (const auto& r : t.rows) {
        Json rj;
        rj["n"] = r.n;
        rj["p_min"] = r.p_min;
        rj["p_mean"] = r.p_mean;
        rj["p_max"] = r.p_max;
        rj["p_values"] = r.p_values;
        j["rows"].push_back(std::move(rj));
    }
    return j;
}

Json encode(const GridResult& g) {
    Json j;
    j["systems"] = g.systems;
    j["comparisons"] = g.comparisons;
    j["alpha2"] = g.alpha2;
    j["correction"] = "bonferroni";
    j["cells"] = Json::array();
    for (const auto& c : g.cells) {
        Json cj;
        cj["row"] = g.systems[c.row];
        cj["col"] = g.systems[c.col];
        cj["result"] = encode(c.result);
        cj["adjusted_p"] = c.adjusted_p;
        cj["significant"] = c.significant;
        j["cells"].push_back(std::move(cj));
    }
    j["adjusted_p"] = g.adjusted_p;
    j["significant"] = Json::array();
    for (const auto& row : g.significant) {
        Json r = Json::array();
        for (bool b : row) r.push_back(b);
        j["significant"].push_back(std::move(r));
    }
    return j;
}

namespace {

template <typename F>
void merge_field(const Json& j, const char* key, F&& apply) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    try {
        apply(*it);
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("field '") + key + "' has the wrong type");
    }
}

void reject_unknown(const Json& j, std::initializer_list<std::string_view> known) {
    if (!j.is_object()) throw ConfigError("request body must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (auto k : known) ok = ok || k == key;
        if (!ok) throw ConfigError("unknown field '" + key + "'");
    }
}

template <typename T>
T strict(const Json& v) {
    if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError("expected a number");
    } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_unsigned()) throw ConfigError("expected a non-negative integer");
    } else {
        if (!v.is_string()) throw ConfigError("expected a string");
    }
    return v.get<T>();
}

}  // namespace

void merge_eu_config(const Json& j, EuConfig& out) {
    reject_unknown(j, {"eu_size", "aggregator", "shuffle_seed"});
    merge_field(j, "eu_size", [&](const Json& v) { out.eu_size = strict<std::size_t>(v); });
    merge_field(j, "aggregator", [&](const Json& v) { out.aggregator = parse_aggregator(strict<std::string>(v)); });
    merge_field(j, "shuffle_seed", [&](const Json& v) {
        if (v.is_null()) {
            out.shuffle_seed.reset();
        } else {
            out.shuffle_seed = strict<std::uint64_t>(v);
        }
    });
}

void merge_test_config(const Json& j, TestConfig& out) {
    reject_unknown(j, {"test_id", "direction", "delta", "alpha2", "trials", "seed"});
    merge_field(j, "test_id", [&](const Json& v) { out.test_id = parse_test_id(strict<std::string>(v)); });
    merge_field(j, "direction", [&](const Json& v) { out.direction = parse_direction(strict<std::string>(v)); });
    merge_field(j, "delta", [&](const Json& v) { out.delta = strict<double>(v); });
    merge_field(j, "alpha2", [&](const Json& v) { out.alpha2 = strict<double>(v); });
    merge_field(j, "trials", [&](const Json& v) { out.trials = strict<std::uint64_t>(v); });
    merge_field(j, "seed", [&](const Json& v) { out.seed = strict<std::uint64_t>(v); });
}

std::string histogram_to_csv(const HistogramData& h) {
    std::ostringstream out;
    out << "bin_start,bin_end,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        out << format_double(h.bin_edges[i]) << ',' << format_double(h.bin_edges[i + 1]) << ',' << h.counts[i]
            << '\n';
    }
    return out.str();
}

std::string to_text(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace sigcmp::json
