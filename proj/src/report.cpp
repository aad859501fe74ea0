#include "sigcmp/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "sigcmp/error.hpp"

namespace sigcmp {

namespace {

void check_alpha(double expected, double got, const std::string& what) {
    if (expected != got) {
        std::ostringstream msg;
        msg << "alpha mismatch: report header says " << expected << " but " << what << " uses " << got;
        throw ConfigError(msg.str());
    }
}

}  // namespace

std::vector<std::string> default_histogram_files() {
    return {"histogram_u.csv", "histogram_v.csv", "histogram_diff.csv"};
}

ComparisonReport assemble(ReportParts parts, bool allow_partial) {
    const auto& h = parts.header;
    if (!(h.alpha1 > 0.0 && h.alpha1 < 1.0) || !(h.alpha2 > 0.0 && h.alpha2 < 1.0)) {
        throw ConfigError("report significance levels must lie in (0, 1)");
    }
    if (!allow_partial && !parts.analysis) throw ConfigError("report needs a data analysis");
    if (!allow_partial && !parts.test) throw ConfigError("report needs a significance test result");

    if (parts.analysis) check_alpha(h.alpha1, parts.analysis->normality.alpha1, "the normality test");
    if (parts.test) check_alpha(h.alpha2, parts.test->config.alpha2, "the significance test");
    if (parts.power) check_alpha(h.alpha2, parts.power->test.alpha, "the power analysis");
    if (parts.prospective) check_alpha(h.alpha2, parts.prospective->spec.alpha, "the prospective power analysis");

    ComparisonReport r;
    r.header = h;
    r.provenance = std::move(parts.provenance);
    r.analysis = std::move(parts.analysis);
    r.test = std::move(parts.test);
    r.effect_sizes = std::move(parts.effect_sizes);
    r.power = std::move(parts.power);
    r.prospective = std::move(parts.prospective);
    r.plot_data = std::move(parts.plot_data);

    if (!r.analysis) r.warnings.emplace_back("incomplete report: data analysis not performed");
    if (!r.test) r.warnings.emplace_back("incomplete report: significance test not performed");
    if (r.effect_sizes.empty()) r.warnings.emplace_back("incomplete report: no effect size estimate");
    if (!r.power) r.warnings.emplace_back("incomplete report: power analysis not performed");
    if (r.analysis && r.test) {
        const auto& rec = r.analysis->recommended_tests;
        if (std::find(rec.begin(), rec.end(), r.test->config.test_id) == rec.end()) {
            r.warnings.push_back(std::string(to_string(r.test->config.test_id)) +
                                 " is not among the recommended tests for this data");
        }
    }
    return r;
}

json::Json to_json(const ComparisonReport& report) {
    using json::Json;
    Json j;
    j["schema_version"] = report.schema_version;
    Json header;
    header["alpha1"] = report.header.alpha1;
    header["alpha2"] = report.header.alpha2;
    j["header"] = std::move(header);
    j["provenance"] = json::encode(report.provenance);
    j["analysis"] = report.analysis ? json::encode(*report.analysis) : Json(nullptr);
    j["test"] = report.test ? json::encode(*report.test) : Json(nullptr);
    j["effect_sizes"] = Json::array();
    for (const auto& e : report.effect_sizes) j["effect_sizes"].push_back(json::encode(e));
    j["power"] = report.power ? json::encode(*report.power) : Json(nullptr);
    if (report.prospective) {
        Json p;
        p["spec"] = json::encode(report.prospective->spec);
        p["result"] = json::encode(report.prospective->result);
        j["prospective"] = std::move(p);
    } else {
        j["prospective"] = nullptr;
    }
    Json plots;
    plots["histograms"] = report.plot_data.histograms;
    plots["power_curve"] = report.plot_data.power_curve ? Json(*report.plot_data.power_curve) : Json(nullptr);
    plots["grid"] = report.plot_data.grid ? Json(*report.plot_data.grid) : Json(nullptr);
    j["plot_data"] = std::move(plots);
    j["warnings"] = report.warnings;
    return j;
}

namespace {

const json::Json& member(const json::Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw DataError(std::string("report is missing '") + key + "'");
    return j.at(key);
}

std::optional<std::string> optional_string(const json::Json& j) {
    if (j.is_null()) return std::nullopt;
    if (!j.is_string()) throw DataError("expected a string or null");
    return j.get<std::string>();
}

}  // namespace

ComparisonReport report_from_json(const json::Json& j) {
    ComparisonReport r;
    const auto& version = member(j, "schema_version");
    if (!version.is_string() || version.get<std::string>() != kReportSchemaVersion) {
        throw DataError("unsupported report schema version");
    }
    r.schema_version = version.get<std::string>();
    const auto& header = member(j, "header");
    const auto& a1 = member(header, "alpha1");
    const auto& a2 = member(header, "alpha2");
    if (!a1.is_number() || !a2.is_number()) throw DataError("report header alphas must be numbers");
    r.header = {a1.get<double>(), a2.get<double>()};
    json::decode(member(j, "provenance"), r.provenance);
    if (const auto& a = member(j, "analysis"); !a.is_null()) r.analysis = json::decode_as<AnalysisReport>(a);
    if (const auto& t = member(j, "test"); !t.is_null()) r.test = json::decode_as<TestResult>(t);
    for (const auto& e : member(j, "effect_sizes")) r.effect_sizes.push_back(json::decode_as<EffectSizeEstimate>(e));
    if (const auto& p = member(j, "power"); !p.is_null()) r.power = json::decode_as<PowerCurve>(p);
    if (const auto& p = member(j, "prospective"); !p.is_null()) {
        r.prospective = ProspectiveRecord{json::decode_as<ProspectiveSpec>(member(p, "spec")),
                                          json::decode_as<SampleSizeResult>(member(p, "result"))};
    }
    const auto& plots = member(j, "plot_data");
    try {
        r.plot_data.histograms = member(plots, "histograms").get<std::vector<std::string>>();
        r.warnings = member(j, "warnings").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception&) {
        throw DataError("report string lists are malformed");
    }
    r.plot_data.power_curve = optional_string(member(plots, "power_curve"));
    r.plot_data.grid = optional_string(member(plots, "grid"));
    return r;
}

namespace {

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

std::string pval(double p) {
    if (p < 1e-4) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2e", p);
        return buf;
    }
    return num(p);
}

}  // namespace

std::string render_markdown(const ComparisonReport& report) {
    std::ostringstream md;
    md << "# Paired system comparison\n\n";
    md << "Source: `" << report.provenance.source_name << "`, " << report.provenance.input_rows
       << " score rows, EU size m = " << report.provenance.eu.eu_size << " ("
       << to_string(report.provenance.eu.aggregator) << " aggregation";
    if (report.provenance.eu.shuffle_seed) md << ", shuffle seed " << *report.provenance.eu.shuffle_seed;
    md << ")";
    if (report.provenance.dropped_rows > 0) md << ", " << report.provenance.dropped_rows << " trailing rows dropped";
    md << ".\n\n";

    md << "| Item | Value |\n|---|---|\n";
    if (report.test) {
        const auto& c = report.test->config;
        md << "| significance test | " << to_string(c.test_id) << " (" << to_string(c.direction)
           << ", delta = " << num(c.delta);
        if (is_resampling(c.test_id)) md << ", B = " << c.trials << ", seed = " << c.seed;
        md << ") |\n";
    } else {
        md << "| significance test | not performed |\n";
    }
    md << "| significance level | alpha2 = " << num(report.header.alpha2)
       << " (normality alpha1 = " << num(report.header.alpha1) << ") |\n";
    md << "| effect size | ";
    if (report.effect_sizes.empty()) {
        md << "not reported";
    } else {
        for (std::size_t i = 0; i < report.effect_sizes.size(); ++i) {
            if (i) md << "; ";
            md << to_string(report.effect_sizes[i].index) << " = " << num(report.effect_sizes[i].value);
        }
    }
    md << " |\n";
    md << "| sample size | ";
    if (report.test) {
        md << "n = " << report.test->n << " EUs";
    } else if (report.analysis) {
        md << "n = " << report.analysis->stats_diff.count << " EUs";
    } else {
        md << "unknown";
    }
    md << " |\n";
    md << "| power | ";
    if (report.power) {
        const auto& pts = report.power->points;
        const std::size_t n = report.test ? report.test->n : 0;
        const auto at_n = std::find_if(pts.begin(), pts.end(), [&](const PowerPoint& p) { return p.sample_size == n; });
        if (at_n != pts.end()) {
            md << num(at_n->power) << " +/- " << num(at_n->mc_stderr) << " at n = " << n;
        } else {
            md << "see curve";
        }
        md << " (" << to_string(report.power->method) << ", " << report.power->trials << " trials)";
    } else {
        md << "not performed";
    }
    md << " |\n\n";

    if (report.test) {
        const auto& t = *report.test;
        md << "## Decision\n\n";
        md << t.statistic_name << " = " << num(t.statistic_value) << ", p = " << pval(t.p_value) << " ("
           << t.method << "). ";
        md << (t.reject_h0 ? "H0 rejected (p < α)." : "H0 not rejected (p ≥ α).") << "\n";
        if (t.confidence_interval) {
            md << "\n" << num(100.0 * (1.0 - t.config.alpha2)) << "% confidence interval: ["
               << num(t.confidence_interval->low) << ", " << num(t.confidence_interval->high) << "]\n";
        }
        md << "\n";
    }

    if (report.analysis) {
        const auto& a = *report.analysis;
        md << "## Data analysis\n\n";
        md << "| Sample | n | mean | median | std dev | min | max | skewness |\n|---|---|---|---|---|---|---|---|\n";
        const std::pair<const char*, const SummaryStats*> rows[] = {
            {"u", &a.stats_u}, {"v", &a.stats_v}, {"u-v", &a.stats_diff}};
        for (const auto& [name, s] : rows) {
            md << "| " << name << " | " << s->count << " | " << num(s->mean) << " | " << num(s->median) << " | "
               << num(s->std_dev) << " | " << num(s->min) << " | " << num(s->max) << " | " << num(s->skewness)
               << " |\n";
        }
        md << "\nSkewness " << num(a.skew.gamma) << ": " << to_string(a.skew.category) << ", use the "
           << to_string(a.skew.recommended_statistic) << ".\n";
        md << "Normality (Shapiro-Wilk): ";
        if (a.normality.performed) {
            md << "W = " << num(a.normality.w_statistic) << ", p = " << pval(a.normality.p_value) << ", "
               << to_string(a.normality.verdict) << ".\n";
        } else {
            md << "skipped.\n";
        }
        md << "Recommended tests:";
        for (std::size_t i = 0; i < a.recommended_tests.size(); ++i) {
            md << (i ? ", " : " ") << to_string(a.recommended_tests[i]);
        }
        md << ".\n\n";
    }

    if (report.power) {
        md << "## Power\n\n| n | power | stderr |\n|---|---|---|\n";
        for (const auto& p : report.power->points) {
            md << "| " << p.sample_size << " | " << num(p.power) << " | " << num(p.mc_stderr) << " |\n";
        }
        md << "\n";
    } else {
        md << "power analysis: not performed\n\n";
    }

    if (report.prospective) {
        const auto& p = *report.prospective;
        md << "## Prospective sample size\n\n";
        md << "Effect e = " << num(p.result.effect) << ", target power " << num(p.spec.target_power) << ", "
           << to_string(p.spec.direction) << ": closed form n = " << p.result.closed_form
           << ", noncentral-t refined n = " << p.result.refined << " (power " << num(p.result.achieved_power)
           << ").\n\n";
    }

    const bool any_plots =
        !report.plot_data.histograms.empty() || report.plot_data.power_curve || report.plot_data.grid;
    if (any_plots) {
        md << "## Plot data\n\n";
        for (const auto& f : report.plot_data.histograms) md << "- [" << f << "](" << f << ")\n";
        if (report.plot_data.power_curve) {
            md << "- [" << *report.plot_data.power_curve << "](" << *report.plot_data.power_curve << ")\n";
        }
        if (report.plot_data.grid) md << "- [" << *report.plot_data.grid << "](" << *report.plot_data.grid << ")\n";
        md << "\n";
    }

    std::vector<std::string> notes = report.warnings;
    if (report.analysis) notes.insert(notes.end(), report.analysis->warnings.begin(), report.analysis->warnings.end());
    if (!notes.empty()) {
        md << "## Warnings\n\n";
        for (const auto& w : notes) md << "- " << w << "\n";
    }
    return md.str();
}

}  // namespace sigcmp
