#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sigcmp/analysis.hpp"
#include "sigcmp/effect_size.hpp"
#include "sigcmp/ingest.hpp"
#include "sigcmp/json_io.hpp"
#include "sigcmp/power.hpp"
#include "sigcmp/significance.hpp"

namespace sigcmp {

inline constexpr const char* kReportSchemaVersion = "1.0";

/// Significance levels the whole report is stated at.
struct ReportHeader {
    double alpha1 = 0.05;  // normality test
    double alpha2 = 0.05;  // significance test
};

struct ProspectiveRecord {
    ProspectiveSpec spec;
    SampleSizeResult result;
};

/// Relative paths of the CSV sidecars written next to the report.
struct PlotData {
    std::vector<std::string> histograms;
    std::optional<std::string> power_curve;
    std::optional<std::string> grid;
};

struct ReportParts {
    ReportHeader header;
    Provenance provenance;
    std::optional<AnalysisReport> analysis;
    std::optional<TestResult> test;
    std::vector<EffectSizeEstimate> effect_sizes;
    std::optional<PowerCurve> power;
    std::optional<ProspectiveRecord> prospective;
    PlotData plot_data;
};

struct ComparisonReport {
    std::string schema_version = kReportSchemaVersion;
    ReportHeader header;
    Provenance provenance;
    std::optional<AnalysisReport> analysis;
    std::optional<TestResult> test;
    std::vector<EffectSizeEstimate> effect_sizes;
    std::optional<PowerCurve> power;
    std::optional<ProspectiveRecord> prospective;
    PlotData plot_data;
    std::vector<std::string> warnings;  // completeness and advisory notes
};

/// Checks the parts against the header and records a warning for every missing
/// optional section. Analysis and test are required unless `allow_partial`.
/// Throws ConfigError when any alpha disagrees with the header.
ComparisonReport assemble(ReportParts parts, bool allow_partial = false);

/// Default sidecar names: histogram_u.csv, histogram_v.csv, histogram_diff.csv.
std::vector<std::string> default_histogram_files();
inline constexpr const char* kPowerCurveFile = "power_curve.csv";

json::Json to_json(const ComparisonReport& report);
ComparisonReport report_from_json(const json::Json& j);

/// Human-readable summary. Uses only what to_json() would emit.
std::string render_markdown(const ComparisonReport& report);

}  // namespace sigcmp
