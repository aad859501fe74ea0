#pragma once

// Canonical JSON encoding of every public result type. Field order is fixed, so
// encode(decode(j)).dump() == j.dump() for any document encode() produced.
// Absent optionals and infinite interval bounds are written as null.

#include <json.hpp>

#include "sigcmp/analysis.hpp"
#include "sigcmp/effect_size.hpp"
#include "sigcmp/ingest.hpp"
#include "sigcmp/power.hpp"
#include "sigcmp/significance.hpp"

namespace sigcmp::json {

using Json = nlohmann::ordered_json;

Json encode(const SummaryStats& s);
Json encode(const HistogramData& h);
Json encode(const SkewClass& s);
Json encode(const NormalityResult& r);
Json encode(const AnalysisReport& r);
Json encode(const EuConfig& c);
Json encode(const Provenance& p);
Json encode(const TestConfig& c);
Json encode(const TestResult& r);
Json encode(const EffectSizeEstimate& e);
Json encode(const PowerCurve& c);
Json encode(const ProspectiveSpec& s);
Json encode(const SampleSizeResult& r);
Json encode(const SweepTable& t);
Json encode(const GridResult& g);

void decode(const Json& j, SummaryStats& out);
void decode(const Json& j, HistogramData& out);
void decode(const Json& j, SkewClass& out);
void decode(const Json& j, NormalityResult& out);
void decode(const Json& j, AnalysisReport& out);
void decode(const Json& j, EuConfig& out);
void decode(const Json& j, Provenance& out);
void decode(const Json& j, TestConfig& out);
void decode(const Json& j, TestResult& out);
void decode(const Json& j, EffectSizeEstimate& out);
void decode(const Json& j, PowerCurve& out);
void decode(const Json& j, ProspectiveSpec& out);
void decode(const Json& j, SampleSizeResult& out);

template <typename T>
T decode_as(const Json& j) {
    T out{};
    decode(j, out);
    return out;
}

/// Request-body helpers: missing keys keep the defaults already in `out`.
/// Unknown keys and wrong types raise ConfigError.
void merge_eu_config(const Json& j, EuConfig& out);
void merge_test_config(const Json& j, TestConfig& out);

/// bin_start,bin_end,count
std::string histogram_to_csv(const HistogramData& h);

/// dump() with two-space indentation and a trailing newline.
std::string to_text(const Json& j);

}  // namespace sigcmp::json
