#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sigcmp {

enum class InputFormat { csv, tsv };
enum class Aggregator { mean, median };

struct ScorePair {
    double a = 0;
    double b = 0;
    friend bool operator==(const ScorePair&, const ScorePair&) = default;
};

/// Per-instance score pairs exactly as read from a file, in file order.
struct PairedScores {
    std::vector<ScorePair> rows;
    std::string source_name;
    bool header_skipped = false;
    std::size_t comment_lines_skipped = 0;
    std::size_t blank_lines_skipped = 0;
};

struct EuConfig {
    std::size_t eu_size = 1;
    Aggregator aggregator = Aggregator::mean;
    std::optional<std::uint64_t> shuffle_seed;
};

/// Where an EuSeries came from. Serialized into every downstream report.
struct Provenance {
    std::string source_name;
    EuConfig eu;
    std::size_t input_rows = 0;
    std::size_t dropped_rows = 0;  // trailing N mod m rows that did not fill an EU
    bool header_skipped = false;
    std::size_t comment_lines_skipped = 0;
    std::size_t blank_lines_skipped = 0;
};

struct EuPair {
    double u = 0;
    double v = 0;
    friend bool operator==(const EuPair&, const EuPair&) = default;
};

/// Per-EU pairs (u_i, v_i) with their differences w_i = u_i - v_i: the sample every
/// test, effect size and power estimate runs on.
class EuSeries {
public:
    EuSeries() = default;
    EuSeries(std::vector<EuPair> pairs, Provenance provenance);

    /// Builds a series straight from differences (u = w, v = 0). Used by the
    /// simulators, which never see per-system scores.
    static EuSeries from_differences(std::vector<double> diffs, std::string source_name = "differences");

    std::span<const EuPair> pairs() const noexcept { return pairs_; }
    std::span<const double> diffs() const noexcept { return diffs_; }
    std::vector<double> u_values() const;
    std::vector<double> v_values() const;
    std::size_t n() const noexcept { return pairs_.size(); }
    const Provenance& provenance() const noexcept { return provenance_; }

    friend bool operator==(const EuSeries& x, const EuSeries& y) {
        return x.pairs_ == y.pairs_;
    }

private:
    std::vector<EuPair> pairs_;
    std::vector<double> diffs_;
    Provenance provenance_;
};

PairedScores parse_scores(std::string_view text, InputFormat format, bool has_header,
                          std::string source_name = "");
PairedScores parse_scores(std::istream& in, InputFormat format, bool has_header,
                          std::string source_name = "");

/// Scores of several systems on the same instances, one column per system.
struct ScoreTable {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::string source_name;
};

/// Multi-column variant of parse_scores. A first line that does not parse as
/// numbers is taken as the system names; otherwise names are system1..systemK.
ScoreTable parse_score_table(std::string_view text, InputFormat format, std::string source_name = "");

/// True when the first data line (after blanks and comments) has a field that is
/// not a number, i.e. it reads as a column header.
bool detect_header(std::string_view text, InputFormat format);

/// Groups rows into floor(N/m) consecutive EUs of size m (after an optional seeded
/// Fisher-Yates shuffle) and aggregates each column by mean or median.
EuSeries aggregate_to_eus(const PairedScores& scores, const EuConfig& config);

/// Mean or median of a non-empty sample.
double aggregate(std::span<const double> values, Aggregator aggregator);

std::string_view to_string(Aggregator a) noexcept;
std::string_view to_string(InputFormat f) noexcept;
Aggregator parse_aggregator(std::string_view s);
InputFormat parse_format(std::string_view s);

}  // namespace sigcmp
