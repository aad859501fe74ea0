#include "sigcmp/ingest.hpp"

#include <algorithm>
#include <boost/random/uniform_int_distribution.hpp>
#include <charconv>
#include <cmath>
#include <iterator>
#include <sstream>

#include "sigcmp/error.hpp"
#include "sigcmp/moments.hpp"
#include "sigcmp/rng.hpp"

namespace sigcmp {

EuSeries::EuSeries(std::vector<EuPair> pairs, Provenance provenance)
    : pairs_(std::move(pairs)), provenance_(std::move(provenance)) {
    diffs_.reserve(pairs_.size());
    for (const auto& p : pairs_) diffs_.push_back(p.u - p.v);
}

EuSeries EuSeries::from_differences(std::vector<double> diffs, std::string source_name) {
    std::vector<EuPair> pairs;
    pairs.reserve(diffs.size());
    for (double w : diffs) {
        if (!std::isfinite(w)) throw DataError("non-finite difference");
        pairs.push_back({w, 0.0});
    }
    Provenance prov;
    prov.source_name = std::move(source_name);
    prov.input_rows = pairs.size();
    return EuSeries(std::move(pairs), std::move(prov));
}

std::vector<double> EuSeries::u_values() const {
    std::vector<double> out;
    out.reserve(pairs_.size());
    for (const auto& p : pairs_) out.push_back(p.u);
    return out;
}

std::vector<double> EuSeries::v_values() const {
    std::vector<double> out;
    out.reserve(pairs_.size());
    for (const auto& p : pairs_) out.push_back(p.v);
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

double parse_field(std::string_view field, std::size_t line, std::size_t index) {
    field = trim(field);
    if (field.empty()) throw ParseError(line, index, "empty field");
    if (field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec == std::errc::result_out_of_range) {
        throw ParseError(line, index, "value out of range: '" + std::string(field) + "'");
    }
    if (ec != std::errc{} || ptr != last) {
        throw ParseError(line, index, "not a number: '" + std::string(field) + "'");
    }
    if (!std::isfinite(value)) {
        throw ParseError(line, index, "non-finite value: '" + std::string(field) + "'");
    }
    return value;
}

}  // namespace

PairedScores parse_scores(std::string_view text, InputFormat format, bool has_header,
                          std::string source_name) {
    const char sep = format == InputFormat::csv ? ',' : '\t';
    PairedScores out;
    out.source_name = std::move(source_name);

    // UTF-8 byte order mark.
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

    bool header_pending = has_header;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        const auto content = trim(line);
        if (content.empty()) {
            ++out.blank_lines_skipped;
            continue;
        }
        if (content.front() == '#') {
            ++out.comment_lines_skipped;
            continue;
        }
        if (header_pending) {
            header_pending = false;
            out.header_skipped = true;
            continue;
        }

        const auto cut = line.find(sep);
        if (cut == std::string_view::npos) {
            throw ParseError(line_no, 0, "expected two fields separated by '" +
                                             std::string(sep == '\t' ? "\\t" : ",") + "'");
        }
        const auto second = line.substr(cut + 1);
        if (second.find(sep) != std::string_view::npos) {
            throw ParseError(line_no, 0, "expected exactly two fields");
        }
        const double a = parse_field(line.substr(0, cut), line_no, 1);
        const double b = parse_field(second, line_no, 2);
        out.rows.push_back({a, b});
    }
    if (out.rows.empty()) throw DataError("empty input: no data rows");
    return out;
}

bool detect_header(std::string_view text, InputFormat format) {
    const char sep = format == InputFormat::csv ? ',' : '\t';
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const auto content = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (content.empty() || content.front() == '#') continue;
        std::size_t start = 0;
        while (true) {
            const auto cut = content.find(sep, start);
            try {
                parse_field(content.substr(start, cut == std::string_view::npos ? cut : cut - start), 1, 1);
            } catch (const ParseError&) {
                return true;
            }
            if (cut == std::string_view::npos) return false;
            start = cut + 1;
        }
    }
    return false;
}

ScoreTable parse_score_table(std::string_view text, InputFormat format, std::string source_name) {
    const char sep = format == InputFormat::csv ? ',' : '\t';
    const bool has_header = detect_header(text, format);
    ScoreTable out;
    out.source_name = std::move(source_name);
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

    const auto split = [&](std::string_view line) {
        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            const auto cut = line.find(sep, start);
            fields.push_back(line.substr(start, cut == std::string_view::npos ? cut : cut - start));
            if (cut == std::string_view::npos) return fields;
            start = cut + 1;
        }
    };

    bool header_pending = has_header;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        const auto content = trim(line);
        if (content.empty() || content.front() == '#') continue;
        const auto fields = split(line);
        if (header_pending) {
            header_pending = false;
            for (auto f : fields) out.names.emplace_back(trim(f));
            out.columns.resize(fields.size());
            continue;
        }
        if (out.columns.empty()) {
            out.columns.resize(fields.size());
            for (std::size_t k = 0; k < fields.size(); ++k) out.names.push_back("system" + std::to_string(k + 1));
        }
        if (fields.size() != out.columns.size()) {
            throw ParseError(line_no, 0, "expected " + std::to_string(out.columns.size()) + " fields, found " +
                                             std::to_string(fields.size()));
        }
        for (std::size_t k = 0; k < fields.size(); ++k) out.columns[k].push_back(parse_field(fields[k], line_no, k + 1));
    }
    if (out.columns.empty() || out.columns.front().empty()) throw DataError("empty input: no data rows");
    if (out.columns.size() < 2) throw DataError("a score table needs at least two system columns");
    return out;
}

PairedScores parse_scores(std::istream& in, InputFormat format, bool has_header,
                          std::string source_name) {
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (in.bad()) throw DataError("failed to read input stream");
    return parse_scores(std::string_view(text), format, has_header, std::move(source_name));
}

double aggregate(std::span<const double> values, Aggregator aggregator) {
    return aggregator == Aggregator::mean ? mean(values) : median(values);
}

EuSeries aggregate_to_eus(const PairedScores& scores, const EuConfig& config) {
    if (config.eu_size < 1) throw ConfigError("EU size must be at least 1");
    const std::size_t m = config.eu_size;
    const std::size_t total = scores.rows.size();
    if (total < m) {
        throw DataError("fewer rows (" + std::to_string(total) + ") than the EU size (" +
                        std::to_string(m) + ")");
    }

    std::vector<ScorePair> rows = scores.rows;
    if (config.shuffle_seed) {
        auto engine = rng::make_engine(*config.shuffle_seed, {0});
        for (std::size_t i = rows.size(); i > 1; --i) {
            boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
            std::swap(rows[i - 1], rows[pick(engine)]);
        }
    }

    const std::size_t groups = total / m;
    if (groups < 2) {
        throw DataError("aggregation yields " + std::to_string(groups) +
                        " EU(s); at least 2 are needed for inference");
    }

    std::vector<EuPair> pairs;
    pairs.reserve(groups);
    std::vector<double> a(m), b(m);
    for (std::size_t g = 0; g < groups; ++g) {
        for (std::size_t k = 0; k < m; ++k) {
            a[k] = rows[g * m + k].a;
            b[k] = rows[g * m + k].b;
        }
        pairs.push_back({aggregate(a, config.aggregator), aggregate(b, config.aggregator)});
    }

    Provenance prov;
    prov.source_name = scores.source_name;
    prov.eu = config;
    prov.input_rows = total;
    prov.dropped_rows = total - groups * m;
    prov.header_skipped = scores.header_skipped;
    prov.comment_lines_skipped = scores.comment_lines_skipped;
    prov.blank_lines_skipped = scores.blank_lines_skipped;
    return EuSeries(std::move(pairs), std::move(prov));
}

std::string_view to_string(Aggregator a) noexcept { return a == Aggregator::mean ? "mean" : "median"; }

std::string_view to_string(InputFormat f) noexcept { return f == InputFormat::csv ? "csv" : "tsv"; }

Aggregator parse_aggregator(std::string_view s) {
    if (s == "mean") return Aggregator::mean;
    if (s == "median") return Aggregator::median;
    throw ConfigError("unknown aggregator '" + std::string(s) + "' (expected mean or median)");
}

InputFormat parse_format(std::string_view s) {
    if (s == "csv") return InputFormat::csv;
    if (s == "tsv") return InputFormat::tsv;
    throw ConfigError("unknown input format '" + std::string(s) + "' (expected csv or tsv)");
}

}  // namespace sigcmp
