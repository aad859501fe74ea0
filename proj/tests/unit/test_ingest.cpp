#include <gtest/gtest.h>

#include <sstream>

#include "sigcmp/error.hpp"
#include "sigcmp/ingest.hpp"

using namespace sigcmp;

TEST(Ingest, ParsesCsvWithHeaderCommentsAndBlankLines) {
    const auto s = parse_scores("a,b\n# note\n1,2\n\n3.5, -4e-1\n", InputFormat::csv, true, "x.csv");
    ASSERT_EQ(s.rows.size(), 2u);
    EXPECT_EQ(s.rows[1].a, 3.5);
    EXPECT_EQ(s.rows[1].b, -0.4);
    EXPECT_TRUE(s.header_skipped);
    EXPECT_EQ(s.comment_lines_skipped, 1u);
    EXPECT_EQ(s.blank_lines_skipped, 1u);
    EXPECT_EQ(s.source_name, "x.csv");
}

TEST(Ingest, HandlesCrlfBomAndTsv) {
    const auto s = parse_scores("\xEF\xBB\xBFsys1\tsys2\r\n0.1\t0.2\r\n0.3\t0.4\r\n", InputFormat::tsv, true);
    ASSERT_EQ(s.rows.size(), 2u);
    EXPECT_EQ(s.rows[0].a, 0.1);
    EXPECT_EQ(s.rows[1].b, 0.4);
}

TEST(Ingest, StreamOverloadMatches) {
    std::istringstream in("1,2\n3,4\n");
    EXPECT_EQ(parse_scores(in, InputFormat::csv, false).rows, parse_scores("1,2\n3,4\n", InputFormat::csv, false).rows);
}

TEST(Ingest, ReportsLineAndFieldOfBadValues) {
    try {
        parse_scores("a,b\n1,2\n3,abc\n", InputFormat::csv, true);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_EQ(e.field(), 2u);
    }
    try {
        parse_scores("1,2\n3\n", InputFormat::csv, false);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_EQ(e.field(), 0u);
    }
    EXPECT_THROW(parse_scores("1,2,3\n", InputFormat::csv, false), ParseError);
    EXPECT_THROW(parse_scores("1,nan\n", InputFormat::csv, false), ParseError);
    EXPECT_THROW(parse_scores("inf,1\n", InputFormat::csv, false), ParseError);
    EXPECT_THROW(parse_scores("1,\n", InputFormat::csv, false), ParseError);
}

TEST(Ingest, EmptyInputIsADataError) {
    EXPECT_THROW(parse_scores("", InputFormat::csv, false), DataError);
    EXPECT_THROW(parse_scores("a,b\n# only comments\n\n", InputFormat::csv, true), DataError);
}

TEST(Ingest, DetectsHeaders) {
    EXPECT_TRUE(detect_header("# c\nbleu_a,bleu_b\n1,2\n", InputFormat::csv));
    EXPECT_FALSE(detect_header("\n1,2\n", InputFormat::csv));
    EXPECT_TRUE(detect_header("x\ty\n", InputFormat::tsv));
}

TEST(Ingest, AggregatesIntoFloorNOverMUnits) {
    PairedScores s;
    for (int i = 1; i <= 7; ++i) s.rows.push_back({double(i), double(2 * i)});
    s.source_name = "seven";
    const auto series = aggregate_to_eus(s, {3, Aggregator::mean, std::nullopt});
    ASSERT_EQ(series.n(), 2u);
    EXPECT_EQ(series.pairs()[0].u, 2.0);
    EXPECT_EQ(series.pairs()[1].v, 10.0);
    EXPECT_EQ(series.diffs()[0], -2.0);
    EXPECT_EQ(series.provenance().dropped_rows, 1u);
    EXPECT_EQ(series.provenance().input_rows, 7u);
    EXPECT_EQ(series.provenance().source_name, "seven");
}

TEST(Ingest, MedianAggregator) {
    PairedScores s;
    for (double x : {5.0, 1.0, 3.0, 10.0}) s.rows.push_back({x, 0.0});
    const auto series = aggregate_to_eus(s, {2, Aggregator::median, std::nullopt});
    EXPECT_EQ(series.pairs()[0].u, 3.0);
    EXPECT_EQ(series.pairs()[1].u, 6.5);
}

TEST(Ingest, EuSizeOneKeepsRows) {
    PairedScores s;
    for (int i = 0; i < 5; ++i) s.rows.push_back({double(i), 1.0});
    const auto series = aggregate_to_eus(s, {});
    ASSERT_EQ(series.n(), 5u);
    for (int i = 0; i < 5; ++i) EXPECT_EQ(series.diffs()[i], i - 1.0);
}

TEST(Ingest, ShuffleIsSeededAndPreservesRows) {
    PairedScores s;
    for (int i = 0; i < 100; ++i) s.rows.push_back({double(i), 0.0});
    const auto a = aggregate_to_eus(s, {1, Aggregator::mean, 5});
    const auto b = aggregate_to_eus(s, {1, Aggregator::mean, 5});
    const auto c = aggregate_to_eus(s, {1, Aggregator::mean, 6});
    EXPECT_EQ(a, b);
    EXPECT_FALSE(a == c);
    auto u = a.u_values();
    std::sort(u.begin(), u.end());
    for (int i = 0; i < 100; ++i) EXPECT_EQ(u[i], i);
}

TEST(Ingest, AggregationErrors) {
    PairedScores s;
    s.rows = {{1, 2}, {3, 4}, {5, 6}};
    EXPECT_THROW(aggregate_to_eus(s, {0, Aggregator::mean, std::nullopt}), ConfigError);
    EXPECT_THROW(aggregate_to_eus(s, {4, Aggregator::mean, std::nullopt}), DataError);
    EXPECT_THROW(aggregate_to_eus(s, {2, Aggregator::mean, std::nullopt}), DataError);  // one EU only
}

TEST(Ingest, ScoreTableWithNames) {
    const auto t = parse_score_table("A,B,C\n1,2,3\n4,5,6\n", InputFormat::csv, "grid.csv");
    EXPECT_EQ(t.names, (std::vector<std::string>{"A", "B", "C"}));
    ASSERT_EQ(t.columns.size(), 3u);
    EXPECT_EQ(t.columns[2], (std::vector<double>{3, 6}));
    const auto unnamed = parse_score_table("1\t2\n3\t4\n", InputFormat::tsv);
    EXPECT_EQ(unnamed.names.front(), "system1");
    EXPECT_THROW(parse_score_table("A,B\n1,2\n3\n", InputFormat::csv), ParseError);
    EXPECT_THROW(parse_score_table("A\n1\n", InputFormat::csv), DataError);
}

TEST(Ingest, EnumNamesRoundTrip) {
    EXPECT_EQ(parse_aggregator(to_string(Aggregator::median)), Aggregator::median);
    EXPECT_EQ(parse_format(to_string(InputFormat::tsv)), InputFormat::tsv);
    EXPECT_THROW(parse_aggregator("mode"), ConfigError);
}
