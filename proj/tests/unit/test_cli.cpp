#include <gtest/gtest.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "sigcmp/cli.hpp"
#include "support.hpp"

using namespace sigcmp;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    Run r;
    r.code = cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string golden(const std::string& name) { return std::string(SIGCMP_GOLDEN_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Set SIGCMP_UPDATE_GOLDEN=1 to rewrite the expected files after an intended change.
void expect_golden(const std::string& name, const std::string& actual) {
    const auto path = golden(name);
    if (std::getenv("SIGCMP_UPDATE_GOLDEN")) std::ofstream(path, std::ios::binary) << actual;
    ASSERT_TRUE(fs::exists(path)) << "missing golden file " << path;
    EXPECT_EQ(actual, slurp(path)) << "output differs from " << name;
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("sigcmp_cli_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const std::string kScores = golden("scores.csv");
const std::string kSystems = golden("systems.csv");

}  // namespace

TEST(Cli, GoldenOutputs) {
    struct Case {
        std::string file;
        std::vector<std::string> args;
    };
    const std::vector<Case> cases{
        {"analyze.json", {"analyze", kScores}},
        {"test_wilcoxon.json", {"test", "--test", "wilcoxon_signed_rank", kScores}},
        {"test_bootstrap.csv", {"--format", "csv", "--trials", "2000", "--seed", "3", "test", "--test", "bootstrap_t",
                                kScores}},
        {"effect.json", {"--eu-size", "4", "effect", kScores}},
        {"prospective.json", {"power", "prospective", "--mean-diff", "0.5"}},
        {"grid.csv", {"--format", "csv", "grid", kSystems}},
        {"compare.md", {"--format", "markdown", "compare", "--power-trials", "200", kScores}},
        {"compare.json", {"compare", "--power-method", "mc", "--power-trials", "200", kScores}},
    };
    for (const auto& c : cases) {
        const auto r = run(c.args);
        ASSERT_EQ(r.code, 0) << c.file << ": " << r.err;
        expect_golden(c.file, r.out);
    }
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
    EXPECT_EQ(run({}).code, cli::kExitUsage);
    EXPECT_EQ(run({"analyze", kScores, "--no-such-flag"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"--alpha2", "1.5", "test", kScores}).code, cli::kExitUsage);
    EXPECT_EQ(run({"test", "--test", "z_test", kScores}).code, cli::kExitUsage);
    EXPECT_EQ(run({"analyze", "/nonexistent/file.csv"}).code, cli::kExitData);

    const auto dir = scratch("codes");
    std::ofstream(dir / "bad.csv") << "a,b\n1,2\n3,oops\n";
    const auto bad = run({"analyze", (dir / "bad.csv").string()});
    EXPECT_EQ(bad.code, cli::kExitData);
    EXPECT_NE(bad.err.find("line 3"), std::string::npos) << bad.err;

    std::ofstream(dir / "flat.csv") << "1,0\n2,1\n3,2\n4,3\n5,4\n";
    EXPECT_EQ(run({"test", "--test", "t_test", (dir / "flat.csv").string()}).code, cli::kExitDegenerate);
    fs::remove_all(dir);
}

TEST(Cli, DeterministicAcrossThreadCounts) {
    const std::vector<std::string> args{"compare", "--test", "bootstrap_t", "--power-trials", "200", kScores};
    std::vector<std::string> one{"--threads", "1", "--trials", "2000"}, four{"--threads", "4", "--trials", "2000"};
    one.insert(one.end(), args.begin(), args.end());
    four.insert(four.end(), args.begin(), args.end());
    const auto a = run(one), b = run(four), c = run(one);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out, c.out);
}

TEST(Cli, WarnsAboutNonRecommendedTestsAndDroppedRows) {
    const auto r = run({"--eu-size", "7", "test", "--test", "sign_test", kScores});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("dropped"), std::string::npos) << r.err;
    const auto quiet = run({"-q", "--eu-size", "7", "test", "--test", "sign_test", kScores});
    EXPECT_TRUE(quiet.err.empty());
}

TEST(Cli, OutDirectoryGetsEveryArtifact) {
    const auto dir = scratch("out");
    const auto r = run({"--out", dir.string(), "compare", "--power-trials", "200", "--mean-diff", "0.01", "--sd", "0.03",
                        kScores});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"report.json", "report.md", "histogram_u.csv", "histogram_v.csv", "histogram_diff.csv",
                          "power_curve.csv"}) {
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    }
    const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
    EXPECT_EQ(report["plot_data"]["power_curve"], "power_curve.csv");
    EXPECT_FALSE(report["prospective"].is_null());
    EXPECT_EQ(slurp(dir / "histogram_diff.csv").substr(0, 24), "bin_start,bin_end,count\n");

    const auto g = run({"--out", dir.string(), "grid", kSystems});
    ASSERT_EQ(g.code, 0) << g.err;
    EXPECT_TRUE(fs::exists(dir / "grid.json"));
    EXPECT_TRUE(fs::exists(dir / "grid.csv"));
    fs::remove_all(dir);
}

TEST(Cli, SweepAndRetrospectivePower) {
    auto r = run({"--format", "csv", "sweep", "--sizes", "30,100", "--iterations", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "n,p_min,p_mean,p_max");
    r = run({"sweep", "--generator", "beta", "--params", "2,5,2,5", "--sizes", "30", "--iterations", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(nlohmann::json::parse(r.out)["sweep"]["generator"]["family"], "beta");
    r = run({"power", "mc", kScores, "--sizes", "20,40", "--power-trials", "200"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(nlohmann::json::parse(r.out)["power"]["points"].size(), 2u);
    EXPECT_EQ(run({"power", "prospective"}).code, cli::kExitUsage);
}

TEST(Cli, TsvAndStdinLikeInputs) {
    const auto dir = scratch("tsv");
    std::ofstream(dir / "s.tsv") << "a\tb\n0.1\t0.2\n0.3\t0.35\n0.2\t0.4\n0.5\t0.45\n0.6\t0.8\n";
    const auto r = run({"analyze", (dir / "s.tsv").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["provenance"]["input_rows"], 5);
    EXPECT_EQ(j["provenance"]["header_skipped"], true);
    fs::remove_all(dir);
}
