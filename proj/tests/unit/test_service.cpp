#include <gtest/gtest.h>
#include <httplib.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "sigcmp/cli.hpp"
#include "sigcmp/error.hpp"
#include "sigcmp/service.hpp"
#include "support.hpp"

extern char** environ;

using namespace sigcmp;
using namespace sigcmp::service;
using nlohmann::json;

namespace {

std::string sample_csv(std::size_t n = 60, std::uint64_t seed = 1, double shift = 0.3) {
    return support::paired_csv(support::normal_sample(n, seed, 0.5 + shift, 0.1), support::normal_sample(n, seed + 1000, 0.5, 0.1));
}

Response post(Service& s, const std::string& path, const json& body) {
    return s.handle({"POST", path, body.dump(), "application/json", {}});
}

Response get(Service& s, const std::string& path) { return s.handle({"GET", path, "", "", {}}); }

std::string create(Service& s, const std::string& csv = sample_csv()) {
    const auto r = post(s, "/api/sessions", {{"content", csv}, {"source_name", "scores.csv"}});
    EXPECT_EQ(r.status, 201) << r.body;
    return json::parse(r.body)["id"].get<std::string>();
}

std::string base(const std::string& id) { return "/api/sessions/" + id; }

std::string error_kind(const Response& r) { return json::parse(r.body)["error"]["kind"].get<std::string>(); }

void full_flow(Service& s, const std::string& id) {
    ASSERT_EQ(post(s, base(id) + "/aggregate", {{"eu_size", 2}}).status, 200);
    ASSERT_EQ(post(s, base(id) + "/analyze", json::object()).status, 200);
    ASSERT_EQ(post(s, base(id) + "/test", {{"seed", 4}}).status, 200);
    ASSERT_EQ(post(s, base(id) + "/effect", json::object()).status, 200);
    ASSERT_EQ(post(s, base(id) + "/power", {{"method", "bootstrap"}, {"trials", 200}}).status, 200);
    ASSERT_EQ(post(s, base(id) + "/power", {{"method", "prospective"}, {"expected_mean_diff", 0.5}}).status, 200);
}

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("sigcmp_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST(Service, Health) {
    Service s;
    const auto r = get(s, "/healthz");
    EXPECT_EQ(r.status, 200);
    EXPECT_EQ(json::parse(r.body)["status"], "ok");
}

TEST(Service, FullFlowGivesCompleteReport) {
    Service s;
    const auto id = create(s);
    EXPECT_EQ(id.size(), 32u);
    full_flow(s, id);
    const auto r = get(s, base(id) + "/report");
    ASSERT_EQ(r.status, 200) << r.body;
    const auto report = json::parse(r.body);
    EXPECT_EQ(report["schema_version"], "1.0");
    EXPECT_FALSE(report["test"].is_null());
    EXPECT_FALSE(report["power"].is_null());
    EXPECT_EQ(report["prospective"]["result"]["refined"], 34);
    EXPECT_EQ(report["provenance"]["eu"]["eu_size"], 2);
    for (const auto& w : report["warnings"]) EXPECT_EQ(w.get<std::string>().find("incomplete"), std::string::npos);
}

TEST(Service, PartialReportFlagsMissingSteps) {
    Service s;
    const auto id = create(s);
    ASSERT_EQ(post(s, base(id) + "/aggregate", json::object()).status, 200);
    const auto r = get(s, base(id) + "/report");
    ASSERT_EQ(r.status, 200);
    const auto report = json::parse(r.body);
    EXPECT_TRUE(report["analysis"].is_null());
    EXPECT_TRUE(report["test"].is_null());
    EXPECT_FALSE(report["warnings"].empty());
}

TEST(Service, RawUploadWithQueryParameters) {
    Service s;
    const auto r = s.handle({"POST", "/api/sessions", "1\t2\n3\t4\n5\t7\n", "text/tab-separated-values",
                             {{"format", "tsv"}, {"header", "false"}, {"name", "t.tsv"}}});
    ASSERT_EQ(r.status, 201) << r.body;
    const auto body = json::parse(r.body);
    EXPECT_EQ(body["provenance"]["input_rows"], 3);
    EXPECT_EQ(body["provenance"]["source"], "t.tsv");
}

TEST(Service, ErrorStatuses) {
    ServiceConfig cfg;
    cfg.max_upload_bytes = 4096;
    Service s(cfg);
    const auto id = create(s);

    auto r = get(s, base("0123456789abcdef0123456789abcdef") + "/report");
    EXPECT_EQ(r.status, 404);
    EXPECT_EQ(get(s, "/api/nothing").status, 404);
    EXPECT_EQ(post(s, base(id) + "/frobnicate", json::object()).status, 404);

    r = post(s, base(id) + "/test", json::object());
    EXPECT_EQ(r.status, 409);
    EXPECT_EQ(error_kind(r), "step_order");

    EXPECT_EQ(get(s, base(id) + "/aggregate").status, 405);

    r = post(s, base(id) + "/aggregate", {{"eu_sise", 2}});
    EXPECT_EQ(r.status, 400);
    EXPECT_EQ(error_kind(r), "config");
    EXPECT_EQ(post(s, base(id) + "/aggregate", {{"eu_size", 0}}).status, 400);
    EXPECT_EQ(s.handle({"POST", base(id) + "/analyze", "{not json", "application/json", {}}).status, 400);

    r = post(s, "/api/sessions", {{"content", "a,b\n1,x\n"}});
    EXPECT_EQ(r.status, 400);
    EXPECT_EQ(error_kind(r), "data");

    r = post(s, "/api/sessions", {{"content", std::string(5000, '1')}});
    EXPECT_EQ(r.status, 413);

    const auto flat = create(s, "1,0\n2,1\n3,2\n4,3\n");
    ASSERT_EQ(post(s, base(flat) + "/aggregate", json::object()).status, 200);
    r = post(s, base(flat) + "/test", {{"test_id", "t_test"}});
    EXPECT_EQ(r.status, 422);
    EXPECT_EQ(error_kind(r), "degenerate");
}

TEST(Service, PowerStepOrderAndAlphaChecks) {
    Service s;
    const auto id = create(s);
    ASSERT_EQ(post(s, base(id) + "/aggregate", json::object()).status, 200);
    EXPECT_EQ(post(s, base(id) + "/power", {{"method", "mc"}}).status, 409);
    ASSERT_EQ(post(s, base(id) + "/test", {{"test_id", "t_test"}, {"alpha2", 0.01}}).status, 200);
    auto r = post(s, base(id) + "/power", {{"method", "prospective"}, {"expected_mean_diff", 0.5}, {"alpha", 0.05}});
    EXPECT_EQ(r.status, 400);
    r = post(s, base(id) + "/power", {{"method", "prospective"}, {"expected_mean_diff", 0.5}});
    EXPECT_EQ(r.status, 200);
    EXPECT_EQ(json::parse(r.body)["spec"]["alpha"], 0.01);
    r = post(s, base(id) + "/power", {{"method", "mc"}, {"sample_sizes", {10, 20}}, {"trials", 200}});
    ASSERT_EQ(r.status, 200) << r.body;
    EXPECT_EQ(json::parse(r.body)["points"].size(), 2u);
    // analysis at alpha1 = 0.05 and a test at alpha2 = 0.01 are consistent
    ASSERT_EQ(post(s, base(id) + "/analyze", json::object()).status, 200);
    EXPECT_EQ(get(s, base(id) + "/report").status, 200);
}

TEST(Service, AggregateResetsDownstreamResults) {
    Service s;
    const auto id = create(s);
    full_flow(s, id);
    ASSERT_EQ(post(s, base(id) + "/aggregate", {{"eu_size", 3}}).status, 200);
    const auto report = json::parse(get(s, base(id) + "/report").body);
    EXPECT_TRUE(report["test"].is_null());
    EXPECT_TRUE(report["power"].is_null());
    EXPECT_TRUE(report["effect_sizes"].empty());
}

TEST(Service, SessionsExpireAfterTtl) {
    auto now = std::make_shared<std::chrono::system_clock::time_point>(std::chrono::system_clock::now());
    ServiceConfig cfg;
    cfg.ttl = std::chrono::hours(24);
    cfg.clock = [now] { return *now; };
    Service s(cfg);
    const auto id = create(s);
    *now += std::chrono::hours(23);
    EXPECT_EQ(post(s, base(id) + "/aggregate", json::object()).status, 200);  // touches the session
    *now += std::chrono::hours(23);
    EXPECT_EQ(s.session_count(), 1u);
    *now += std::chrono::hours(2);
    EXPECT_EQ(get(s, base(id) + "/report").status, 404);
    EXPECT_EQ(s.session_count(), 0u);
}

TEST(Service, SpilledSessionsSurviveRestartAndExpire) {
    const auto dir = scratch_dir("spill");
    auto now = std::make_shared<std::chrono::system_clock::time_point>(std::chrono::system_clock::now());
    ServiceConfig cfg;
    cfg.data_dir = dir;
    cfg.clock = [now] { return *now; };
    std::string id, before;
    {
        Service a(cfg);
        id = create(a);
        full_flow(a, id);
        before = get(a, base(id) + "/report").body;
    }
    EXPECT_TRUE(std::filesystem::exists(dir / (id + ".json")));
    {
        Service b(cfg);
        const auto r = get(b, base(id) + "/report");
        ASSERT_EQ(r.status, 200) << r.body;
        EXPECT_EQ(r.body, before);
    }
    {
        *now += std::chrono::hours(25);
        Service c(cfg);
        EXPECT_EQ(get(c, base(id) + "/report").status, 404);
        EXPECT_FALSE(std::filesystem::exists(dir / (id + ".json")));
    }
    std::filesystem::remove_all(dir);
}

TEST(Service, IdenticalSessionsGiveIdenticalReports) {
    Service s;
    const auto a = create(s);
    const auto b = create(s);
    EXPECT_NE(a, b);
    full_flow(s, a);
    full_flow(s, b);
    EXPECT_EQ(get(s, base(a) + "/report").body, get(s, base(b) + "/report").body);
}

TEST(Service, ResultsMatchTheCliByteForByte) {
    const auto dir = scratch_dir("cli_api");
    const auto csv = sample_csv(80, 9, 0.05);
    const auto path = dir / "scores.csv";
    std::ofstream(path) << csv;

    Service s;
    const auto id = create(s, csv);
    ASSERT_EQ(post(s, base(id) + "/aggregate", {{"eu_size", 2}}).status, 200);
    const auto analysis = post(s, base(id) + "/analyze", json::object());
    const auto test = post(s, base(id) + "/test", {{"test_id", "bootstrap_t"}, {"trials", 500}, {"seed", 11}});
    const auto effect = post(s, base(id) + "/effect", {{"indices", {"cohens_d", "hodges_lehmann"}}});

    const auto cli_json = [&](std::vector<std::string> args) {
        std::ostringstream out, err;
        args.insert(args.end(), {"--eu-size", "2", path.string()});
        EXPECT_EQ(cli::run(args, out, err), 0) << err.str();
        return json::parse(out.str());
    };
    EXPECT_EQ(cli_json({"analyze"})["analysis"].dump(), json::parse(analysis.body).dump());
    EXPECT_EQ(cli_json({"test", "--test", "bootstrap_t", "--trials", "500", "--seed", "11"})["test"].dump(),
              json::parse(test.body).dump());
    EXPECT_EQ(cli_json({"effect", "--index", "cohens_d", "--index", "hodges_lehmann"})["effect_sizes"].dump(),
              json::parse(effect.body)["effect_sizes"].dump());
    std::filesystem::remove_all(dir);
}

TEST(Service, ParseListen) {
    EXPECT_EQ(parse_listen("0.0.0.0:9000"), (std::pair<std::string, int>{"0.0.0.0", 9000}));
    EXPECT_EQ(parse_listen(":81").second, 81);
    EXPECT_EQ(parse_listen("8081").first, "127.0.0.1");
    EXPECT_THROW(parse_listen("host:port"), ConfigError);
    EXPECT_THROW(parse_listen("host:70000"), ConfigError);
}

TEST(Service, ServesOverHttp) {
    const int port = 20000 + ::getpid() % 20000;
    const std::string listen = "127.0.0.1:" + std::to_string(port);
    std::vector<std::string> argv_s{SIGCMP_CLI_PATH, "serve", "--listen", listen};
    std::vector<char*> argv;
    for (auto& a : argv_s) argv.push_back(a.data());
    argv.push_back(nullptr);
    pid_t pid = 0;
    ASSERT_EQ(posix_spawn(&pid, argv[0], nullptr, nullptr, argv.data(), environ), 0);

    httplib::Client client("127.0.0.1", port);
    client.set_connection_timeout(1);
    bool up = false;
    for (int i = 0; i < 100 && !up; ++i) {
        if (auto r = client.Get("/healthz"); r && r->status == 200) {
            up = true;
        } else {
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
    }
    if (up) {
        auto created = client.Post("/api/sessions", json{{"content", sample_csv()}}.dump(), "application/json");
        ASSERT_TRUE(created);
        EXPECT_EQ(created->status, 201);
        EXPECT_EQ(created->get_header_value("Access-Control-Allow-Origin"), "*");
        const auto id = json::parse(created->body)["id"].get<std::string>();
        auto agg = client.Post(base(id) + "/aggregate", "{}", "application/json");
        ASSERT_TRUE(agg);
        EXPECT_EQ(agg->status, 200);
        auto report = client.Get(base(id) + "/report");
        ASSERT_TRUE(report);
        EXPECT_EQ(report->status, 200);
        auto opts = client.Options(base(id) + "/report");
        ASSERT_TRUE(opts);
        EXPECT_EQ(opts->status, 204);
    }
    ::kill(pid, SIGTERM);
    int status = 0;
    ::waitpid(pid, &status, 0);
    EXPECT_TRUE(up) << "server did not come up on " << listen;
}
