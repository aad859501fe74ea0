#include "sigcmp/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "sigcmp/error.hpp"
#include "sigcmp/pipeline.hpp"

namespace sigcmp::service {

using json::Json;

struct Upload {
    std::string content;
    InputFormat format = InputFormat::csv;
    bool has_header = false;
    std::string source_name;
};

struct Session {
    std::mutex mutex;
    Upload upload;
    PairedScores scores;
    std::optional<EuConfig> eu_config;
    std::optional<EuSeries> eu;
    std::optional<AnalysisReport> analysis;
    std::optional<TestResult> test;
    bool effects_run = false;
    std::vector<EffectSizeEstimate> effect_sizes;
    std::vector<std::string> effect_warnings;
    std::optional<PowerCurve> power;
    std::optional<ProspectiveRecord> prospective;
    std::chrono::system_clock::time_point created_at;
    std::chrono::system_clock::time_point last_access;
};

namespace {

// Raised inside handlers and turned into a response by handle().
struct HttpError {
    int status;
    std::string kind;
    std::string message;
};

Response json_response(int status, const Json& body) { return {status, json::to_text(body), "application/json"}; }

Response error_response(int status, std::string_view kind, std::string_view message) {
    Json body;
    body["error"]["kind"] = kind;
    body["error"]["message"] = message;
    return json_response(status, body);
}

Json parse_body(const std::string& body) {
    if (body.find_first_not_of(" \t\r\n") == std::string::npos) return Json::object();
    Json j;
    try {
        j = Json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON body: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("request body must be a JSON object");
    return j;
}

void only_keys(const Json& j, std::initializer_list<std::string_view> known) {
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError("unknown field '" + key + "'");
        }
    }
}

double number_field(const Json& j, const char* key, double fallback) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
    return it->get<double>();
}

std::uint64_t count_field(const Json& j, const char* key, std::uint64_t fallback) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number_unsigned()) throw ConfigError(std::string("field '") + key + "' must be a non-negative integer");
    return it->get<std::uint64_t>();
}

std::string string_field(const Json& j, const char* key, std::string fallback) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_string()) throw ConfigError(std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

std::int64_t epoch_seconds(std::chrono::system_clock::time_point t) {
    return std::chrono::duration_cast<std::chrono::seconds>(t.time_since_epoch()).count();
}

std::chrono::system_clock::time_point from_epoch(std::int64_t s) {
    return std::chrono::system_clock::time_point(std::chrono::seconds(s));
}

bool valid_id(const std::string& id) {
    return id.size() == 32 && std::all_of(id.begin(), id.end(), [](char c) {
               return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
           });
}

Provenance scores_provenance(const PairedScores& scores) {
    Provenance p;
    p.source_name = scores.source_name;
    p.input_rows = scores.rows.size();
    p.header_skipped = scores.header_skipped;
    p.comment_lines_skipped = scores.comment_lines_skipped;
    p.blank_lines_skipped = scores.blank_lines_skipped;
    return p;
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= path.size()) {
        const auto cut = path.find('/', start);
        const auto piece = path.substr(start, cut == std::string::npos ? std::string::npos : cut - start);
        if (!piece.empty()) parts.push_back(piece);
        if (cut == std::string::npos) break;
        start = cut + 1;
    }
    return parts;
}

void require_method(const Request& request, std::string_view method) {
    if (request.method != method) throw HttpError{405, "method_not_allowed", "use " + std::string(method)};
}

EuSeries& require_eu(Session& s) {
    if (!s.eu) throw HttpError{409, "step_order", "aggregate the scores into EUs first"};
    return *s.eu;
}

ComparisonReport session_report(const Session& s) {
    ReportParts parts;
    parts.header.alpha1 = s.analysis ? s.analysis->normality.alpha1 : 0.05;
    if (s.test) {
        parts.header.alpha2 = s.test->config.alpha2;
    } else if (s.power) {
        parts.header.alpha2 = s.power->test.alpha;
    } else if (s.prospective) {
        parts.header.alpha2 = s.prospective->spec.alpha;
    }
    parts.provenance = s.eu ? s.eu->provenance() : scores_provenance(s.scores);
    parts.analysis = s.analysis;
    if (s.analysis) parts.plot_data.histograms = default_histogram_files();
    parts.test = s.test;
    parts.effect_sizes = s.effect_sizes;
    parts.power = s.power;
    if (s.power) parts.plot_data.power_curve = kPowerCurveFile;
    parts.prospective = s.prospective;
    ComparisonReport report;
    try {
        report = assemble(std::move(parts), true);
    } catch (const ConfigError& e) {
        throw HttpError{409, "step_order", e.what()};
    }
    report.warnings.insert(report.warnings.end(), s.effect_warnings.begin(), s.effect_warnings.end());
    return report;
}

}  // namespace

Service::Service(ServiceConfig config) : config_(std::move(config)) {
    if (config_.data_dir) std::filesystem::create_directories(*config_.data_dir);
}

Service::~Service() = default;

std::size_t Service::session_count() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

std::string Service::new_id() {
    static thread_local std::random_device device;
    std::array<std::uint32_t, 4> words{};
    for (auto& w : words) w = device();
    std::string id;
    for (auto w : words) {
        char buf[9];
        auto [end, ec] = std::to_chars(buf, buf + 8, w, 16);
        id.append(8 - static_cast<std::size_t>(end - buf), '0');
        id.append(buf, end);
    }
    return id;
}

std::size_t Service::evict_expired() {
    const auto now = config_.clock();
    std::vector<std::string> expired;
    {
        std::lock_guard lock(mutex_);
        for (const auto& [id, session] : sessions_) {
            std::unique_lock session_lock(session->mutex, std::try_to_lock);
            if (session_lock.owns_lock() && now - session->last_access > config_.ttl) expired.push_back(id);
        }
        for (const auto& id : expired) sessions_.erase(id);
    }
    if (config_.data_dir) {
        for (const auto& entry : std::filesystem::directory_iterator(*config_.data_dir)) {
            if (entry.path().extension() != ".json") continue;
            const auto id = entry.path().stem().string();
            if (std::find(expired.begin(), expired.end(), id) != expired.end()) {
                std::filesystem::remove(entry.path());
                continue;
            }
            std::ifstream in(entry.path());
            Json j = Json::parse(in, nullptr, false);
            if (j.is_discarded() || !j.contains("last_access") || !j["last_access"].is_number_integer()) continue;
            if (now - from_epoch(j["last_access"].get<std::int64_t>()) > config_.ttl) {
                in.close();
                std::filesystem::remove(entry.path());
                expired.push_back(id);
            }
        }
    }
    std::sort(expired.begin(), expired.end());
    return static_cast<std::size_t>(std::unique(expired.begin(), expired.end()) - expired.begin());
}

void Service::persist(const std::string& id, const Session& s) const {
    if (!config_.data_dir) return;
    Json j;
    j["id"] = id;
    j["created_at"] = epoch_seconds(s.created_at);
    j["last_access"] = epoch_seconds(s.last_access);
    j["upload"] = {{"content", s.upload.content},
                   {"format", to_string(s.upload.format)},
                   {"has_header", s.upload.has_header},
                   {"source_name", s.upload.source_name}};
    j["eu_config"] = s.eu_config ? json::encode(*s.eu_config) : Json(nullptr);
    j["analysis"] = s.analysis ? json::encode(*s.analysis) : Json(nullptr);
    j["test"] = s.test ? json::encode(*s.test) : Json(nullptr);
    j["effects_run"] = s.effects_run;
    j["effect_sizes"] = Json::array();
    for (const auto& e : s.effect_sizes) j["effect_sizes"].push_back(json::encode(e));
    j["effect_warnings"] = s.effect_warnings;
    j["power"] = s.power ? json::encode(*s.power) : Json(nullptr);
    if (s.prospective) {
        j["prospective"] = {{"spec", json::encode(s.prospective->spec)},
                            {"result", json::encode(s.prospective->result)}};
    } else {
        j["prospective"] = nullptr;
    }
    const auto path = *config_.data_dir / (id + ".json");
    const auto tmp = *config_.data_dir / (id + ".json.tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << j.dump();
        if (!out) throw Error("failed to write session spill file");
    }
    std::filesystem::rename(tmp, path);
}

std::shared_ptr<Session> Service::load(const std::string& id) {
    if (!config_.data_dir) return nullptr;
    const auto path = *config_.data_dir / (id + ".json");
    std::ifstream in(path, std::ios::binary);
    if (!in) return nullptr;
    const Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) return nullptr;
    auto s = std::make_shared<Session>();
    try {
        s->created_at = from_epoch(j.at("created_at").get<std::int64_t>());
        s->last_access = from_epoch(j.at("last_access").get<std::int64_t>());
        const auto& up = j.at("upload");
        s->upload = {up.at("content").get<std::string>(), parse_format(up.at("format").get<std::string>()),
                     up.at("has_header").get<bool>(), up.at("source_name").get<std::string>()};
        s->scores = parse_scores(s->upload.content, s->upload.format, s->upload.has_header, s->upload.source_name);
        if (!j.at("eu_config").is_null()) {
            s->eu_config = json::decode_as<EuConfig>(j.at("eu_config"));
            s->eu = aggregate_to_eus(s->scores, *s->eu_config);
        }
        if (!j.at("analysis").is_null()) s->analysis = json::decode_as<AnalysisReport>(j.at("analysis"));
        if (!j.at("test").is_null()) s->test = json::decode_as<TestResult>(j.at("test"));
        s->effects_run = j.at("effects_run").get<bool>();
        for (const auto& e : j.at("effect_sizes")) s->effect_sizes.push_back(json::decode_as<EffectSizeEstimate>(e));
        s->effect_warnings = j.at("effect_warnings").get<std::vector<std::string>>();
        if (!j.at("power").is_null()) s->power = json::decode_as<PowerCurve>(j.at("power"));
        if (!j.at("prospective").is_null()) {
            s->prospective = ProspectiveRecord{json::decode_as<ProspectiveSpec>(j.at("prospective").at("spec")),
                                               json::decode_as<SampleSizeResult>(j.at("prospective").at("result"))};
        }
    } catch (const std::exception&) {
        return nullptr;  // unreadable spill file: treat the session as gone
    }
    if (config_.clock() - s->last_access > config_.ttl) return nullptr;
    return s;
}

std::shared_ptr<Session> Service::find(const std::string& id) {
    if (!valid_id(id)) return nullptr;
    std::lock_guard lock(mutex_);
    if (const auto it = sessions_.find(id); it != sessions_.end()) return it->second;
    auto loaded = load(id);
    if (loaded) sessions_.emplace(id, loaded);
    return loaded;
}

Response Service::handle(const Request& request) {
    try {
        evict_expired();
        if (request.body.size() > config_.max_upload_bytes) {
            throw HttpError{413, "too_large", "request body exceeds " + std::to_string(config_.max_upload_bytes) +
                                                  " bytes"};
        }
        const auto parts = split_path(request.path);
        if (parts.size() == 1 && parts[0] == "healthz") {
            require_method(request, "GET");
            Json body;
            body["status"] = "ok";
            body["report_schema_version"] = kReportSchemaVersion;
            return json_response(200, body);
        }
        if (parts.size() == 2 && parts[0] == "api" && parts[1] == "sessions") {
            require_method(request, "POST");
            return create_session(request);
        }
        if (parts.size() == 4 && parts[0] == "api" && parts[1] == "sessions") {
            return route_session(request, parts[2], parts[3]);
        }
        throw HttpError{404, "not_found", "no route for " + request.path};
    } catch (const HttpError& e) {
        return error_response(e.status, e.kind, e.message);
    } catch (const ConfigError& e) {
        return error_response(400, "config", e.what());
    } catch (const DataError& e) {
        return error_response(400, "data", e.what());
    } catch (const DegenerateError& e) {
        return error_response(422, "degenerate", e.what());
    } catch (const std::exception& e) {
        return error_response(500, "internal", e.what());
    }
}

Response Service::create_session(const Request& request) {
    Upload up;
    if (request.content_type.starts_with("application/json")) {
        const Json body = parse_body(request.body);
        only_keys(body, {"content", "format", "has_header", "source_name"});
        up.content = string_field(body, "content", "");
        up.format = parse_format(string_field(body, "format", "csv"));
        up.source_name = string_field(body, "source_name", "upload");
        const auto it = body.find("has_header");
        if (it != body.end() && !it->is_boolean()) throw ConfigError("field 'has_header' must be a boolean");
        up.has_header = it != body.end() ? it->get<bool>() : detect_header(up.content, up.format);
    } else {
        up.content = request.body;
        const auto fmt = request.query.find("format");
        up.format = parse_format(fmt != request.query.end() ? fmt->second : "csv");
        const auto name = request.query.find("name");
        up.source_name = name != request.query.end() ? name->second : "upload";
        const auto header = request.query.find("header");
        if (header == request.query.end() || header->second == "auto") {
            up.has_header = detect_header(up.content, up.format);
        } else if (header->second == "true" || header->second == "1") {
            up.has_header = true;
        } else if (header->second == "false" || header->second == "0") {
            up.has_header = false;
        } else {
            throw ConfigError("query parameter 'header' must be true, false or auto");
        }
    }

    auto s = std::make_shared<Session>();
    s->scores = parse_scores(up.content, up.format, up.has_header, up.source_name);
    s->upload = std::move(up);
    s->created_at = s->last_access = config_.clock();

    std::string id;
    {
        std::lock_guard lock(mutex_);
        do {
            id = new_id();
        } while (sessions_.count(id) != 0);
        sessions_.emplace(id, s);
    }
    persist(id, *s);

    Json body;
    body["id"] = id;
    body["provenance"] = json::encode(scores_provenance(s->scores));
    return json_response(201, body);
}

Response Service::route_session(const Request& request, const std::string& id, const std::string& step) {
    auto session = find(id);
    if (!session) throw HttpError{404, "not_found", "unknown session '" + id + "'"};
    std::lock_guard lock(session->mutex);
    Session& s = *session;
    s.last_access = config_.clock();

    Response response;
    if (step == "report") {
        require_method(request, "GET");
        response = json_response(200, to_json(session_report(s)));
        persist(id, s);
        return response;
    }
    require_method(request, "POST");
    const Json body = parse_body(request.body);

    if (step == "aggregate") {
        EuConfig cfg;
        json::merge_eu_config(body, cfg);
        s.eu = aggregate_to_eus(s.scores, cfg);
        s.eu_config = cfg;
        s.analysis.reset();
        s.test.reset();
        s.effects_run = false;
        s.effect_sizes.clear();
        s.effect_warnings.clear();
        s.power.reset();
        Json out;
        out["provenance"] = json::encode(s.eu->provenance());
        out["n"] = s.eu->n();
        response = json_response(200, out);
    } else if (step == "analyze") {
        only_keys(body, {"alpha1", "bins"});
        const auto& eu = require_eu(s);
        std::optional<std::size_t> bins;
        if (body.contains("bins")) bins = count_field(body, "bins", 0);
        s.analysis = analyze(eu, number_field(body, "alpha1", 0.05), bins);
        response = json_response(200, json::encode(*s.analysis));
    } else if (step == "test") {
        const auto& eu = require_eu(s);
        TestConfig cfg;
        json::merge_test_config(body, cfg);
        if (!body.contains("test_id")) {
            if (!s.analysis) throw HttpError{409, "step_order", "run analyze first or name a test_id"};
            cfg.test_id = s.analysis->recommended_tests.front();
        }
        s.test = run_test(eu, cfg);
        s.power.reset();
        response = json_response(200, json::encode(*s.test));
    } else if (step == "effect") {
        only_keys(body, {"indices"});
        const auto& eu = require_eu(s);
        std::vector<EffectIndex> indices;
        if (const auto it = body.find("indices"); it != body.end()) {
            if (!it->is_array()) throw ConfigError("field 'indices' must be an array of strings");
            for (const auto& v : *it) {
                if (!v.is_string()) throw ConfigError("field 'indices' must be an array of strings");
                indices.push_back(parse_effect_index(v.get<std::string>()));
            }
        } else {
            if (!s.analysis) throw HttpError{409, "step_order", "run analyze first or list the indices"};
            indices = default_effect_indices(*s.analysis);
        }
        if (indices.empty()) throw ConfigError("at least one effect size index is required");
        std::vector<std::string> warnings;
        auto estimates = estimate_all(eu.diffs(), indices, warnings);
        if (estimates.empty()) throw DegenerateError(warnings.front());
        s.effects_run = true;
        s.effect_sizes = std::move(estimates);
        s.effect_warnings = std::move(warnings);
        Json out;
        out["effect_sizes"] = Json::array();
        for (const auto& e : s.effect_sizes) out["effect_sizes"].push_back(json::encode(e));
        out["warnings"] = s.effect_warnings;
        response = json_response(200, out);
    } else if (step == "power") {
        const auto method = string_field(body, "method", "bootstrap");
        if (method == "prospective") {
            only_keys(body, {"method", "expected_mean_diff", "expected_std_dev", "target_power", "alpha", "direction"});
            ProspectiveSpec spec;
            if (!body.contains("expected_mean_diff")) throw ConfigError("field 'expected_mean_diff' is required");
            spec.expected_mean_diff = number_field(body, "expected_mean_diff", 0.0);
            spec.expected_std_dev = number_field(body, "expected_std_dev", 1.0);
            spec.target_power = number_field(body, "target_power", 0.8);
            spec.alpha = number_field(body, "alpha", s.test ? s.test->config.alpha2 : 0.05);
            spec.direction = parse_sidedness(string_field(body, "direction", "two_sided"));
            if (s.test && spec.alpha != s.test->config.alpha2) {
                throw ConfigError("alpha must match the significance test's alpha2");
            }
            s.prospective = ProspectiveRecord{spec, prospective_sample_size(spec)};
            Json out;
            out["spec"] = json::encode(s.prospective->spec);
            out["result"] = json::encode(s.prospective->result);
            response = json_response(200, out);
        } else {
            only_keys(body, {"method", "sample_sizes", "trials", "inner_trials"});
            const auto pm = parse_power_method(method);
            const auto& eu = require_eu(s);
            if (!s.test) throw HttpError{409, "step_order", "run a significance test before retrospective power"};
            std::vector<std::size_t> sizes;
            if (const auto it = body.find("sample_sizes"); it != body.end()) {
                if (!it->is_array()) throw ConfigError("field 'sample_sizes' must be an array of integers");
                for (const auto& v : *it) {
                    if (!v.is_number_unsigned()) throw ConfigError("field 'sample_sizes' must be an array of integers");
                    sizes.push_back(v.get<std::size_t>());
                }
            }
            s.power = retrospective_power(eu, s.test->config, pm, sizes, count_field(body, "trials", kDefaultPowerTrials),
                                          count_field(body, "inner_trials", 200));
            response = json_response(200, json::encode(*s.power));
        }
    } else {
        throw HttpError{404, "not_found", "unknown step '" + step + "'"};
    }
    persist(id, s);
    return response;
}

std::pair<std::string, int> parse_listen(const std::string& address) {
    std::string host = "127.0.0.1";
    std::string port_text = address;
    if (const auto colon = address.rfind(':'); colon != std::string::npos) {
        if (colon > 0) host = address.substr(0, colon);
        port_text = address.substr(colon + 1);
    }
    int port = 0;
    const auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port < 0 || port > 65535) {
        throw ConfigError("invalid listen address '" + address + "' (expected host:port)");
    }
    return {host, port};
}

bool serve(Service& service, const std::string& host, int port) {
    httplib::Server server;
    const auto& cfg = service.config();
    server.set_payload_max_length(cfg.max_upload_bytes + 1);
    if (cfg.static_dir && !server.set_mount_point("/", cfg.static_dir->string())) {
        throw ConfigError("static directory '" + cfg.static_dir->string() + "' does not exist");
    }
    const auto origin = cfg.cors_origin;
    server.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
    const auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
        Request r;
        r.method = req.method;
        r.path = req.path;
        r.body = req.body;
        r.content_type = req.get_header_value("Content-Type");
        for (const auto& [k, v] : req.params) r.query[k] = v;
        const auto out = service.handle(r);
        res.status = out.status;
        res.set_content(out.body, out.content_type);
    };
    server.Get("/healthz", forward);
    server.Get(R"(/api/.*)", forward);
    server.Post(R"(/api/.*)", forward);
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    return server.listen(host, port);
}

}  // namespace sigcmp::service
