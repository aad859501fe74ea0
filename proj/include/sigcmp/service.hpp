#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace sigcmp::service {

using Clock = std::function<std::chrono::system_clock::time_point()>;

struct ServiceConfig {
    std::size_t max_upload_bytes = 50u * 1024u * 1024u;
    std::chrono::seconds ttl = std::chrono::hours(24);
    std::optional<std::filesystem::path> data_dir;  // spill sessions to disk when set
    std::optional<std::filesystem::path> static_dir;  // UI bundle served at /
    std::string cors_origin = "*";
    Clock clock = [] { return std::chrono::system_clock::now(); };
};

struct Request {
    std::string method;  // "GET", "POST", ...
    std::string path;    // "/api/sessions/abc/test"
    std::string body;
    std::string content_type;
    std::map<std::string, std::string> query;
};

struct Response {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

struct Session;

/// The JSON API, independent of any transport. Every statistical value in a
/// response comes from a core library call.
class Service {
public:
    explicit Service(ServiceConfig config = {});
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    Response handle(const Request& request);

    /// Drops sessions idle for longer than the TTL (also their spill files).
    std::size_t evict_expired();
    std::size_t session_count() const;
    const ServiceConfig& config() const noexcept { return config_; }

private:
    std::shared_ptr<Session> find(const std::string& id);
    void persist(const std::string& id, const Session& session) const;
    std::shared_ptr<Session> load(const std::string& id);
    std::string new_id();

    Response create_session(const Request& request);
    Response route_session(const Request& request, const std::string& id, const std::string& step);

    ServiceConfig config_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
};

/// Parses "host:port" (or ":port" / "port"). Throws ConfigError.
std::pair<std::string, int> parse_listen(const std::string& address);

/// Runs an HTTP/1.1 server until the process is stopped. Returns false when the
/// address cannot be bound.
bool serve(Service& service, const std::string& host, int port);

}  // namespace sigcmp::service
