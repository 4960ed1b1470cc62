#pragma once

#include "agenda/pipeline.hpp"
#include "agenda/review_store.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "json.hpp"

namespace agenda {

struct ServiceConfig {
    std::string registry;
    std::string log_path = "review-log.jsonl";
    std::string host = "127.0.0.1";
    int port = 8080;
    /// When set, every request must carry it in the X-Agenda-Token header.
    std::string token;
    std::size_t page_size = 20;
};

/// Reads a JSON config file (keys as in ServiceConfig; "bind" as host:port)
/// and applies AGENDA_LENS_REGISTRY, AGENDA_LENS_LOG, AGENDA_LENS_BIND and
/// AGENDA_LENS_TOKEN overrides.
ServiceConfig load_service_config(const std::filesystem::path& path);
void apply_env_overrides(ServiceConfig& config);

struct HttpRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::map<std::string, std::string> headers;
    std::string body;
};

struct HttpResponse {
    int status = 200;
    nlohmann::json body;
};

/// Article payload of POST /v1/flag: title, body, optional id and source.
Article article_from_payload(const nlohmann::json& payload, const std::string& fallback_id);

/// Request handling independent of the HTTP transport.
class FlagService {
public:
    /// `pipeline` may be null, in which case flagging answers 503.
    FlagService(std::shared_ptr<const Pipeline> pipeline, ReviewStore& store, nlohmann::json models,
                ServiceConfig config = {});

    HttpResponse handle(const HttpRequest& request) const;

    /// Scores an article and stores the record.
    FlagRecord flag(const Article& article) const;

private:
    HttpResponse route(const HttpRequest& request) const;

    std::shared_ptr<const Pipeline> pipeline_;
    ReviewStore& store_;
    nlohmann::json models_;
    ServiceConfig config_;
};

/// HTTP transport for a FlagService.
class HttpServer {
public:
    explicit HttpServer(const FlagService& service);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds the address; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    /// Blocks until stop() is called.
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace agenda
