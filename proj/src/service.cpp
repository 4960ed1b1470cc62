#include "agenda/service.hpp"

#include "agenda/error.hpp"

#include <cstdlib>
#include <fstream>
#include <regex>

#include "httplib.h"

namespace agenda {

using nlohmann::json;

namespace {

void parse_bind(const std::string& bind, ServiceConfig& c) {
    const auto colon = bind.rfind(':');
    if (colon == std::string::npos) throw ValidationError("bind address must be host:port, got '" + bind + "'");
    c.host = bind.substr(0, colon);
    try {
        c.port = std::stoi(bind.substr(colon + 1));
    } catch (const std::exception&) {
        throw ValidationError("bad port in bind address '" + bind + "'");
    }
    if (c.port < 0 || c.port > 65535) throw ValidationError("port out of range in '" + bind + "'");
}

HttpResponse error_response(int status, std::string_view kind, const std::string& detail) {
    return {status, {{"error", kind}, {"detail", detail}}};
}

std::size_t parse_positive(const std::map<std::string, std::string>& query, const std::string& key,
                           std::size_t fallback) {
    auto it = query.find(key);
    if (it == query.end()) return fallback;
    const std::string& v = it->second;
    if (v.empty() || v.size() > 9 || v.find_first_not_of("0123456789") != std::string::npos) {
        throw ValidationError(key + " must be a positive integer, got '" + v + "'");
    }
    const auto n = static_cast<std::size_t>(std::stoul(v));
    if (n == 0) throw ValidationError(key + " must be a positive integer, got '" + v + "'");
    return n;
}

}  // namespace

void apply_env_overrides(ServiceConfig& c) {
    if (const char* v = std::getenv("AGENDA_LENS_REGISTRY")) c.registry = v;
    if (const char* v = std::getenv("AGENDA_LENS_LOG")) c.log_path = v;
    if (const char* v = std::getenv("AGENDA_LENS_BIND")) parse_bind(v, c);
    if (const char* v = std::getenv("AGENDA_LENS_TOKEN")) c.token = v;
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
    ServiceConfig c;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw NotFoundError("cannot open config " + path.string());
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw ValidationError(path.string() + ": " + e.what());
        }
        // The service keys may sit at the top level or under "service".
        const json& s = j.contains("service") ? j["service"] : j;
        c.registry = s.value("registry", j.value("registry", c.registry));
        c.log_path = s.value("log_path", c.log_path);
        if (s.contains("bind")) parse_bind(s["bind"].get<std::string>(), c);
        c.host = s.value("host", c.host);
        c.port = s.value("port", c.port);
        c.token = s.value("token", c.token);
        c.page_size = s.value("page_size", c.page_size);
    }
    apply_env_overrides(c);
    if (c.page_size == 0) throw ValidationError("page_size must be positive");
    return c;
}

Article article_from_payload(const json& payload, const std::string& fallback_id) {
    if (!payload.is_object()) throw ValidationError("payload must be a JSON object");
    auto string_field = [&](const char* key, bool required) -> std::string {
        auto it = payload.find(key);
        if (it == payload.end() || it->is_null()) {
            if (required) throw ValidationError(std::string("missing field '") + key + "'");
            return {};
        }
        if (!it->is_string()) throw ValidationError(std::string("field '") + key + "' must be a string");
        return it->get<std::string>();
    };
    Article a;
    a.id = string_field("id", false);
    if (a.id.empty()) a.id = fallback_id;
    a.source = string_field("source", false);
    if (a.source.empty()) a.source = "unknown";
    a.title = string_field("title", false);
    a.body = string_field("body", true);
    if (trim(a.body).empty()) throw ValidationError("field 'body' is empty");
    return a;
}

FlagService::FlagService(std::shared_ptr<const Pipeline> pipeline, ReviewStore& store, json models,
                         ServiceConfig config)
    : pipeline_(std::move(pipeline)), store_(store), models_(std::move(models)), config_(std::move(config)) {}

FlagRecord FlagService::flag(const Article& article) const {
    if (!pipeline_) throw UnavailableError("no models loaded; train a registry and restart the service");
    const ArticleAnalysis analysis = pipeline_->analyze(article);
    return store_.add(article, to_json(analysis), analysis.verdict.bucket == AgendaBucket::harmful);
}

HttpResponse FlagService::handle(const HttpRequest& request) const {
    if (!config_.token.empty()) {
        auto it = request.headers.find("x-agenda-token");
        if (it == request.headers.end() || it->second != config_.token) {
            return error_response(401, "unauthorized", "missing or wrong X-Agenda-Token header");
        }
    }
    try {
        return route(request);
    } catch (const ValidationError& e) {
        return error_response(400, "invalid_request", e.what());
    } catch (const NotFoundError& e) {
        return error_response(404, "not_found", e.what());
    } catch (const ConflictError& e) {
        return error_response(409, "conflict", e.what());
    } catch (const UnavailableError& e) {
        return error_response(503, "unavailable", e.what());
    } catch (const json::exception& e) {
        return error_response(400, "invalid_request", e.what());
    } catch (const std::exception& e) {
        return error_response(500, "internal", e.what());
    }
}

HttpResponse FlagService::route(const HttpRequest& r) const {
    static const std::regex record_re(R"(^/v1/records/([A-Za-z0-9_.-]+)$)");
    static const std::regex review_re(R"(^/v1/records/([A-Za-z0-9_.-]+)/review$)");
    std::smatch m;
    auto parse_body = [&]() {
        try {
            return json::parse(r.body);
        } catch (const json::exception& e) {
            throw ValidationError(std::string("body is not valid JSON: ") + e.what());
        }
    };

    if (r.path == "/v1/flag") {
        if (r.method != "POST") return error_response(405, "method_not_allowed", "use POST");
        if (!pipeline_) throw UnavailableError("no models loaded; train a registry and restart the service");
        const Article a = article_from_payload(parse_body(), "article-" + std::to_string(store_.size() + 1));
        return {201, to_json(flag(a))};
    }
    if (r.path == "/v1/queue") {
        if (r.method != "GET") return error_response(405, "method_not_allowed", "use GET");
        std::optional<RecordStatus> status = RecordStatus::pending;
        if (auto it = r.query.find("status"); it != r.query.end()) {
            if (it->second == "all") status.reset();
            else if (!it->second.empty()) status = record_status_from_string(it->second);
        }
        const std::size_t page = parse_positive(r.query, "page", 1);
        const std::size_t size = parse_positive(r.query, "page_size", config_.page_size);
        const Page p = store_.list(status, page, size);
        json records = json::array();
        for (const auto& rec : p.records) records.push_back(to_json(rec));
        return {200,
                {{"records", records},
                 {"page", p.page},
                 {"page_size", p.page_size},
                 {"total", p.total},
                 {"status", status ? json(to_string(*status)) : json("all")}}};
    }
    if (r.path == "/v1/models") {
        if (r.method != "GET") return error_response(405, "method_not_allowed", "use GET");
        if (models_.is_null()) throw UnavailableError("no model registry loaded");
        return {200, models_};
    }
    if (std::regex_match(r.path, m, review_re)) {
        if (r.method != "POST") return error_response(405, "method_not_allowed", "use POST");
        return {200, to_json(store_.review(m[1].str(), review_decision_from_json(parse_body())))};
    }
    if (std::regex_match(r.path, m, record_re)) {
        if (r.method != "GET") return error_response(405, "method_not_allowed", "use GET");
        auto rec = store_.get(m[1].str());
        if (!rec) throw NotFoundError("no record '" + m[1].str() + "'");
        return {200, to_json(*rec)};
    }
    return error_response(404, "not_found", "no route for " + r.method + " " + r.path);
}

// ---------------------------------------------------------------------------
// HTTP transport

struct HttpServer::Impl {
    const FlagService& service;
    httplib::Server server;
    explicit Impl(const FlagService& s) : service(s) {}
};

HttpServer::HttpServer(const FlagService& service) : impl_(std::make_unique<Impl>(service)) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
        HttpRequest r;
        r.method = req.method;
        r.path = req.path;
        r.body = req.body;
        for (const auto& [k, v] : req.params) r.query.emplace(k, v);
        for (const auto& [k, v] : req.headers) r.headers.emplace(to_lower(k), v);
        const HttpResponse out = impl_->service.handle(r);
        res.status = out.status;
        res.set_content(out.body.dump(), "application/json; charset=utf-8");
    };
    impl_->server.Get(".*", handler);
    impl_->server.Post(".*", handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) throw UnavailableError("cannot bind " + host);
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port)) {
        throw UnavailableError("cannot bind " + host + ":" + std::to_string(port));
    }
    return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

}  // namespace agenda
