#include "doctest.h"
#include "oracles.hpp"

#include "agenda/error.hpp"
#include "agenda/review_store.hpp"
#include "agenda/service.hpp"
#include "agenda/toy_backend.hpp"

#include "httplib.h"

#include <thread>

using namespace agenda;
using nlohmann::json;

#ifndef AGENDA_DATA_DIR
#define AGENDA_DATA_DIR "data"
#endif

namespace {

// Hand-built pipeline: each feature fires on one cue word.
std::shared_ptr<const Pipeline> cue_pipeline() {
    auto backend = std::shared_ptr<const ClassifierBackend>(make_backend("toy"));
    std::map<FeatureLabel, FeatureModel> models;
    const std::map<FeatureLabel, std::string> cues = {
        {FeatureLabel::clickbait, "shocking"},   {FeatureLabel::junk_science, "miracle"},
        {FeatureLabel::hate_speech, "vermin"},   {FeatureLabel::conspiracy_theory, "cabal"},
        {FeatureLabel::propaganda, "glorious"},  {FeatureLabel::satire, "parody"}};
    for (const auto& [f, cue] : cues) {
        auto extractor = std::make_shared<ToyModel>();
        extractor->key(cue) = 6.0;
        extractor->mark_trained();
        auto predictor = std::make_shared<ToyModel>();
        predictor->value(cue) = 12.0;
        predictor->bias() = -6.0;
        predictor->mark_trained();
        FeatureModel fm;
        fm.feature = f;
        fm.backend = backend;
        fm.extractor = extractor;
        fm.predictor = predictor;
        fm.config = default_train_config("toy");
        models.emplace(f, fm);
    }
    CombinerModel combiner;
    combiner.weights = {0.2, 0.5, 3.0, 1.0, 1.5, -0.5, 1.0};
    combiner.bias = -2.0;
    return std::make_shared<const Pipeline>(
        std::move(models), SentimentScorer(ValenceLexicon::load_dir(std::string(AGENDA_DATA_DIR) + "/lexicon")),
        combiner);
}

std::string fixed_clock() { return "2024-01-01T00:00:00Z"; }

HttpRequest request(std::string method, std::string path, std::string body = "",
                    std::map<std::string, std::string> query = {}) {
    HttpRequest r;
    r.method = std::move(method);
    r.path = std::move(path);
    r.body = std::move(body);
    r.query = std::move(query);
    return r;
}

const std::string kHarmful = R"({"title":"They are vermin","body":"The vermin must be stopped, a glorious fight against the cabal.","source":"x.example"})";
const std::string kBenign = R"({"title":"Fair","body":"The town fair opens on Saturday with music.","source":"y.example"})";

std::size_t line_count(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) n += !line.empty();
    return n;
}

}  // namespace

TEST_CASE("flag, queue and review through the handler") {
    const auto dir = testing_support::temp_dir("service");
    const auto log = dir / "log.jsonl";
    ReviewStore store(log, fixed_clock);
    const auto pipeline = cue_pipeline();
    const FlagService svc(pipeline, store, json{{"backend", "toy"}});

    const HttpResponse first = svc.handle(request("POST", "/v1/flag", kHarmful));
    REQUIRE(first.status == 201);
    CHECK(first.body["status"] == "pending");
    bool nonzero = false;
    for (const auto& c : first.body["analysis"]["verdict"]["contributions"].items()) nonzero = nonzero || c.value() != 0.0;
    CHECK(nonzero);

    const HttpResponse again = svc.handle(request("POST", "/v1/flag", kHarmful));
    CHECK(again.body["id"] != first.body["id"]);
    const HttpResponse benign = svc.handle(request("POST", "/v1/flag", kBenign));
    CHECK(benign.body["status"] == "auto_resolved");

    CHECK(svc.handle(request("POST", "/v1/flag", R"({"title":"t","body":""})")).status == 400);
    CHECK(svc.handle(request("POST", "/v1/flag", "not json")).status == 400);
    CHECK(svc.handle(request("POST", "/v1/flag", R"({"title":"t"})")).body["error"] == "invalid_request");

    svc.handle(request("POST", "/v1/flag", kHarmful));
    // 3 pending + 1 auto-resolved so far.
    const HttpResponse queue = svc.handle(request("GET", "/v1/queue"));
    CHECK(queue.body["total"] == 3);
    CHECK(queue.body["records"][0]["id"] == "rec-000004");
    const HttpResponse p1 = svc.handle(request("GET", "/v1/queue", "", {{"page_size", "2"}}));
    const HttpResponse p2 = svc.handle(request("GET", "/v1/queue", "", {{"page_size", "2"}, {"page", "2"}}));
    CHECK(p1.body["records"].size() == 2);
    CHECK(p2.body["records"].size() == 1);
    CHECK(svc.handle(request("GET", "/v1/queue", "", {{"page", "0"}})).status == 400);
    CHECK(svc.handle(request("GET", "/v1/queue", "", {{"status", "bogus"}})).status == 400);
    CHECK(svc.handle(request("GET", "/v1/queue", "", {{"status", "all"}})).body["total"] == 4);

    const std::string id = first.body["id"];
    const std::size_t before = line_count(log);
    const HttpResponse confirmed =
        svc.handle(request("POST", "/v1/records/" + id + "/review", R"({"action":"confirm","reviewer":"mod1"})"));
    CHECK(confirmed.status == 200);
    CHECK(confirmed.body["status"] == "confirmed");
    CHECK(line_count(log) == before + 1);
    CHECK(svc.handle(request("POST", "/v1/records/" + id + "/review", R"({"action":"dismiss"})")).status == 409);

    const std::string second = again.body["id"];
    const HttpResponse dismissed = svc.handle(request(
        "POST", "/v1/records/" + second + "/review", R"({"action":"dismiss","score":2,"note":"Satire, not hate.","reviewer":"mod2"})"));
    CHECK(dismissed.body["status"] == "dismissed");
    CHECK(dismissed.body["decisions"][0]["score"] == 2);
    CHECK(dismissed.body["decisions"][0]["note"] == "Satire, not hate.");
    CHECK(svc.handle(request("POST", "/v1/records/rec-999999/review", R"({"action":"confirm"})")).status == 404);
    CHECK(svc.handle(request("POST", "/v1/records/" + id + "/review", R"({"action":"maybe"})")).status == 400);
    CHECK(svc.handle(request("GET", "/v1/records/" + second)).body["status"] == "dismissed");
    CHECK(svc.handle(request("GET", "/v1/records/nope")).status == 404);
    CHECK(svc.handle(request("GET", "/v1/models")).body["backend"] == "toy");
    CHECK(svc.handle(request("GET", "/v1/elsewhere")).status == 404);

    // The verdict equals the offline pipeline output.
    const Article offline = article_from_payload(json::parse(kHarmful), "article-1");
    CHECK(first.body["analysis"] == to_json(pipeline->analyze(offline)));

    SUBCASE("replay rebuilds the store") {
        const ReviewStore replayed(log, fixed_clock);
        CHECK(replayed.snapshot() == store.snapshot());
        CHECK(replayed.size() == 4);
    }
}

TEST_CASE("store behaviour") {
    const auto dir = testing_support::temp_dir("store");
    ReviewStore store(dir / "log.jsonl", fixed_clock);
    CHECK(store.list(std::nullopt, 1, 10).records.empty());
    CHECK_THROWS_AS(store.list(std::nullopt, 0, 10), ValidationError);
    Article a;
    a.id = "x";
    a.source = "s";
    a.body = "b";
    for (int i = 0; i < 3; ++i) store.add(a, json::object(), true);
    store.add(a, json::object(), true);
    ReviewDecision d;
    d.action = "dismiss";
    store.review("rec-000004", d);
    CHECK(store.list(RecordStatus::pending, 1, 10).records.size() == 3);
    CHECK(store.list(RecordStatus::dismissed, 1, 10).records.size() == 1);
    CHECK_THROWS_AS(store.review("rec-000004", d), ConflictError);
    CHECK_THROWS_AS(store.review("rec-000099", d), NotFoundError);

    // A corrupt log refuses to load.
    testing_support::write_file(dir / "bad.jsonl", "{\"event\":\"flag\"}\nnot json\n");
    CHECK_THROWS_AS(ReviewStore(dir / "bad.jsonl"), ValidationError);
}

TEST_CASE("token, missing models and config") {
    const auto dir = testing_support::temp_dir("service-auth");
    ReviewStore store(dir / "log.jsonl", fixed_clock);
    ServiceConfig config;
    config.token = "s3cret";
    const FlagService locked(cue_pipeline(), store, json::object(), config);
    CHECK(locked.handle(request("GET", "/v1/queue")).status == 401);
    HttpRequest ok = request("GET", "/v1/queue");
    ok.headers["x-agenda-token"] = "s3cret";
    CHECK(locked.handle(ok).status == 200);

    const FlagService empty(nullptr, store, json());
    const HttpResponse r = empty.handle(request("POST", "/v1/flag", kBenign));
    CHECK(r.status == 503);
    CHECK(r.body["error"] == "unavailable");
    CHECK(empty.handle(request("GET", "/v1/models")).status == 503);

    testing_support::write_file(dir / "svc.json",
                                R"({"service":{"registry":"reg","log_path":"l.jsonl","bind":"0.0.0.0:9001","token":"t"}})");
    ServiceConfig loaded = load_service_config(dir / "svc.json");
    CHECK(loaded.host == "0.0.0.0");
    CHECK(loaded.port == 9001);
    CHECK(loaded.token == "t");
    setenv("AGENDA_LENS_BIND", "127.0.0.1:9100", 1);
    setenv("AGENDA_LENS_LOG", "/tmp/other.jsonl", 1);
    apply_env_overrides(loaded);
    unsetenv("AGENDA_LENS_BIND");
    unsetenv("AGENDA_LENS_LOG");
    CHECK(loaded.port == 9100);
    CHECK(loaded.log_path == "/tmp/other.jsonl");
}

TEST_CASE("http transport") {
    const auto dir = testing_support::temp_dir("service-http");
    ReviewStore store(dir / "log.jsonl", fixed_clock);
    const FlagService svc(cue_pipeline(), store, json{{"backend", "toy"}});
    HttpServer server(svc);
    const int port = server.bind("127.0.0.1", 0);
    std::thread worker([&] { server.listen(); });
    httplib::Client client("127.0.0.1", port);
    const auto posted = client.Post("/v1/flag", kHarmful, "application/json");
    REQUIRE(posted);
    CHECK(posted->status == 201);
    const auto id = json::parse(posted->body)["id"].get<std::string>();
    const auto got = client.Get("/v1/records/" + id);
    REQUIRE(got);
    CHECK(json::parse(got->body)["id"] == id);
    const auto queue = client.Get("/v1/queue?status=pending&page=1");
    REQUIRE(queue);
    CHECK(json::parse(queue->body)["total"] == 1);
    const auto bad = client.Post("/v1/flag", "{", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    CHECK(json::parse(bad->body).contains("detail"));
    server.stop();
    worker.join();
}
