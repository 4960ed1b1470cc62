#include "doctest.h"
#include "oracles.hpp"

#include "agenda/corpus.hpp"
#include "agenda/error.hpp"
#include "agenda/text.hpp"

using namespace agenda;
using testing_support::temp_dir;
using testing_support::write_file;

namespace {

Article article(std::string id, std::string source, std::string title, std::string body) {
    Article a;
    a.id = std::move(id);
    a.source = std::move(source);
    a.title = std::move(title);
    a.body = std::move(body);
    return a;
}

std::string error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("load_corpus reads jsonl records") {
    const auto dir = temp_dir("corpus-load");
    const auto path = write_file(dir / "c.jsonl",
                                 R"({"id":"a1","source":"s.example","title":"T","body":"one","weak_labels":["satire"]})"
                                 "\n"
                                 R"({"id":"a2","source":"s.example","title":"","body":"two","primary_weak_label":"hate speech"})"
                                 "\n\n"
                                 R"({"id":"a3","source":"t.example","title":"x","body":"three"})"
                                 "\n");
    const Corpus c = load_corpus(path);
    CHECK(c.size() == 3);
    CHECK(c.at("a1").has_weak_label(FeatureLabel::satire));
    CHECK(c.at("a2").primary_weak_label == FeatureLabel::hate_speech);
    CHECK(c.at("a2").has_weak_label(FeatureLabel::hate_speech));
    CHECK(c.sources() == std::set<std::string>{"s.example", "t.example"});
    CHECK_THROWS_AS(c.at("zzz"), NotFoundError);
}

TEST_CASE("load_corpus names the bad record") {
    const auto dir = temp_dir("corpus-bad");
    const auto missing = write_file(dir / "m.jsonl", R"({"id":"a1","source":"s","title":"t","body":"b"})"
                                                     "\n"
                                                     R"({"id":"a2","title":"t","body":"b"})"
                                                     "\n");
    const std::string msg = error_of([&] { load_corpus(missing); });
    CHECK(msg.find(":2") != std::string::npos);
    CHECK(msg.find("source") != std::string::npos);

    const auto dup = write_file(dir / "d.jsonl", R"({"id":"a1","source":"s","title":"t","body":"b"})"
                                                 "\n"
                                                 R"({"id":"a1","source":"t","title":"t","body":"c"})"
                                                 "\n");
    const std::string dmsg = error_of([&] { load_corpus(dup); });
    CHECK(dmsg.find("duplicate") != std::string::npos);
    CHECK(dmsg.find("a1") != std::string::npos);
    CHECK(dmsg.find("#1") != std::string::npos);
    CHECK(dmsg.find("#2") != std::string::npos);

    const auto label = write_file(dir / "l.jsonl", R"({"id":"a1","source":"s","title":"t","body":"b","weak_labels":["sarcasm"]})");
    CHECK_THROWS_AS(load_corpus(label), ValidationError);
    CHECK_THROWS_AS(load_corpus(dir / "absent.jsonl"), NotFoundError);
}

TEST_CASE("csv manifest format") {
    const auto dir = temp_dir("corpus-csv");
    const auto path = write_file(dir / "c.csv",
                                 "id,source,title,body,weak_labels,primary_weak_label\n"
                                 "a1,s.example,Title,\"Body, with comma\",satire;clickbait,satire\n"
                                 "a2,t.example,,\"He said \"\"hi\"\"\",,\n");
    const Corpus c = load_corpus(path, CorpusFormat::csv_manifest);
    REQUIRE(c.size() == 2);
    CHECK(c.at("a1").body == "Body, with comma");
    CHECK(c.at("a1").weak_labels == std::set<FeatureLabel>{FeatureLabel::satire, FeatureLabel::clickbait});
    CHECK(c.at("a2").body == "He said \"hi\"");
    const auto bad = write_file(dir / "b.csv", "id,source,body\na1,,text\n");
    CHECK(error_of([&] { load_corpus(bad, CorpusFormat::csv_manifest); }).find(":2") != std::string::npos);
}

TEST_CASE("load, save, load is identity") {
    const auto dir = temp_dir("corpus-roundtrip");
    Article a = article("x1", "s.example", "Title \"quoted\"", "Body ü with\nnewline");
    a.weak_labels = {FeatureLabel::propaganda, FeatureLabel::political_bias};
    a.primary_weak_label = FeatureLabel::propaganda;
    const Corpus c({a, article("x2", "t.example", "", "b")});
    save_corpus(c, dir / "c.jsonl");
    const Corpus back = load_corpus(dir / "c.jsonl");
    save_corpus(back, dir / "c2.jsonl");
    const Corpus again = load_corpus(dir / "c2.jsonl");
    REQUIRE(again.size() == 2);
    for (const auto& id : {"x1", "x2"}) {
        CHECK(to_json(again.at(id)) == to_json(c.at(id)));
    }
    CHECK(again.at("x1").title == a.title);
    CHECK(again.at("x1").primary_weak_label == FeatureLabel::propaganda);
}

TEST_CASE("scrub_source removes URLs and name variants") {
    const Article url = article("a", "example.com", "", "Read more at https://example.com today");
    CHECK(scrub_source(url, {"example"}).body == "Read more at  today");

    const Article plain = article("b", "s", "Plain title", "Nothing to remove here.");
    const Article same = scrub_source(plain, {"example"});
    CHECK(same.title == plain.title);
    CHECK(same.body == plain.body);

    const Article upper = article("c", "example", "", "EXAMPLE News reports on Example matters");
    const std::string body = scrub_source(upper, {"example"}).body;
    CHECK(to_lower(body).find("example") == std::string::npos);
    CHECK(body.find("News reports on") != std::string::npos);

    const Article mixed = article("d", "daily.example", "Daily Wire: see www.foo.org/x and bar.net",
                                  "visit http://a.b/c?d=e or DAILY today");
    const Article s = scrub_source(mixed, {"daily"});
    for (const std::string& text : {s.title, s.body}) {
        CHECK(text.find("www.") == std::string::npos);
        CHECK(text.find("http") == std::string::npos);
        CHECK(text.find(".net") == std::string::npos);
        CHECK(to_lower(text).find("daily") == std::string::npos);
    }
    SUBCASE("idempotent") {
        const Article twice = scrub_source(s, {"daily"});
        CHECK(twice.title == s.title);
        CHECK(twice.body == s.body);
    }
}

TEST_CASE("annotation_view window") {
    const std::string three = "First sentence here. Second one follows! Third ends?";
    CHECK(annotation_view(article("a", "s", "T", three)) == "T\n" + three);

    // Last period inside the window sits at 1,640 (prefix length 1,640).
    std::string body(1639, 'a');
    body += '.';
    body += std::string(2000 - body.size(), 'b');
    const std::string view = annotation_view(article("b", "s", "T", body));
    CHECK(view.size() == 2 + 1640);
    CHECK(view.back() == '.');

    const std::string flat(1800, 'x');
    CHECK(annotation_view(article("c", "s", "T", flat)).size() == 2 + kAnnotationWindow);

    // Closing quotes stay with their sentence; the window counts characters.
    std::string quoted = "He said \"stop.\" ";
    quoted += std::string(1700, 'y');
    CHECK(annotation_view(article("d", "s", "", quoted)) == "\nHe said \"stop.\"");
    std::string wide;
    for (int i = 0; i < 1800; ++i) wide += "é";
    CHECK(annotation_view(article("e", "s", "", wide)).size() == 1 + 2 * kAnnotationWindow);

    CHECK_THROWS_AS(annotation_view(article("f", "s", "T", "")), ValidationError);
    for (std::size_t n : {10u, 1699u, 1700u, 1701u, 5000u}) {
        const Article a = article("g", "s", "Title", std::string(n, 'z'));
        CHECK(annotation_view(a).size() <= a.title.size() + 1 + kAnnotationWindow);
    }
}

TEST_CASE("bucket_score") {
    CHECK(bucket_score(3) == AgendaBucket::benign);
    CHECK(bucket_score(1) == AgendaBucket::benign);
    CHECK(bucket_score(5) == AgendaBucket::harmful);
    CHECK(bucket_score(4) == AgendaBucket::harmful);
    CHECK_THROWS_AS(bucket_score(0), ValidationError);
    CHECK_THROWS_AS(bucket_score(6), ValidationError);
    for (int a = 1; a <= 5; ++a) {
        for (int b = a; b <= 5; ++b) CHECK(static_cast<int>(bucket_score(a)) <= static_cast<int>(bucket_score(b)));
    }
}

TEST_CASE("gold annotations") {
    const auto dir = temp_dir("gold");
    const Corpus c({article("a1", "s", "Title", "The vermin are coming.")});
    const std::string text = document_text("Title", "The vermin are coming.");
    const auto start = text.find("vermin");
    const auto good = write_file(dir / "g.jsonl", R"({"article_id":"a1","agenda_score":4,"features":["hate speech","negative sentiment"],"spans":[{"feature":"hate_speech","start":)" +
                                                      std::to_string(start) + R"(,"end":)" + std::to_string(start + 6) +
                                                      R"(,"text":"vermin"}]})"
                                                      "\n");
    const auto gold = load_gold(good, &c);
    REQUIRE(gold.size() == 1);
    const GoldAnnotation& g = gold.at("a1");
    CHECK(g.agenda_score == 4);
    CHECK(g.feature_labels.count(FeatureLabel::hate_speech));
    CHECK(text.substr(g.evidence_spans[0].start, 6) == "vermin");
    save_gold(gold, dir / "g2.jsonl");
    CHECK(to_json(load_gold(dir / "g2.jsonl").at("a1")) == to_json(g));

    auto bad = [&](const std::string& line) { return write_file(dir / "bad.jsonl", line + "\n"); };
    // Span label not among the article's labels.
    CHECK_THROWS_AS(load_gold(bad(R"({"article_id":"a1","features":["satire"],"spans":[{"feature":"clickbait","start":0,"end":1}]})"), &c),
                    ValidationError);
    CHECK_THROWS_AS(load_gold(bad(R"({"article_id":"a1","features":["satire"],"spans":[{"feature":"satire","start":0,"end":999}]})"), &c),
                    ValidationError);
    CHECK_THROWS_AS(load_gold(bad(R"({"article_id":"a1","features":["negative sentiment","positive sentiment"]})"), &c),
                    ValidationError);
    CHECK_THROWS_AS(load_gold(bad(R"({"article_id":"zz","features":[]})"), &c), ValidationError);
    CHECK_THROWS_AS(load_gold(bad(R"({"article_id":"a1","agenda_score":7})"), &c), ValidationError);
}

TEST_CASE("tokenize_words offsets") {
    const std::string text = "Don't panic—it's a well-known fact, 42 times.";
    const auto tokens = tokenize_words(text);
    REQUIRE(!tokens.empty());
    for (const auto& t : tokens) CHECK(text.substr(t.begin, t.end - t.begin) == t.text);
    CHECK(tokens.front().text == "Don't");
    CHECK(tokens.back().text == "times");
    CHECK(document_text("T", "B") == "T\nB");
}
