#include "doctest.h"
#include "oracles.hpp"

#include "agenda/error.hpp"
#include "agenda/evaluation.hpp"
#include "agenda/pipeline.hpp"
#include "agenda/registry.hpp"
#include "agenda/synth.hpp"
#include "agenda/text.hpp"

#include <sstream>

using namespace agenda;

#ifndef AGENDA_DATA_DIR
#define AGENDA_DATA_DIR "data"
#endif

namespace {

SynthOptions small_options() {
    SynthOptions o;
    o.positives_per_feature = 80;
    o.average_articles = 160;
    o.gold_articles = 120;
    return o;
}

}  // namespace

TEST_CASE("synthetic corpus") {
    const SynthCorpus a = synthesize(small_options());
    const SynthCorpus b = synthesize(small_options());
    REQUIRE(a.corpus.size() == b.corpus.size());
    for (std::size_t i = 0; i < a.corpus.size(); ++i) {
        CHECK(to_json(a.corpus.articles()[i]) == to_json(b.corpus.articles()[i]));
    }
    CHECK(a.corpus.size() == 6 * 80 + 160);
    SynthOptions other = small_options();
    other.seed = 8;
    CHECK(to_json(synthesize(other).corpus.articles()[0]) != to_json(a.corpus.articles()[0]));

    // Planted markers sit where the generator says.
    std::size_t checked = 0;
    for (const auto& art : a.corpus.articles()) {
        const auto tokens = tokenize_words(art.text());
        for (std::size_t p : a.marker_positions.at(art.id)) {
            bool known = false;
            for (FeatureLabel f : kRationaleFeatures) {
                const auto& m = marker_tokens(f);
                known = known || std::find(m.begin(), m.end(), normalize_token(tokens.at(p).text)) != m.end();
            }
            CHECK(known);
            ++checked;
        }
    }
    CHECK(checked > 0);
    for (const auto& [id, g] : a.gold) {
        validate_gold(g, &a.corpus.at(id));
        CHECK(a.ratings.at(id).size() == small_options().raters);
    }
}

TEST_CASE("registry round trip and pipeline") {
    const SynthCorpus sc = synthesize(small_options());
    const auto dir = testing_support::temp_dir("registry");
    const Registry registry(dir / "reg");
    auto backend = std::shared_ptr<const ClassifierBackend>(make_backend("toy"));
    TrainConfig config = default_train_config("toy");
    config.max_epochs = 6;
    config.early_stop_patience = 3;

    CHECK_THROWS_AS(registry.load_pipeline(), Error);

    std::map<FeatureLabel, FeatureModel> models;
    const LabelSiteMap map = label_site_map(sc.corpus);
    for (FeatureLabel f : kRationaleFeatures) {
        const FeatureRun run = run_feature(f, sc.corpus, map, backend, config, 1000, {}, {30, 30});
        registry.save_feature_model(run.model, true);
        registry.save_metrics(f, {{"seeds", {{"1000", {{"dev", 1.0}}}}}});
        models.emplace(f, run.model);
    }
    std::vector<FeatureVector> xs;
    std::vector<AgendaBucket> ys;
    for (const auto& [id, g] : sc.gold) {
        if (!g.agenda_score) continue;
        xs.push_back(gold_feature_vector(g));
        ys.push_back(bucket_score(*g.agenda_score));
    }
    const CombinerModel combiner = fit(xs, ys);
    registry.save_combiner(combiner);
    registry.save_lexicon(std::string(AGENDA_DATA_DIR) + "/lexicon");
    registry.save_manifest({{"backend", "toy"}, {"seeds", {1000}}});

    for (const auto& entry : {"hate_speech/extractor.bin", "hate_speech/predictor.bin",
                              "hate_speech/config.json", "hate_speech/backend.txt",
                              "hate_speech/metrics.json"}) {
        CAPTURE(entry);
        CHECK(std::filesystem::exists(registry.root() / entry));
    }

    const Pipeline loaded = registry.load_pipeline();
    const Pipeline direct(models, SentimentScorer(ValenceLexicon::load_dir(std::string(AGENDA_DATA_DIR) + "/lexicon")),
                          combiner);
    for (std::size_t i = 0; i < 20; ++i) {
        const Article& a = sc.corpus.articles()[i * 13];
        const auto x = to_json(loaded.analyze(a));
        CHECK(x == to_json(direct.analyze(a)));
        CHECK(x["features"].size() == 6);
        CHECK(x["verdict"]["contributions"].size() == 7);
    }
    const ArticleAnalysis analysis = loaded.analyze(sc.corpus.articles()[0]);
    CHECK(analysis.features.provenance[0] == Provenance::model);
    const FeatureModel one = registry.load_feature_model(FeatureLabel::satire, backend, 1000);
    CHECK_THROWS_AS(registry.load_feature_model(FeatureLabel::satire, backend, 42), NotFoundError);
    CHECK(one.seed == 1000);

    Article empty = sc.corpus.articles()[0];
    empty.body.clear();
    CHECK_THROWS_AS(loaded.analyze(empty), ValidationError);

    std::map<FeatureLabel, FeatureModel> missing = models;
    missing.erase(FeatureLabel::satire);
    CHECK_THROWS_AS(Pipeline(missing, SentimentScorer(ValenceLexicon{}), combiner), UnavailableError);

    const auto meta = registry.metadata();
    CHECK(meta["backend"] == "toy");
    CHECK(meta.contains("combiner"));
}

TEST_CASE("feature vectors") {
    GoldAnnotation g;
    g.article_id = "a";
    g.feature_labels = {FeatureLabel::hate_speech, FeatureLabel::negative_sentiment, FeatureLabel::political_bias};
    const FeatureVector v = gold_feature_vector(g);
    CHECK(v.values == std::array<int, kFeatureCount>{0, 0, 1, 0, 0, 0, 1});
    CHECK(v.provenance[0] == Provenance::annotated);

    Article a;
    a.id = "b";
    a.source = "s";
    a.weak_labels = {FeatureLabel::propaganda, FeatureLabel::satire};
    const FeatureVector w = weak_feature_vector(a);
    CHECK(w.values == std::array<int, kFeatureCount>{0, 0, 0, 0, 1, 1, 0});
    CHECK(w.provenance[4] == Provenance::weak);
}

TEST_CASE("evaluation helpers") {
    const auto dir = testing_support::temp_dir("evaluation");
    save_ratings_csv({{"a1", {1, 2, 3}}, {"a2", {2, 2, 4}}}, dir / "r.csv");
    const AnnotationMatrix m = load_ratings_csv(dir / "r.csv");
    REQUIRE(m.size() == 3);
    CHECK(m[0].size() == 2);
    CHECK(*m[2][1] == 4.0);
    testing_support::write_file(dir / "bad.csv", "article_id,rater,score\na1,r1,high\n");
    CHECK_THROWS_AS(load_ratings_csv(dir / "bad.csv"), ValidationError);

    CHECK(fmt(-0.00001, 4) == "0.0000");
    CHECK(fmt(2.5, 1) == "2.5");
    write_csv(dir / "t.csv", {"a", "b"}, {{"x,y", "say \"hi\""}});
    std::ifstream in(dir / "t.csv");
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == "a,b\n\"x,y\",\"say \"\"hi\"\"\"\n");

    const auto ranking = weight_ranking({0.1, 0.2, 1.76, 0.3, 1.31, 0.0, 1.55});
    CHECK(ranking[0].first == FeatureLabel::hate_speech);
    CHECK(ranking[1].first == FeatureLabel::negative_sentiment);
    CHECK(ranking[2].first == FeatureLabel::propaganda);
}
