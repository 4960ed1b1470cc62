#include "doctest.h"
#include "oracles.hpp"

#include "agenda/error.hpp"
#include "agenda/sampling.hpp"

#include <map>

using namespace agenda;

#ifndef AGENDA_DATA_DIR
#define AGENDA_DATA_DIR "data"
#endif

namespace {

using FL = FeatureLabel;

Corpus corpus_of(const std::vector<std::tuple<std::string, std::string, std::set<FL>>>& rows) {
    std::vector<Article> articles;
    for (const auto& [id, source, labels] : rows) {
        Article a;
        a.id = id;
        a.source = source;
        a.body = "text of " + id;
        a.weak_labels = labels;
        if (!labels.empty()) a.primary_weak_label = *labels.begin();
        articles.push_back(a);
    }
    return Corpus(std::move(articles));
}

// Random multi-label corpus over a handful of sites.
Corpus random_corpus(Rng& rng, std::size_t sites, std::size_t articles) {
    const std::vector<FL> pool = {FL::clickbait, FL::junk_science, FL::hate_speech, FL::conspiracy_theory,
                                  FL::propaganda, FL::satire,      FL::average};
    std::vector<std::set<FL>> site_labels(sites);
    for (auto& s : site_labels) {
        s.insert(pool[rng.below(pool.size())]);
        if (rng.bernoulli(0.4)) s.insert(pool[rng.below(pool.size() - 1)]);
    }
    std::vector<std::tuple<std::string, std::string, std::set<FL>>> rows;
    for (std::size_t i = 0; i < articles; ++i) {
        const std::size_t s = rng.below(sites);
        rows.emplace_back("r" + std::to_string(i), "site" + std::to_string(s) + ".example", site_labels[s]);
    }
    return corpus_of(rows);
}

}  // namespace

TEST_CASE("overlap_coefficient") {
    CHECK(overlap_coefficient({"s1", "s2"}, {"s3", "s4"}) == 0.0);
    CHECK(overlap_coefficient({"s1", "s2"}, {"s1", "s2", "s3"}) == 1.0);
    CHECK(overlap_coefficient({"a", "b", "c"}, {"b", "c", "d", "e"}) == doctest::Approx(2.0 / 3.0));
    CHECK(overlap_coefficient({"b", "c", "d", "e"}, {"a", "b", "c"}) == overlap_coefficient({"a", "b", "c"}, {"b", "c", "d", "e"}));
    CHECK_THROWS_AS(overlap_coefficient({}, {"a"}), ValidationError);
}

TEST_CASE("select_negative_classes reproduces the fixture rows") {
    const LabelSiteMap map = load_label_site_map(std::string(AGENDA_DATA_DIR) + "/fixtures/label_site_map.json");
    CHECK(select_negative_classes(FL::junk_science, map) ==
          std::set<FL>{FL::hate_speech, FL::propaganda, FL::satire, FL::average});
    CHECK(select_negative_classes(FL::conspiracy_theory, map) == std::set<FL>{FL::clickbait, FL::satire, FL::average});
    CHECK(select_negative_classes(FL::clickbait, map) ==
          std::set<FL>{FL::conspiracy_theory, FL::hate_speech, FL::propaganda, FL::satire, FL::average});
    CHECK(select_negative_classes(FL::hate_speech, map) ==
          std::set<FL>{FL::clickbait, FL::junk_science, FL::satire, FL::average});
    CHECK(select_negative_classes(FL::propaganda, map) ==
          std::set<FL>{FL::clickbait, FL::junk_science, FL::satire, FL::average});
    CHECK(select_negative_classes(FL::satire, map) ==
          std::set<FL>{FL::clickbait, FL::junk_science, FL::hate_speech, FL::conspiracy_theory, FL::propaganda,
                       FL::average});

    SUBCASE("threshold monotonicity") {
        for (FL f : kRationaleFeatures) {
            std::set<FL> prev;
            for (double t = 0.0; t <= 1.0001; t += 0.05) {
                const auto cur = select_negative_classes(f, map, t);
                CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
                CHECK(cur.count(f) == 0);
                CHECK(cur.count(FL::average) == 1);
                prev = cur;
            }
        }
    }
}

TEST_CASE("select_negative_classes edge cases") {
    LabelSiteMap all;
    for (FL f : kRationaleFeatures) all[f] = {"w1", "w2"};
    all[FL::average] = {"w3"};
    CHECK(select_negative_classes(FL::satire, all) == std::set<FL>{FL::average});
    CHECK_THROWS_AS(select_negative_classes(FL::call_to_action, all), ValidationError);
}

TEST_CASE("source_weights") {
    auto weights = [](const std::vector<std::string>& sources) {
        std::vector<Article> as;
        for (std::size_t i = 0; i < sources.size(); ++i) {
            Article a;
            a.id = std::to_string(i);
            a.source = sources[i];
            as.push_back(a);
        }
        return source_weights(as);
    };
    for (double w : weights({"w1", "w1", "w2", "w2"})) CHECK(w == doctest::Approx(0.25));
    const auto w = weights({"w1", "w2", "w2", "w2"});
    CHECK(w[0] == doctest::Approx(0.5));
    for (int i = 1; i < 4; ++i) CHECK(w[i] == doctest::Approx(1.0 / 6.0));
    for (double x : weights({"a", "a", "a", "a", "a"})) CHECK(x == doctest::Approx(0.2));

    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::string> sources;
        const std::size_t n = 1 + rng.below(60);
        for (std::size_t i = 0; i < n; ++i) sources.push_back("s" + std::to_string(rng.below(7)));
        const auto ws = weights(sources);
        std::map<std::string, double> mass;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) mass[sources[i]] += ws[i], total += ws[i];
        CHECK(std::fabs(total - 1.0) < 1e-9);
        for (const auto& [s, m] : mass) CHECK(std::fabs(m - 1.0 / static_cast<double>(mass.size())) < 1e-9);
    }
}

TEST_CASE("build_training_set") {
    Rng rng(5);
    const Corpus c = random_corpus(rng, 14, 600);
    const LabelSiteMap map = label_site_map(c);
    for (FL f : kRationaleFeatures) {
        if (!map.count(f)) continue;
        TrainingSet ts;
        try {
            ts = build_training_set(f, c, map, 99);
        } catch (const ValidationError&) {
            continue;  // no eligible negatives for this draw
        }
        const std::set<std::string> pos(ts.positives.begin(), ts.positives.end());
        const std::set<std::string> neg(ts.negatives.begin(), ts.negatives.end());
        CHECK(pos.size() == ts.positives.size());
        CHECK(neg.size() == ts.negatives.size());
        for (const auto& id : neg) {
            CHECK(pos.count(id) == 0);
            CHECK_FALSE(c.at(id).has_weak_label(f));
        }
        // Under-supply: every positive is taken.
        std::size_t available = 0;
        for (const auto& a : c.articles()) available += a.has_weak_label(f);
        CHECK(ts.positives.size() == std::min<std::size_t>(available, 2500));
        // Class weights inverse to frequency.
        CHECK(ts.class_weights.positive * static_cast<double>(ts.positives.size()) ==
              doctest::Approx(ts.class_weights.negative * static_cast<double>(ts.negatives.size())));

        const TrainingSet again = build_training_set(f, c, map, 99);
        CHECK(again.positives == ts.positives);
        CHECK(again.negatives == ts.negatives);
    }

    SUBCASE("ten positives") {
        std::vector<std::tuple<std::string, std::string, std::set<FL>>> rows;
        for (int i = 0; i < 10; ++i) rows.emplace_back("p" + std::to_string(i), "sat.example", std::set<FL>{FL::satire});
        for (int i = 0; i < 30; ++i) rows.emplace_back("n" + std::to_string(i), "avg.example", std::set<FL>{FL::average});
        const Corpus small = corpus_of(rows);
        const TrainingSet ts = build_training_set(FL::satire, small, label_site_map(small), 1);
        CHECK(ts.positives.size() == 10);
        CHECK(ts.negatives.size() == 20);
    }
    SUBCASE("no negatives") {
        const Corpus only = corpus_of({{"p", "s", {FL::satire}}});
        CHECK_THROWS_AS(build_training_set(FL::satire, only, label_site_map(only), 1), ValidationError);
    }
}

TEST_CASE("sampling manifest round trip") {
    const auto dir = testing_support::temp_dir("manifest");
    Rng rng(3);
    const Corpus c = random_corpus(rng, 10, 300);
    const LabelSiteMap map = label_site_map(c);
    const FL f = map.begin()->first == FL::average ? std::next(map.begin())->first : map.begin()->first;
    const TrainingSet ts = build_training_set(f, c, map, 4);
    write_sampling_manifest(ts, dir / "m.jsonl");
    const TrainingSet back = read_sampling_manifest(dir / "m.jsonl");
    CHECK(back.positives == ts.positives);
    CHECK(back.negatives == ts.negatives);
    CHECK(back.seed == ts.seed);
    CHECK(back.negative_classes == ts.negative_classes);
}

TEST_CASE("split_disjoint_sources") {
    std::vector<std::tuple<std::string, std::string, std::set<FL>>> rows;
    for (int s = 0; s < 4; ++s) {
        for (int i = 0; i < 300; ++i) {
            rows.emplace_back("s" + std::to_string(s) + "-" + std::to_string(i), "site" + std::to_string(s), std::set<FL>{});
        }
    }
    const Corpus c = corpus_of(rows);
    const SplitSpec split = split_disjoint_sources(c, 100, 300, 8);
    CHECK(split.test.size() == 300);
    CHECK(split.dev.size() == 100);
    std::set<std::string> test_sources, rest_sources;
    for (const auto& id : split.test) test_sources.insert(c.at(id).source);
    for (const auto& id : split.train) rest_sources.insert(c.at(id).source);
    for (const auto& id : split.dev) rest_sources.insert(c.at(id).source);
    CHECK(test_sources.size() == 1);
    CHECK(rest_sources.count(*test_sources.begin()) == 0);
    CHECK(split.train.size() + split.dev.size() + split.test.size() == c.size());

    const SplitSpec again = split_disjoint_sources(c, 100, 300, 8);
    CHECK(again.train == split.train);
    CHECK(again.test == split.test);

    const Corpus single = corpus_of({{"a", "one", {}}, {"b", "one", {}}, {"c", "one", {}}});
    CHECK_THROWS_AS(split_disjoint_sources(single, 1, 1, 1), ValidationError);
    CHECK_THROWS_AS(split_disjoint_sources(c, 100, 2000, 1), ValidationError);
}
