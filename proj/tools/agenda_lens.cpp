// agenda-lens: operator entry point for ingest, synth, sample, train,
// evaluate, flag, serve and report.

#include "agenda/corpus.hpp"
#include "agenda/error.hpp"
#include "agenda/evaluation.hpp"
#include "agenda/pipeline.hpp"
#include "agenda/registry.hpp"
#include "agenda/sampling.hpp"
#include "agenda/sentiment.hpp"
#include "agenda/service.hpp"
#include "agenda/synth.hpp"

#include "svg.hpp"

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#ifndef AGENDA_DATA_DIR
#define AGENDA_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace agenda;

namespace {

struct RunConfig {
    std::string corpus;
    std::string corpus_format = "jsonl";
    std::string gold;
    std::string ratings;
    std::string label_site_map;
    std::string registry = "registry";
    std::string backend = "toy";
    std::string encoder_dir;
    bool word_merged = true;
    json train_overrides = json::object();
    SamplingOptions sampling;
    SplitSizes split;
    std::size_t folds = 10;
    std::uint64_t fold_seed = 0;
    double l2 = 1e-4;
    std::string combiner_features = "gold";
    std::string lexicon = std::string(AGENDA_DATA_DIR) + "/lexicon";
    std::string stopwords = std::string(AGENDA_DATA_DIR) + "/stopwords_en.txt";
    std::string out = "out";
    std::vector<std::uint64_t> seeds;
    json service = json::object();
    fs::path config_path;

    TrainConfig train_config() const {
        TrainConfig c = train_config_from_json(train_overrides, default_train_config(backend));
        if (!seeds.empty()) c.seeds = seeds;
        if (c.seeds.empty()) throw ValidationError("at least one training seed is required");
        return c;
    }

    BackendOptions backend_options() const { return {encoder_dir, word_merged}; }
};

// Paths in a config file are relative to the file.
std::string resolve(const fs::path& base, const std::string& p) {
    if (p.empty() || fs::path(p).is_absolute()) return p;
    return (base / p).lexically_normal().string();
}

RunConfig load_run_config(const std::string& path) {
    RunConfig c;
    if (path.empty()) return c;
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
    const fs::path base = fs::path(path).parent_path();
    c.config_path = path;
    try {
        c.corpus = resolve(base, j.value("corpus", c.corpus));
        c.corpus_format = j.value("corpus_format", c.corpus_format);
        c.gold = resolve(base, j.value("gold", c.gold));
        c.ratings = resolve(base, j.value("ratings", c.ratings));
        c.label_site_map = resolve(base, j.value("label_site_map", c.label_site_map));
        c.registry = resolve(base, j.value("registry", c.registry));
        c.backend = j.value("backend", c.backend);
        c.encoder_dir = resolve(base, j.value("encoder_dir", c.encoder_dir));
        c.word_merged = j.value("word_merged", c.word_merged);
        if (j.contains("train")) c.train_overrides = j["train"];
        if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
        if (j.contains("sampling")) {
            const auto& s = j["sampling"];
            c.sampling.n_pos = s.value("n_pos", c.sampling.n_pos);
            c.sampling.neg_ratio = s.value("neg_ratio", c.sampling.neg_ratio);
            c.sampling.threshold = s.value("threshold", c.sampling.threshold);
        }
        if (j.contains("split")) {
            c.split.dev = j["split"].value("dev", c.split.dev);
            c.split.test = j["split"].value("test", c.split.test);
        }
        if (j.contains("combiner")) {
            const auto& s = j["combiner"];
            c.folds = s.value("folds", c.folds);
            c.fold_seed = s.value("seed", c.fold_seed);
            c.l2 = s.value("l2", c.l2);
            c.combiner_features = s.value("features", c.combiner_features);
        }
        c.lexicon = resolve(base, j.value("lexicon", c.lexicon));
        c.stopwords = resolve(base, j.value("stopwords", c.stopwords));
        c.out = resolve(base, j.value("out", c.out));
        if (j.contains("service")) {
            c.service = j["service"];
            for (const char* key : {"registry", "log_path"}) {
                if (c.service.contains(key)) c.service[key] = resolve(base, c.service[key].get<std::string>());
            }
        }
    } catch (const json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
    if (c.combiner_features != "gold" && c.combiner_features != "model" && c.combiner_features != "weak") {
        throw ValidationError("combiner.features must be gold, model or weak");
    }
    return c;
}

CorpusFormat corpus_format(const std::string& name) {
    if (name == "jsonl") return CorpusFormat::jsonl;
    if (name == "csv") return CorpusFormat::csv_manifest;
    throw ValidationError("unknown corpus format '" + name + "' (expected jsonl or csv)");
}

void require(const std::string& value, const char* what) {
    if (value.empty()) throw ValidationError(std::string("no ") + what + " given (set it in the config or on the command line)");
}

Corpus load_run_corpus(const RunConfig& c) {
    require(c.corpus, "corpus");
    return load_corpus(c.corpus, corpus_format(c.corpus_format));
}

LabelSiteMap run_label_site_map(const RunConfig& c, const Corpus& corpus) {
    return c.label_site_map.empty() ? label_site_map(corpus) : load_label_site_map(c.label_site_map);
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

std::string percent(double fraction) { return fmt(100.0 * fraction, 1); }

// ---------------------------------------------------------------------------
// ingest

void cmd_ingest(const RunConfig& c, const std::string& input, const std::string& format, const std::string& names,
                const std::string& gold, const std::string& out_path) {
    const Corpus raw = load_corpus(input, corpus_format(format));
    std::map<std::string, std::vector<std::string>> variants;
    if (!names.empty()) {
        std::ifstream in(names);
        if (!in) throw NotFoundError("cannot open name variants " + names);
        variants = json::parse(in).get<std::map<std::string, std::vector<std::string>>>();
    }
    std::vector<Article> scrubbed;
    for (const auto& a : raw.articles()) {
        auto v = variants.count(a.source) ? variants[a.source] : std::vector<std::string>{};
        if (v.empty()) {
            // The site name with and without its top-level domain.
            v.push_back(a.source);
            const auto dot = a.source.rfind('.');
            if (dot != std::string::npos && dot > 0) v.push_back(a.source.substr(0, dot));
        }
        scrubbed.push_back(scrub_source(a, v));
    }
    const Corpus corpus(std::move(scrubbed));
    const fs::path target = out_path.empty() ? fs::path(c.out) / "corpus.jsonl" : fs::path(out_path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    save_corpus(corpus, target);
    std::cout << "ingested " << corpus.size() << " articles from " << corpus.sources().size() << " sources -> "
              << target.string() << "\n";
    if (!gold.empty()) {
        const auto g = load_gold(gold, &corpus);
        std::cout << "validated " << g.size() << " gold annotations\n";
    }
}

// ---------------------------------------------------------------------------
// synth

void cmd_synth(const RunConfig& c, const SynthOptions& options) {
    const SynthCorpus sc = synthesize(options);
    const fs::path dir = c.out;
    fs::create_directories(dir);
    save_corpus(sc.corpus, dir / "corpus.jsonl");
    save_gold(sc.gold, dir / "gold.jsonl");
    save_ratings_csv(sc.ratings, dir / "ratings.csv");
    write_text(dir / "label_site_map.json", to_json(label_site_map(sc.corpus)).dump(1) + "\n");
    json markers = json::object();
    for (const auto& [id, positions] : sc.marker_positions) markers[id] = positions;
    write_text(dir / "markers.json", markers.dump() + "\n");
    const json run = {{"corpus", "corpus.jsonl"},
                      {"gold", "gold.jsonl"},
                      {"ratings", "ratings.csv"},
                      {"registry", "registry"},
                      {"out", "eval"},
                      {"backend", "toy"},
                      {"split", {{"dev", 150}, {"test", 150}}},
                      {"synth",
                       {{"seed", options.seed},
                        {"positives_per_feature", options.positives_per_feature},
                        {"average_articles", options.average_articles},
                        {"signal", options.signal},
                        {"marker_noise", options.marker_noise},
                        {"gold_articles", options.gold_articles}}}};
    write_text(dir / "agenda-lens.json", run.dump(2) + "\n");
    std::cout << "synthesized " << sc.corpus.size() << " articles (" << sc.gold.size() << " gold) from "
              << sc.corpus.sources().size() << " sources -> " << dir.string() << "\n";
}

// ---------------------------------------------------------------------------
// sample

std::vector<FeatureLabel> selected_features(const std::vector<std::string>& names) {
    if (names.empty()) return {kRationaleFeatures.begin(), kRationaleFeatures.end()};
    std::vector<FeatureLabel> out;
    for (const auto& n : names) {
        const FeatureLabel f = label_from_string(n);
        if (std::find(kRationaleFeatures.begin(), kRationaleFeatures.end(), f) == kRationaleFeatures.end()) {
            throw ValidationError("'" + n + "' is not a rationale feature");
        }
        out.push_back(f);
    }
    return out;
}

json split_json(const SplitSpec& s) {
    return {{"seed", s.seed}, {"train", s.train}, {"dev", s.dev}, {"test", s.test}};
}

void cmd_sample(const RunConfig& c, std::uint64_t seed, const std::vector<std::string>& features) {
    const Corpus corpus = load_run_corpus(c);
    const LabelSiteMap map = run_label_site_map(c, corpus);
    const fs::path dir = c.out;
    fs::create_directories(dir);
    for (FeatureLabel f : selected_features(features)) {
        const TrainingSet ts = build_training_set(f, corpus, map, seed, c.sampling);
        const std::string name(to_string(f));
        write_sampling_manifest(ts, dir / (name + ".manifest.jsonl"));
        std::vector<std::string> members = ts.positives;
        members.insert(members.end(), ts.negatives.begin(), ts.negatives.end());
        const std::set<std::string> positives(ts.positives.begin(), ts.positives.end());
        const SplitSpec split = split_disjoint_sources(corpus.subset(members), c.split.dev, c.split.test, seed,
                                                       [&](const Article& a) { return positives.count(a.id) > 0; });
        write_text(dir / (name + ".split.json"), split_json(split).dump() + "\n");
        std::cout << name << ": " << ts.positives.size() << " positives, " << ts.negatives.size()
                  << " negatives from {";
        bool first = true;
        for (const auto& [l, n] : ts.negative_allocation) {
            std::cout << (first ? "" : ", ") << to_string(l) << ": " << n;
            first = false;
        }
        std::cout << "}; split " << split.train.size() << "/" << split.dev.size() << "/" << split.test.size() << "\n";
    }
}

// ---------------------------------------------------------------------------
// train

std::vector<std::pair<const GoldAnnotation*, AgendaBucket>> scored_gold(const std::map<std::string, GoldAnnotation>& gold) {
    std::vector<std::pair<const GoldAnnotation*, AgendaBucket>> out;
    for (const auto& [id, g] : gold) {
        if (g.agenda_score) out.emplace_back(&g, bucket_score(*g.agenda_score));
    }
    return out;
}

FeatureVector model_feature_vector(const std::map<FeatureLabel, FeatureModel>& models, const SentimentScorer& scorer,
                                   const Article& a) {
    const Pipeline p(models, scorer, CombinerModel{});
    return p.analyze(a).features;
}

void cmd_train(const RunConfig& c) {
    const Corpus corpus = load_run_corpus(c);
    const LabelSiteMap map = run_label_site_map(c, corpus);
    const TrainConfig config = c.train_config();
    std::shared_ptr<const ClassifierBackend> backend = make_backend(c.backend, c.backend_options());
    const Registry registry(c.registry);
    fs::create_directories(registry.root());

    std::map<FeatureLabel, FeatureModel> primary;
    std::map<FeatureLabel, json> metrics;
    for (std::size_t s = 0; s < config.seeds.size(); ++s) {
        const std::uint64_t seed = config.seeds[s];
        for (FeatureLabel f : kRationaleFeatures) {
            const FeatureRun run = run_feature(f, corpus, map, backend, config, seed, c.sampling, c.split);
            const std::set<std::string> pos(run.training_set.positives.begin(), run.training_set.positives.end());
            const auto dev = evaluate_feature(run.model, corpus, run.split.dev, pos);
            const auto test = evaluate_feature(run.model, corpus, run.split.test, pos);
            registry.save_feature_model(run.model, s == 0);
            if (s == 0) primary.emplace(f, run.model);
            metrics[f]["seeds"][std::to_string(seed)] = {
                {"dev", {{"rationale", dev.balanced_accuracy}, {"extractor", dev.extractor_balanced_accuracy},
                         {"examples", dev.examples}}},
                {"test", {{"rationale", test.balanced_accuracy}, {"extractor", test.extractor_balanced_accuracy},
                          {"examples", test.examples}}},
                {"positives", run.training_set.positives.size()},
                {"negatives", run.training_set.negatives.size()},
                {"extractor_epochs", run.model.extractor_report.epochs_run},
                {"predictor_epochs", run.model.predictor_report.epochs_run}};
            std::cout << "seed " << seed << " " << to_string(f) << ": dev " << percent(dev.balanced_accuracy)
                      << " test " << percent(test.balanced_accuracy) << " (extractor "
                      << percent(test.extractor_balanced_accuracy) << ")\n";
        }
    }
    for (const auto& [f, m] : metrics) registry.save_metrics(f, m);

    registry.save_lexicon(c.lexicon);
    const SentimentScorer scorer(ValenceLexicon::load_dir(c.lexicon));

    // The combiner learns from gold agenda scores.
    require(c.gold, "gold annotation file (needed to fit the combiner)");
    const auto gold = load_gold(c.gold, &corpus);
    std::vector<FeatureVector> xs;
    std::vector<AgendaBucket> ys;
    for (const auto& [g, bucket] : scored_gold(gold)) {
        const Article& a = corpus.at(g->article_id);
        if (c.combiner_features == "gold") xs.push_back(gold_feature_vector(*g));
        else if (c.combiner_features == "weak") xs.push_back(weak_feature_vector(a));
        else xs.push_back(model_feature_vector(primary, scorer, a));
        ys.push_back(bucket);
    }
    CombinerConfig cc;
    cc.l2 = c.l2;
    CombinerModel combiner = fit(xs, ys, cc, c.fold_seed);
    combiner.folds = c.folds;
    registry.save_combiner(combiner);

    registry.save_manifest({{"created_by", "agenda-lens"},
                            {"backend", backend->id()},
                            {"encoder_dir", c.encoder_dir},
                            {"word_merged", c.word_merged},
                            {"seeds", config.seeds},
                            {"primary_seed", config.seeds.front()},
                            {"features", [] {
                                 json f = json::array();
                                 for (FeatureLabel l : kRationaleFeatures) f.push_back(to_string(l));
                                 return f;
                             }()},
                            {"lexicon_version", scorer.lexicon().version()},
                            {"combiner_features", c.combiner_features},
                            {"combiner_articles", xs.size()}});
    std::cout << "combiner fit on " << xs.size() << " gold articles (" << c.combiner_features
              << " features); registry -> " << registry.root().string() << "\n";
}

// ---------------------------------------------------------------------------
// evaluate

struct SeedPredictions {
    std::map<FeatureLabel, std::vector<FeaturePrediction>> rationale;
    std::map<FeatureLabel, std::vector<int>> extractor;
};

std::string mean_cell(const std::vector<double>& v) { return v.empty() ? "n/a" : fmt(mean_std(v).mean, 1); }
std::string std_cell(const std::vector<double>& v) { return v.size() < 2 ? "" : fmt(mean_std(v).std, 2); }

void cmd_evaluate(const RunConfig& c) {
    const Corpus corpus = load_run_corpus(c);
    require(c.gold, "gold annotation file");
    const auto gold = load_gold(c.gold, &corpus);
    const Registry registry(c.registry);
    const json manifest = registry.manifest();
    const auto seeds = manifest.at("seeds").get<std::vector<std::uint64_t>>();
    const auto backend = registry.backend(c.backend_options());
    const SentimentScorer scorer(ValenceLexicon::load_dir(registry.root() / "lexicon"));
    const TrainConfig train_config = c.train_config();
    const fs::path out = c.out;
    fs::create_directories(out);
    CombinerConfig cc;
    cc.l2 = c.l2;

    // Gold articles in id order.
    std::vector<const GoldAnnotation*> golds;
    std::vector<const Article*> articles;
    for (const auto& [id, g] : gold) {
        golds.push_back(&g);
        articles.push_back(&corpus.at(id));
    }

    std::map<std::uint64_t, SeedPredictions> predictions;
    std::vector<int> negsent;
    for (const Article* a : articles) negsent.push_back(scorer.negative_sentiment(*a) ? 1 : 0);
    for (std::uint64_t seed : seeds) {
        auto& sp = predictions[seed];
        for (FeatureLabel f : kRationaleFeatures) {
            const FeatureModel fm = registry.load_feature_model(f, backend, seed);
            for (const Article* a : articles) {
                sp.rationale[f].push_back(predict_feature(fm, *a));
                sp.extractor[f].push_back(predict_extractor(fm, *a) >= 0.5 ? 1 : 0);
            }
        }
    }

    // Combiner comparison on articles with an agenda score.
    std::vector<std::size_t> scored;
    std::vector<AgendaBucket> buckets;
    for (std::size_t i = 0; i < golds.size(); ++i) {
        if (golds[i]->agenda_score) {
            scored.push_back(i);
            buckets.push_back(bucket_score(*golds[i]->agenda_score));
        }
    }
    auto vectors = [&](auto&& make) {
        std::vector<FeatureVector> xs;
        for (std::size_t i : scored) xs.push_back(make(i));
        return xs;
    };
    auto predicted_vector = [&](const SeedPredictions& sp, bool rationale, std::size_t i) {
        FeatureVector fv;
        fv.article_id = golds[i]->article_id;
        for (FeatureLabel f : kRationaleFeatures) {
            const std::size_t j = model_feature_index(f);
            fv.values[j] = rationale ? (sp.rationale.at(f)[i].label ? 1 : 0) : sp.extractor.at(f)[i];
            fv.provenance[j] = Provenance::model;
        }
        fv.values[model_feature_index(FeatureLabel::negative_sentiment)] = negsent[i];
        return fv;
    };

    CrossValidationResult oracle_cv;
    CrossValidationResult weak_cv;
    const auto oracle_x = vectors([&](std::size_t i) { return gold_feature_vector(*golds[i]); });
    const auto weak_x = vectors([&](std::size_t i) { return weak_feature_vector(*articles[i]); });
    std::vector<std::vector<std::string>> table3;
    auto add_row = [&](const std::string& method, const std::vector<double>& acc, const std::vector<double>& bal) {
        table3.push_back({method, mean_cell(acc), std_cell(acc), mean_cell(bal), std_cell(bal),
                          std::to_string(scored.size())});
    };
    {
        const auto oracle = combiner_row("Oracle logistic regression", oracle_x, buckets, c.folds, c.fold_seed, cc, &oracle_cv);
        add_row(oracle.method, {oracle.accuracy.mean}, {oracle.balanced_accuracy.mean});
        const auto majority = majority_row(buckets, c.folds, c.fold_seed);
        add_row("Predict majority class", {majority.accuracy.mean}, {majority.balanced_accuracy.mean});
        const auto weak = combiner_row("Weak logistic regression", weak_x, buckets, c.folds, c.fold_seed, cc, &weak_cv);
        add_row(weak.method, {weak.accuracy.mean}, {weak.balanced_accuracy.mean});
    }
    std::vector<std::string> texts;
    for (std::size_t i : scored) texts.push_back(articles[i]->text());
    std::vector<double> e2e_acc, e2e_bal, ext_acc, ext_bal, rat_acc, rat_bal;
    std::array<double, kFeatureCount> ext_w{}, rat_w{};
    for (std::uint64_t seed : seeds) {
        const auto e2e = agenda_baseline_row(texts, buckets, backend, train_config, c.folds, seed);
        e2e_acc.push_back(e2e.accuracy.mean);
        e2e_bal.push_back(e2e.balanced_accuracy.mean);
        CrossValidationResult cv;
        const auto& sp = predictions.at(seed);
        const auto ext = combiner_row("", vectors([&](std::size_t i) { return predicted_vector(sp, false, i); }),
                                      buckets, c.folds, c.fold_seed, cc, &cv);
        for (std::size_t j = 0; j < kFeatureCount; ++j) ext_w[j] += cv.mean_weights[j] / static_cast<double>(seeds.size());
        ext_acc.push_back(ext.accuracy.mean);
        ext_bal.push_back(ext.balanced_accuracy.mean);
        const auto rat = combiner_row("", vectors([&](std::size_t i) { return predicted_vector(sp, true, i); }),
                                      buckets, c.folds, c.fold_seed, cc, &cv);
        for (std::size_t j = 0; j < kFeatureCount; ++j) rat_w[j] += cv.mean_weights[j] / static_cast<double>(seeds.size());
        rat_acc.push_back(rat.accuracy.mean);
        rat_bal.push_back(rat.balanced_accuracy.mean);
    }
    add_row("End-to-end classifier", e2e_acc, e2e_bal);
    add_row("Extractor feature system", ext_acc, ext_bal);
    add_row("Rationale feature system", rat_acc, rat_bal);
    write_csv(out / "combiner.csv",
              {"method", "accuracy", "accuracy_std", "balanced_accuracy", "balanced_accuracy_std", "articles"}, table3);

    // Learned weights; a feature that never varies has no weight to report.
    auto weight_cell = [&](const std::vector<FeatureVector>& xs, const std::array<double, kFeatureCount>& w,
                           std::size_t j) {
        bool varies = false;
        for (const auto& x : xs) varies = varies || x.values[j] != xs.front().values[j];
        return varies ? fmt(w[j], 2) : std::string("n/a");
    };
    std::vector<std::vector<std::string>> table4;
    const auto model_x = vectors([&](std::size_t i) { return predicted_vector(predictions.at(seeds.front()), true, i); });
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        table4.push_back({std::string(to_string(kModelFeatures[j])), weight_cell(oracle_x, oracle_cv.mean_weights, j),
                          weight_cell(weak_x, weak_cv.mean_weights, j), weight_cell(model_x, ext_w, j),
                          weight_cell(model_x, rat_w, j)});
    }
    write_csv(out / "weights.csv", {"feature", "annotated", "weak", "extractor", "rationale"}, table4);

    // Feature classifiers against weak labels: dev and test from training, gold articles here.
    std::vector<std::vector<std::string>> table5;
    for (FeatureLabel f : kRationaleFeatures) {
        const json metrics = [&] {
            std::ifstream in(registry.feature_dir(f) / "metrics.json");
            return in ? json::parse(in) : json::object();
        }();
        std::map<std::string, std::vector<double>> cols;
        for (std::uint64_t seed : seeds) {
            const auto key = std::to_string(seed);
            if (metrics.contains("seeds") && metrics["seeds"].contains(key)) {
                const auto& m = metrics["seeds"][key];
                cols["dev_extractor"].push_back(100 * m["dev"]["extractor"].get<double>());
                cols["dev_rationale"].push_back(100 * m["dev"]["rationale"].get<double>());
                cols["test_extractor"].push_back(100 * m["test"]["extractor"].get<double>());
                cols["test_rationale"].push_back(100 * m["test"]["rationale"].get<double>());
            }
            std::vector<int> weak, rat;
            for (std::size_t i = 0; i < articles.size(); ++i) {
                weak.push_back(articles[i]->has_weak_label(f) ? 1 : 0);
                rat.push_back(predictions.at(seed).rationale.at(f)[i].label ? 1 : 0);
            }
            cols["gold_extractor"].push_back(100 * balanced_accuracy(predictions.at(seed).extractor.at(f), weak));
            cols["gold_rationale"].push_back(100 * balanced_accuracy(rat, weak));
        }
        std::vector<std::string> row{std::string(to_string(f))};
        for (const char* k : {"dev_extractor", "dev_rationale", "test_extractor", "test_rationale", "gold_extractor",
                              "gold_rationale"}) {
            row.push_back(mean_cell(cols[k]));
            row.push_back(std_cell(cols[k]));
        }
        table5.push_back(row);
    }
    write_csv(out / "features.csv",
              {"feature", "dev_extractor", "dev_extractor_std", "dev_rationale", "dev_rationale_std", "test_extractor",
               "test_extractor_std", "test_rationale", "test_rationale_std", "gold_extractor", "gold_extractor_std",
               "gold_rationale", "gold_rationale_std"},
              table5);

    // Agreement of predicted-positive sets with gold-positive sets.
    std::vector<std::vector<std::string>> table6;
    auto agreement = [&](const std::set<std::string>& pred, const std::set<std::string>& positive)
        -> std::optional<LabelAgreement> {
        if (positive.empty()) return std::nullopt;
        return label_agreement(pred, positive);
    };
    for (FeatureLabel f : kModelFeatures) {
        std::set<std::string> gold_pos, weak_pos;
        for (std::size_t i = 0; i < golds.size(); ++i) {
            if (golds[i]->feature_labels.count(f)) gold_pos.insert(golds[i]->article_id);
            if (articles[i]->has_weak_label(f)) weak_pos.insert(golds[i]->article_id);
        }
        std::vector<std::string> row{std::string(to_string(f))};
        if (f == FeatureLabel::negative_sentiment) {
            std::set<std::string> lex;
            for (std::size_t i = 0; i < golds.size(); ++i) {
                if (negsent[i]) lex.insert(golds[i]->article_id);
            }
            const auto a = agreement(lex, gold_pos);
            const std::string iou = a ? percent(a->iou) : "n/a";
            const std::string rec = a ? percent(a->recall_1) : "n/a";
            row.insert(row.end(), {"n/a", iou, "", iou, "", "n/a", rec, "", rec, ""});
            table6.push_back(row);
            continue;
        }
        const auto w = agreement(weak_pos, gold_pos);
        std::vector<double> ext_iou, ext_rec, rat_iou, rat_rec;
        for (std::uint64_t seed : seeds) {
            std::set<std::string> ext, rat;
            for (std::size_t i = 0; i < golds.size(); ++i) {
                if (predictions.at(seed).extractor.at(f)[i]) ext.insert(golds[i]->article_id);
                if (predictions.at(seed).rationale.at(f)[i].label) rat.insert(golds[i]->article_id);
            }
            if (const auto a = agreement(ext, gold_pos)) ext_iou.push_back(100 * a->iou), ext_rec.push_back(100 * a->recall_1);
            if (const auto a = agreement(rat, gold_pos)) rat_iou.push_back(100 * a->iou), rat_rec.push_back(100 * a->recall_1);
        }
        row.insert(row.end(), {w ? percent(w->iou) : "n/a", mean_cell(ext_iou), std_cell(ext_iou), mean_cell(rat_iou),
                               std_cell(rat_iou), w ? percent(w->recall_1) : "n/a", mean_cell(ext_rec),
                               std_cell(ext_rec), mean_cell(rat_rec), std_cell(rat_rec)});
        table6.push_back(row);
    }
    write_csv(out / "agreement.csv",
              {"feature", "iou_weak", "iou_extractor", "iou_extractor_std", "iou_rationale", "iou_rationale_std",
               "recall1_weak", "recall1_extractor", "recall1_extractor_std", "recall1_rationale",
               "recall1_rationale_std"},
              table6);

    // Pairwise rank-sum comparisons of agenda scores by gold label.
    const PairwiseReport pairwise = wilcoxon_pairwise(scores_by_label(gold));
    std::vector<std::vector<std::string>> pw;
    for (const auto& r : pairwise.results) {
        pw.push_back({r.label_a, r.label_b, fmt(r.mean_difference, 4), fmt(r.p_value, 6),
                      r.significant_01 ? "**" : (r.significant_05 ? "*" : "")});
    }
    write_csv(out / "pairwise.csv", {"label_1", "label_2", "score_mean_difference", "p_value", "significance"}, pw);

    // Rationale overlap with human evidence spans.
    const StopwordList stopwords = StopwordList::load(c.stopwords);
    std::vector<std::vector<std::string>> overlap;
    for (FeatureLabel f : kRationaleFeatures) {
        std::vector<double> pos_mode, str_mode;
        double baseline = 0.0;
        std::size_t n = 0;
        for (std::uint64_t seed : seeds) {
            double pos_sum = 0.0, str_sum = 0.0, base_sum = 0.0;
            n = 0;
            for (std::size_t i = 0; i < golds.size(); ++i) {
                std::vector<EvidenceSpan> spans;
                for (const auto& s : golds[i]->evidence_spans) {
                    if (s.feature == f) spans.push_back(s);
                }
                if (spans.empty()) continue;
                const std::string text = articles[i]->text();
                const Rationale& r = predictions.at(seed).rationale.at(f)[i].rationale;
                pos_sum += rationale_overlap(r, spans, stopwords, text, OverlapMode::position);
                str_sum += rationale_overlap(r, spans, stopwords, text, OverlapMode::string);
                base_sum += rationale_overlap(first_n_chars_baseline(text, 350), spans, stopwords, text,
                                              OverlapMode::position);
                ++n;
            }
            if (n == 0) continue;
            pos_mode.push_back(pos_sum / static_cast<double>(n));
            str_mode.push_back(str_sum / static_cast<double>(n));
            baseline = base_sum / static_cast<double>(n);
        }
        overlap.push_back({std::string(to_string(f)), std::to_string(n), mean_cell(pos_mode), std_cell(pos_mode),
                           mean_cell(str_mode), std_cell(str_mode), n ? fmt(baseline, 1) : "n/a"});
    }
    write_csv(out / "overlap.csv",
              {"feature", "articles", "rationale_overlap", "rationale_overlap_std", "string_overlap",
               "string_overlap_std", "first_350_chars"},
              overlap);

    json meta = {{"registry", registry.root().string()},
                 {"seeds", seeds},
                 {"folds", c.folds},
                 {"fold_seed", c.fold_seed},
                 {"gold_articles", golds.size()},
                 {"scored_articles", scored.size()},
                 {"stopwords_hash", stopwords.hash()},
                 {"stopwords_count", stopwords.size()},
                 {"lexicon_version", scorer.lexicon().version()},
                 {"pairwise_skipped", pairwise.skipped}};

    if (!c.ratings.empty()) {
        const AlphaEstimate alpha = cronbach_alpha(load_ratings_csv(c.ratings), 2000, c.fold_seed);
        write_csv(out / "alpha.csv", {"measure", "alpha", "ci_low", "ci_high", "items"},
                  {{"agenda_score", fmt(alpha.alpha, 3), fmt(alpha.ci_low, 3), fmt(alpha.ci_high, 3),
                    std::to_string(alpha.items_used)}});
    }
    write_text(out / "evaluation.json", meta.dump(2) + "\n");

    for (const auto& r : table3) std::cout << r[0] << ": accuracy " << r[1] << ", balanced accuracy " << r[3] << "\n";
    std::cout << "tables -> " << out.string() << "\n";
}

// ---------------------------------------------------------------------------
// flag

void cmd_flag(const RunConfig& c, const std::string& input, const std::string& output) {
    require(input, "input article file");
    const Pipeline pipeline = Registry(c.registry).load_pipeline(c.backend_options());
    const Corpus articles = load_corpus(input, corpus_format(c.corpus_format));
    std::ofstream file;
    if (!output.empty()) {
        if (fs::path(output).has_parent_path()) fs::create_directories(fs::path(output).parent_path());
        file.open(output, std::ios::binary);
        if (!file) throw Error("cannot write " + output);
    }
    std::ostream& out = output.empty() ? std::cout : file;
    std::size_t harmful = 0;
    for (const auto& a : articles.articles()) {
        const ArticleAnalysis analysis = pipeline.analyze(a);
        harmful += analysis.verdict.bucket == AgendaBucket::harmful ? 1 : 0;
        out << to_json(analysis).dump() << "\n";
    }
    std::cerr << "flagged " << articles.size() << " articles: " << harmful << " harmful\n";
}

// ---------------------------------------------------------------------------
// serve

HttpServer* g_server = nullptr;

void cmd_serve(const RunConfig& c, const std::string& log, const std::string& bind, const std::string& token) {
    ServiceConfig sc;
    sc.registry = c.service.value("registry", c.registry);
    sc.log_path = c.service.value("log_path", sc.log_path);
    sc.host = c.service.value("host", sc.host);
    sc.port = c.service.value("port", sc.port);
    sc.token = c.service.value("token", sc.token);
    sc.page_size = c.service.value("page_size", sc.page_size);
    if (c.service.contains("bind")) {
        setenv("AGENDA_LENS_BIND", c.service["bind"].get<std::string>().c_str(), 0);
    }
    apply_env_overrides(sc);
    if (!log.empty()) sc.log_path = log;
    if (!token.empty()) sc.token = token;
    if (!bind.empty()) {
        const auto colon = bind.rfind(':');
        if (colon == std::string::npos) throw ValidationError("--bind must be host:port");
        sc.host = bind.substr(0, colon);
        sc.port = std::stoi(bind.substr(colon + 1));
    }

    const Registry registry(sc.registry);
    std::shared_ptr<const Pipeline> pipeline;
    json models;
    try {
        pipeline = std::make_shared<const Pipeline>(registry.load_pipeline(c.backend_options()));
        models = registry.metadata();
    } catch (const Error& e) {
        std::cerr << "warning: serving without models (" << e.what() << "); /v1/flag answers 503\n";
    }
    ReviewStore store(sc.log_path);
    const FlagService service(pipeline, store, models, sc);
    HttpServer server(service);
    const int port = server.bind(sc.host, sc.port);
    g_server = &server;
    std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
    std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
    std::cerr << "serving on " << sc.host << ":" << port << " (" << store.size() << " records replayed from "
              << sc.log_path << ")\n";
    server.listen();
    g_server = nullptr;
}

// ---------------------------------------------------------------------------
// report

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open " + path.string() + " (run evaluate first)");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char ch = line[i];
            if (quoted) {
                if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') cell += '"', ++i;
                else if (ch == '"') quoted = false;
                else cell += ch;
            } else if (ch == '"') {
                quoted = true;
            } else if (ch == ',') {
                cells.push_back(cell);
                cell.clear();
            } else {
                cell += ch;
            }
        }
        cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

double cell_value(const std::string& s) {
    if (s.empty() || s == "n/a") return std::nan("");
    return std::stod(s);
}

void cmd_report(const RunConfig& c, const std::string& input, const std::string& reviews) {
    const fs::path in = input.empty() ? fs::path(c.out) : fs::path(input);
    const fs::path out = c.out;
    fs::create_directories(out);

    const auto weights = read_csv(in / "weights.csv");
    for (std::size_t col = 1; col < weights.front().size(); ++col) {
        std::vector<svg::Bar> bars;
        for (std::size_t r = 1; r < weights.size(); ++r) {
            const double v = cell_value(weights[r][col]);
            if (!std::isnan(v)) bars.push_back({weights[r][0], v});
        }
        write_text(out / ("weights_" + weights.front()[col] + ".svg"),
                   svg::bar_chart("Combiner weights (" + weights.front()[col] + " features)", bars));
    }

    const auto features = read_csv(in / "features.csv");
    {
        std::vector<std::string> rows, cols;
        std::vector<std::vector<double>> values;
        for (std::size_t col = 1; col < features.front().size(); col += 2) cols.push_back(features.front()[col]);
        for (std::size_t r = 1; r < features.size(); ++r) {
            rows.push_back(features[r][0]);
            values.emplace_back();
            for (std::size_t col = 1; col < features[r].size(); col += 2) values.back().push_back(cell_value(features[r][col]));
        }
        write_text(out / "features.svg",
                   svg::heatmap("Feature classifier balanced accuracy (%)", rows, cols, values, {}, false));
    }

    const auto pairwise = read_csv(in / "pairwise.csv");
    {
        std::vector<std::string> labels;
        for (std::size_t r = 1; r < pairwise.size(); ++r) {
            if (std::find(labels.begin(), labels.end(), pairwise[r][0]) == labels.end()) labels.push_back(pairwise[r][0]);
        }
        std::vector<std::vector<double>> values(labels.size(), std::vector<double>(labels.size(), std::nan("")));
        std::vector<std::vector<std::string>> marks(labels.size(), std::vector<std::string>(labels.size()));
        auto index = [&](const std::string& l) {
            return static_cast<std::size_t>(std::find(labels.begin(), labels.end(), l) - labels.begin());
        };
        for (std::size_t r = 1; r < pairwise.size(); ++r) {
            const std::size_t a = index(pairwise[r][0]);
            const std::size_t b = index(pairwise[r][1]);
            if (a >= labels.size() || b >= labels.size()) continue;
            values[a][b] = cell_value(pairwise[r][2]);
            marks[a][b] = pairwise[r][4];
        }
        write_text(out / "pairwise.svg",
                   svg::heatmap("Agenda score mean difference (row minus column)", labels, labels, values, marks, true));
    }

    if (!c.gold.empty()) {
        const auto gold = load_gold(c.gold);
        std::map<std::string, std::array<double, 5>> counts;
        for (const auto& [id, g] : gold) {
            if (!g.agenda_score) continue;
            for (FeatureLabel l : g.feature_labels) counts[std::string(to_string(l))][*g.agenda_score - 1] += 1;
        }
        std::vector<std::string> rows;
        std::vector<std::vector<double>> values;
        for (const auto& [label, row] : counts) {
            rows.push_back(label);
            values.emplace_back(row.begin(), row.end());
        }
        write_text(out / "score_distribution.svg",
                   svg::heatmap("Agenda scores per gold label", rows, {"1", "2", "3", "4", "5"}, values, {}, false));
    }

    if (!reviews.empty()) {
        // Moderator decisions exported for an operator-controlled retraining step.
        const ReviewStore store(reviews);
        std::ofstream export_file(out / "reviews_export.jsonl", std::ios::binary);
        std::size_t n = 0;
        for (std::size_t page = 1;; ++page) {
            const Page p = store.list(std::nullopt, page, 500);
            for (const auto& r : p.records) {
                if (r.decisions.empty()) continue;
                const auto& d = r.decisions.back();
                json row = {{"record_id", r.id}, {"article", to_json(r.article)}, {"decision", to_json(d)},
                            {"model_bucket", r.analysis["verdict"]["bucket"]}};
                export_file << row.dump() << "\n";
                ++n;
            }
            if (page * 500 >= p.total) break;
        }
        std::cout << "exported " << n << " reviewed records\n";
    }
    std::cout << "report -> " << out.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"agenda-lens: interpretable harmful-agenda detection"};
    app.require_subcommand(1);
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string backend, registry, out;
    app.add_option("--config", config_path, "JSON run config (default: $AGENDA_LENS_CONFIG)");
    app.add_option("--seed", seed, "random seed (train: a single seed instead of the configured list)");
    app.add_option("--backend", backend, "classifier backend")->check(CLI::IsMember({"toy", "pretrained-encoder"}));
    app.add_option("--registry", registry, "model registry directory");
    app.add_option("--out", out, "output directory");

    std::string corpus, gold, encoder_dir;
    auto corpus_opts = [&](CLI::App* sub) {
        sub->add_option("--corpus", corpus, "corpus JSONL");
        sub->add_option("--gold", gold, "gold annotation JSONL");
        sub->fallthrough();
    };

    auto* ingest = app.add_subcommand("ingest", "validate and scrub a corpus");
    std::string input, format = "jsonl", names, output;
    ingest->add_option("--input", input, "raw corpus")->required();
    ingest->add_option("--format", format, "jsonl or csv");
    ingest->add_option("--names", names, "JSON map of source -> name variants to scrub");
    ingest->add_option("--gold", gold, "gold annotations to validate against the corpus");
    ingest->add_option("--output", output, "scrubbed corpus path (default: <out>/corpus.jsonl)");
    ingest->fallthrough();

    auto* synth = app.add_subcommand("synth", "generate a seeded planted-signal corpus");
    SynthOptions synth_options;
    synth->add_option("--positives", synth_options.positives_per_feature, "articles per feature");
    synth->add_option("--average", synth_options.average_articles, "average-class articles");
    synth->add_option("--signal", synth_options.signal, "marker slot fill probability")->check(CLI::Range(0.0, 1.0));
    synth->add_option("--noise", synth_options.marker_noise, "stray marker probability")->check(CLI::Range(0.0, 1.0));
    synth->add_option("--gold-articles", synth_options.gold_articles, "expected gold-annotated articles");
    synth->fallthrough();

    auto* sample = app.add_subcommand("sample", "write training-set manifests and splits");
    std::vector<std::string> features;
    corpus_opts(sample);
    sample->add_option("--feature", features, "restrict to these features");

    auto* train = app.add_subcommand("train", "train the feature models and the combiner");
    corpus_opts(train);
    train->add_option("--encoder-dir", encoder_dir, "vocab.txt and weights.bin for pretrained-encoder");

    auto* evaluate = app.add_subcommand("evaluate", "write the evaluation tables");
    std::string ratings;
    corpus_opts(evaluate);
    evaluate->add_option("--ratings", ratings, "article_id,rater,score CSV for Cronbach's alpha");
    evaluate->add_option("--encoder-dir", encoder_dir, "encoder directory override");

    auto* flag = app.add_subcommand("flag", "score a file of articles");
    flag->add_option("--input", input, "articles JSONL")->required();
    flag->add_option("--output", output, "verdict JSONL (default: stdout)");
    flag->add_option("--encoder-dir", encoder_dir, "encoder directory override");
    flag->fallthrough();

    auto* serve = app.add_subcommand("serve", "run the flagging and review service");
    std::string log, bind, token;
    serve->add_option("--log", log, "review log path");
    serve->add_option("--bind", bind, "host:port");
    serve->add_option("--token", token, "required X-Agenda-Token value");
    serve->add_option("--encoder-dir", encoder_dir, "encoder directory override");
    serve->fallthrough();

    auto* report = app.add_subcommand("report", "render plots from evaluation tables");
    std::string report_in, reviews;
    report->add_option("--in", report_in, "evaluation directory (default: --out)");
    report->add_option("--gold", gold, "gold annotations for the score distribution plot");
    report->add_option("--reviews", reviews, "review log to export decisions from");
    report->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (config_path.empty()) {
            if (const char* env = std::getenv("AGENDA_LENS_CONFIG")) config_path = env;
        }
        RunConfig c = load_run_config(config_path);
        if (!corpus.empty()) c.corpus = corpus;
        if (!gold.empty()) c.gold = gold;
        if (!ratings.empty()) c.ratings = ratings;
        if (!backend.empty()) c.backend = backend;
        if (!registry.empty()) c.registry = registry;
        if (!encoder_dir.empty()) c.encoder_dir = encoder_dir;
        if (!out.empty()) c.out = out;
        if (seed) c.seeds = {*seed};

        if (*ingest) cmd_ingest(c, input, format, names, gold, output);
        else if (*synth) {
            synth_options.seed = seed.value_or(synth_options.seed);
            cmd_synth(c, synth_options);
        } else if (*sample) cmd_sample(c, seed.value_or(c.train_config().seeds.front()), features);
        else if (*train) cmd_train(c);
        else if (*evaluate) cmd_evaluate(c);
        else if (*flag) cmd_flag(c, input, output);
        else if (*serve) cmd_serve(c, log, bind, token);
        else if (*report) cmd_report(c, report_in, reviews);
    } catch (const std::exception& e) {
        std::cerr << "agenda-lens: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
