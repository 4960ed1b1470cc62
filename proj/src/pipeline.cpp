#include "agenda/pipeline.hpp"

#include "agenda/error.hpp"
#include "agenda/metrics.hpp"

namespace agenda {

using nlohmann::json;

FeatureRun run_feature(FeatureLabel feature, const Corpus& corpus, const LabelSiteMap& map,
                       std::shared_ptr<const ClassifierBackend> backend, const TrainConfig& config,
                       std::uint64_t seed, const SamplingOptions& sampling, const SplitSizes& sizes) {
    FeatureRun run;
    run.training_set = build_training_set(feature, corpus, map, seed, sampling);
    std::vector<std::string> members = run.training_set.positives;
    members.insert(members.end(), run.training_set.negatives.begin(), run.training_set.negatives.end());
    const Corpus sub = corpus.subset(members);
    const std::set<std::string> positives(run.training_set.positives.begin(), run.training_set.positives.end());
    run.split = split_disjoint_sources(sub, sizes.dev, sizes.test, seed,
                                       [&](const Article& a) { return positives.count(a.id) > 0; });
    run.model = train_feature_model(run.training_set, corpus, run.split, std::move(backend), config, seed);
    return run;
}

FeatureEvaluation evaluate_feature(const FeatureModel& fm, const Corpus& corpus, const std::vector<std::string>& ids,
                                   const std::set<std::string>& positives) {
    std::vector<int> gold;
    std::vector<int> pred;
    std::vector<int> extractor;
    for (const auto& id : ids) {
        const Article& a = corpus.at(id);
        gold.push_back(positives.count(id) ? 1 : 0);
        pred.push_back(predict_feature(fm, a).label ? 1 : 0);
        extractor.push_back(predict_extractor(fm, a) >= 0.5 ? 1 : 0);
    }
    FeatureEvaluation e;
    e.examples = ids.size();
    if (ids.empty()) return e;
    e.balanced_accuracy = balanced_accuracy(pred, gold);
    e.accuracy = accuracy(pred, gold);
    e.extractor_balanced_accuracy = balanced_accuracy(extractor, gold);
    return e;
}

Pipeline::Pipeline(std::map<FeatureLabel, FeatureModel> models, SentimentScorer sentiment, CombinerModel combiner)
    : models_(std::move(models)), sentiment_(std::move(sentiment)), combiner_(combiner) {
    for (FeatureLabel f : kRationaleFeatures) {
        if (!models_.count(f)) throw UnavailableError("no model for feature '" + std::string(to_string(f)) + "'");
    }
}

ArticleAnalysis Pipeline::analyze(const Article& article) const {
    if (trim(article.body).empty()) throw ValidationError("article body is empty");
    ArticleAnalysis out;
    out.features.article_id = article.id;
    for (FeatureLabel f : kRationaleFeatures) {
        auto p = predict_feature(models_.at(f), article);
        const std::size_t j = model_feature_index(f);
        out.features.values[j] = p.label ? 1 : 0;
        out.features.provenance[j] = Provenance::model;
        out.predictions.push_back(std::move(p));
    }
    out.compound_polarity = sentiment_.compound_polarity(article.title + " " + article.body);
    const std::size_t s = model_feature_index(FeatureLabel::negative_sentiment);
    out.features.values[s] = out.compound_polarity < 0 ? 1 : 0;
    out.features.provenance[s] = Provenance::model;
    out.verdict = predict(combiner_, out.features);
    return out;
}

json to_json(const ArticleAnalysis& a) {
    json features = json::array();
    for (const auto& p : a.predictions) features.push_back(to_json(p));
    return {{"article_id", a.features.article_id},
            {"verdict", to_json(a.verdict, a.features)},
            {"features", features},
            {"negative_sentiment",
             {{"label", a.compound_polarity < 0}, {"compound", a.compound_polarity}}}};
}

FeatureVector gold_feature_vector(const GoldAnnotation& gold) {
    FeatureVector fv;
    fv.article_id = gold.article_id;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        fv.values[j] = gold.feature_labels.count(kModelFeatures[j]) ? 1 : 0;
        fv.provenance[j] = Provenance::annotated;
    }
    return fv;
}

FeatureVector weak_feature_vector(const Article& article) {
    FeatureVector fv;
    fv.article_id = article.id;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        fv.values[j] = article.has_weak_label(kModelFeatures[j]) ? 1 : 0;
        fv.provenance[j] = Provenance::weak;
    }
    return fv;
}

}  // namespace agenda
