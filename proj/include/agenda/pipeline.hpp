#pragma once

#include "agenda/combiner.hpp"
#include "agenda/feature_model.hpp"
#include "agenda/sampling.hpp"
#include "agenda/sentiment.hpp"

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace agenda {

/// Sizes of the per-feature held-out splits.
struct SplitSizes {
    std::size_t dev = 150;
    std::size_t test = 150;
};

/// One feature's training set, source-disjoint split and trained model.
struct FeatureRun {
    TrainingSet training_set;
    SplitSpec split;
    FeatureModel model;
};

/// Samples, splits (test sources disjoint from train/dev, both classes drawn
/// into test) and trains one feature model.
FeatureRun run_feature(FeatureLabel feature, const Corpus& corpus, const LabelSiteMap& map,
                       std::shared_ptr<const ClassifierBackend> backend, const TrainConfig& config,
                       std::uint64_t seed, const SamplingOptions& sampling = {}, const SplitSizes& sizes = {});

struct FeatureEvaluation {
    double balanced_accuracy = 0.0;
    double accuracy = 0.0;
    /// Full-text extractor on the same examples, for reference.
    double extractor_balanced_accuracy = 0.0;
    std::size_t examples = 0;
};

/// Scores `ids` with the rationale pipeline; positives are the ids in `positives`.
FeatureEvaluation evaluate_feature(const FeatureModel& fm, const Corpus& corpus, const std::vector<std::string>& ids,
                                   const std::set<std::string>& positives);

/// Everything the pipeline knows about one article.
struct ArticleAnalysis {
    FeatureVector features;
    std::vector<FeaturePrediction> predictions;  ///< kRationaleFeatures order
    double compound_polarity = 0.0;
    AgendaVerdict verdict;
};

/// Six rationale models, the sentiment scorer and the combiner. Immutable
/// after construction and safe to share between threads.
class Pipeline {
public:
    Pipeline(std::map<FeatureLabel, FeatureModel> models, SentimentScorer sentiment, CombinerModel combiner);

    ArticleAnalysis analyze(const Article& article) const;

    const std::map<FeatureLabel, FeatureModel>& models() const { return models_; }
    const SentimentScorer& sentiment() const { return sentiment_; }
    const CombinerModel& combiner() const { return combiner_; }

private:
    std::map<FeatureLabel, FeatureModel> models_;
    SentimentScorer sentiment_;
    CombinerModel combiner_;
};

/// {"article_id", "verdict", "features": [prediction...], "negative_sentiment": {...}}
nlohmann::json to_json(const ArticleAnalysis& analysis);

/// Feature vector built from gold annotation labels.
FeatureVector gold_feature_vector(const GoldAnnotation& gold);

/// Feature vector built from an article's weak labels (its source's labels).
FeatureVector weak_feature_vector(const Article& article);

}  // namespace agenda
