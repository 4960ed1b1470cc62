#pragma once

#include "agenda/backend.hpp"
#include "agenda/corpus.hpp"
#include "agenda/labels.hpp"
#include "agenda/rationale.hpp"
#include "agenda/sampling.hpp"

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace agenda {

/// Extract-then-predict classifier for one feature. The extractor sees the
/// full text and supplies attention saliency; the predictor sees only the
/// extracted rationale tokens with their document positions.
struct FeatureModel {
    FeatureLabel feature{};
    std::shared_ptr<const ClassifierBackend> backend;
    std::shared_ptr<const ClassifierModel> extractor;
    std::shared_ptr<const ClassifierModel> predictor;
    TrainConfig config;
    std::uint64_t seed = 0;
    TrainReport extractor_report;
    TrainReport predictor_report;
};

struct FeaturePrediction {
    FeatureLabel feature{};
    bool label = false;
    double confidence = 0.0;
    Rationale rationale;
};

/// Two-stage training: the extractor on full documents, then the predictor
/// on the extractor's rationales. Examples come from `ts`; `split` decides
/// which of them train and which drive early stopping.
FeatureModel train_feature_model(const TrainingSet& ts, const Corpus& corpus, const SplitSpec& split,
                                 std::shared_ptr<const ClassifierBackend> backend, TrainConfig config,
                                 std::uint64_t seed);

/// Rationale from the extractor's saliency, label and confidence from the predictor.
FeaturePrediction predict_feature(const FeatureModel& fm, const Article& article);

/// Extractor probability on the full text (the non-rationale reference model).
double predict_extractor(const FeatureModel& fm, const Article& article);

nlohmann::json to_json(const FeaturePrediction& prediction);
nlohmann::json to_json(const Rationale& rationale);

/// Single-stage full-text classifier of the agenda bucket.
struct AgendaBaselineModel {
    std::shared_ptr<const ClassifierBackend> backend;
    std::shared_ptr<const ClassifierModel> model;
    TrainReport report;

    /// Probability of the harmful bucket.
    double predict(std::string_view text) const;
};

AgendaBaselineModel train_agenda_baseline(const std::vector<std::pair<std::string, AgendaBucket>>& train,
                                          const std::vector<std::pair<std::string, AgendaBucket>>& dev,
                                          std::shared_ptr<const ClassifierBackend> backend, const TrainConfig& config,
                                          std::uint64_t seed);

}  // namespace agenda
