#pragma once

#include "agenda/combiner.hpp"
#include "agenda/metrics.hpp"
#include "agenda/pipeline.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace agenda {

/// One row of the combiner comparison: fold mean and std, in percent.
struct CombinerRow {
    std::string method;
    MeanStd accuracy;
    MeanStd balanced_accuracy;
    std::size_t articles = 0;
};

/// Stratified k-fold evaluation of the constant majority predictor.
CombinerRow majority_row(const std::vector<AgendaBucket>& buckets, std::size_t k, std::uint64_t seed);

/// Stratified k-fold logistic regression on the given feature vectors.
CombinerRow combiner_row(const std::string& method, const std::vector<FeatureVector>& features,
                         const std::vector<AgendaBucket>& buckets, std::size_t k, std::uint64_t seed,
                         const CombinerConfig& config, CrossValidationResult* detail = nullptr);

/// Stratified k-fold single-stage text classifier; each fold's next fold
/// serves as its early-stopping dev set.
CombinerRow agenda_baseline_row(const std::vector<std::string>& texts, const std::vector<AgendaBucket>& buckets,
                                std::shared_ptr<const ClassifierBackend> backend, const TrainConfig& config,
                                std::size_t k, std::uint64_t seed);

/// Model features sorted by weight, largest first (ties by feature order).
std::vector<std::pair<FeatureLabel, double>> weight_ranking(const std::array<double, kFeatureCount>& weights);

/// Agenda scores grouped by gold feature label (articles with a score only).
std::map<std::string, std::vector<double>> scores_by_label(const std::map<std::string, GoldAnnotation>& gold);

/// article_id,rater,score rows to a raters x items matrix (items in
/// first-appearance order, raters sorted).
AnnotationMatrix load_ratings_csv(const std::filesystem::path& path);
void save_ratings_csv(const std::map<std::string, std::vector<int>>& ratings, const std::filesystem::path& path);

/// Fixed-precision formatting so reports are byte-stable.
std::string fmt(double value, int precision = 4);

/// Writes a CSV table; fields containing commas or quotes are quoted.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace agenda
