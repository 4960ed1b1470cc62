#pragma once

#include "agenda/corpus.hpp"
#include "agenda/labels.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace agenda {

inline constexpr std::size_t kFeatureCount = kModelFeatures.size();

enum class Provenance { annotated, weak, model };

std::string_view to_string(Provenance p);

/// The seven binary feature values of one article, in kModelFeatures order.
struct FeatureVector {
    std::string article_id;
    std::array<int, kFeatureCount> values{};
    std::array<Provenance, kFeatureCount> provenance{};
};

struct CombinerConfig {
    double l2 = 1e-4;  ///< penalty on the mean log-loss; the bias is not penalized
    int max_iterations = 200;
    double tolerance = 1e-10;
};

struct CombinerModel {
    std::array<double, kFeatureCount> weights{};
    double bias = 0.0;
    std::size_t folds = 0;
    std::uint64_t seed = 0;
    double l2 = 0.0;
};

struct AgendaVerdict {
    AgendaBucket bucket = AgendaBucket::benign;
    double probability = 0.0;
    double logit = 0.0;
    /// weight x value per feature
    std::array<double, kFeatureCount> contributions{};
};

/// Penalized maximum-likelihood logistic regression via Newton's method.
/// Throws ValidationError unless both buckets occur.
CombinerModel fit(const std::vector<FeatureVector>& features, const std::vector<AgendaBucket>& buckets,
                  const CombinerConfig& config = {}, std::uint64_t seed = 0);

AgendaVerdict predict(const CombinerModel& model, const FeatureVector& fv);

/// Mean log-loss of the model on the data.
double log_loss(const CombinerModel& model, const std::vector<FeatureVector>& features,
                const std::vector<AgendaBucket>& buckets);

struct CrossValidationResult {
    std::vector<double> fold_accuracy;
    std::vector<double> fold_balanced_accuracy;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    double mean_balanced_accuracy = 0.0;
    double std_balanced_accuracy = 0.0;
    /// Fold index of every article.
    std::vector<std::size_t> fold_of;
    /// Held-out prediction for every article.
    std::vector<AgendaBucket> predictions;
    /// Weights and bias averaged over the fold models.
    std::array<double, kFeatureCount> mean_weights{};
    double mean_bias = 0.0;
};

/// Assigns stratified folds: each class is shuffled and dealt round-robin.
std::vector<std::size_t> stratified_folds(const std::vector<AgendaBucket>& buckets, std::size_t k,
                                          std::uint64_t seed);

/// Stratified k-fold evaluation; every article is scored once by a model not
/// trained on it.
CrossValidationResult cross_validate(const std::vector<FeatureVector>& features,
                                     const std::vector<AgendaBucket>& buckets, std::size_t k = 10,
                                     std::uint64_t seed = 0, const CombinerConfig& config = {});

/// Constant predictor of the modal bucket; ties resolve to benign.
struct MajorityBaseline {
    AgendaBucket bucket = AgendaBucket::benign;
    AgendaBucket predict() const { return bucket; }
};

MajorityBaseline majority_baseline(const std::vector<AgendaBucket>& buckets);

nlohmann::json to_json(const CombinerModel& model);
CombinerModel combiner_from_json(const nlohmann::json& j);
void save_combiner(const CombinerModel& model, const std::filesystem::path& path);
CombinerModel load_combiner(const std::filesystem::path& path);

/// Verdict with its per-feature contribution table.
nlohmann::json to_json(const AgendaVerdict& verdict, const FeatureVector& fv);

}  // namespace agenda
