#pragma once

#include "agenda/backend.hpp"
#include "agenda/pipeline.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace agenda {

nlohmann::json to_json(const TrainConfig& config);
/// Starts from `base` and overrides the keys present in `j`.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base);

nlohmann::json to_json(const TrainReport& report);

/// Model registry layout:
///
///   registry.json            backend, seeds, lexicon version, feature list
///   combiner.json
///   lexicon/                 copy of the sentiment lexicon
///   <feature>/config.json, extractor.bin, predictor.bin, metrics.json, backend.txt
///   <feature>/seeds/<seed>/extractor.bin, predictor.bin, config.json
///
/// The top-level model files of a feature are those of its primary seed.
class Registry {
public:
    explicit Registry(std::filesystem::path root) : root_(std::move(root)) {}

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path feature_dir(FeatureLabel feature) const;

    /// Writes the seed's copy and, when `primary`, the top-level copy.
    void save_feature_model(const FeatureModel& fm, bool primary) const;
    /// Per-seed dev/test scores.
    void save_metrics(FeatureLabel feature, const nlohmann::json& metrics) const;
    void save_combiner(const CombinerModel& model) const;
    void save_lexicon(const std::filesystem::path& lexicon_dir) const;
    void save_manifest(const nlohmann::json& manifest) const;

    /// Loads the primary model, or a specific seed's model.
    FeatureModel load_feature_model(FeatureLabel feature, std::shared_ptr<const ClassifierBackend> backend,
                                    std::optional<std::uint64_t> seed = std::nullopt) const;
    CombinerModel load_combiner() const;
    nlohmann::json manifest() const;

    /// Backend named by the registry, built with the given options.
    std::shared_ptr<const ClassifierBackend> backend(const BackendOptions& options) const;

    /// Full pipeline; throws UnavailableError when anything is missing.
    Pipeline load_pipeline(const BackendOptions& options = {}) const;

    /// Manifest plus each feature's config and metrics, for the service.
    nlohmann::json metadata() const;

private:
    std::filesystem::path root_;
};

}  // namespace agenda
