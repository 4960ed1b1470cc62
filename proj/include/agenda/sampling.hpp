#pragma once

#include "agenda/corpus.hpp"
#include "agenda/labels.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace agenda {

/// Feature label -> set of websites whose (multi-)label set includes it.
using LabelSiteMap = std::map<FeatureLabel, std::set<std::string>>;

/// Szymkiewicz-Simpson overlap |A ∩ B| / min(|A|, |B|).
double overlap_coefficient(const std::set<std::string>& a, const std::set<std::string>& b);

inline constexpr double kDefaultOverlapThreshold = 0.15;

/// Rationale classes whose overlap with `positive` stays at or under `threshold`, plus
/// "average", which is always an eligible negative class.
std::set<FeatureLabel> select_negative_classes(FeatureLabel positive, const LabelSiteMap& map,
                                               double threshold = kDefaultOverlapThreshold);

/// Builds the label-site map from the weak labels of a corpus.
LabelSiteMap label_site_map(const Corpus& corpus);

LabelSiteMap load_label_site_map(const std::filesystem::path& path);
nlohmann::json to_json(const LabelSiteMap& map);

/// Per-article weight 1/c_w normalized to sum to 1, where c_w counts the
/// articles from the same website.
std::vector<double> source_weights(const std::vector<const Article*>& articles);
std::vector<double> source_weights(const std::vector<Article>& articles);

struct ClassWeights {
    double positive = 1.0;
    double negative = 1.0;
};

struct TrainingSet {
    FeatureLabel positive_label{};
    std::vector<std::string> positives;
    std::vector<std::string> negatives;
    ClassWeights class_weights;
    std::set<FeatureLabel> negative_classes;
    /// Number of negatives drawn from each negative class.
    std::map<FeatureLabel, std::size_t> negative_allocation;
    std::uint64_t seed = 0;
    double threshold = kDefaultOverlapThreshold;
};

struct SamplingOptions {
    std::size_t n_pos = 2500;
    double neg_ratio = 2.0;
    double threshold = kDefaultOverlapThreshold;
};

TrainingSet build_training_set(FeatureLabel positive, const Corpus& corpus, const LabelSiteMap& map,
                               std::uint64_t seed, const SamplingOptions& options = {});

/// Writes the JSON header line followed by one {"role", "article_id"} line per example.
void write_sampling_manifest(const TrainingSet& ts, const std::filesystem::path& path);
TrainingSet read_sampling_manifest(const std::filesystem::path& path);

struct SplitSpec {
    std::vector<std::string> train;
    std::vector<std::string> dev;
    std::vector<std::string> test;
    std::uint64_t seed = 0;
};

/// Optional per-article class used to draw test sources from both classes.
using StratifyFn = std::function<bool(const Article&)>;

/// Holds out `test_n` articles from websites that contribute nothing to
/// train/dev, and `dev_n` random articles from the remaining websites.
SplitSpec split_disjoint_sources(const Corpus& corpus, std::size_t dev_n, std::size_t test_n,
                                 std::uint64_t seed, const StratifyFn& stratify = {});

}  // namespace agenda
