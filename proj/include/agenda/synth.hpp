#pragma once

#include "agenda/corpus.hpp"
#include "agenda/labels.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace agenda {

/// Knobs of the planted-signal corpus generator.
struct SynthOptions {
    std::uint64_t seed = 7;
    std::size_t positives_per_feature = 400;
    std::size_t average_articles = 800;
    std::size_t sources_per_feature = 6;  ///< single-label sources per feature
    std::size_t average_sources = 12;
    std::size_t body_words = 90;
    /// Marker slots per positive article; each is filled with probability `signal`.
    std::size_t marker_slots = 5;
    double signal = 0.9;
    /// Chance that an article carries one marker of an unrelated feature.
    double marker_noise = 0.05;
    std::size_t style_tokens_per_article = 3;
    std::size_t gold_articles = 400;
    /// Chance of flipping a gold feature label away from the source label.
    double gold_label_noise = 0.1;
    /// Simulated annotators per gold article.
    std::size_t raters = 4;
    double rater_noise = 0.7;
};

/// A generated corpus plus the ground truth needed to score it.
struct SynthCorpus {
    Corpus corpus;
    std::map<std::string, GoldAnnotation> gold;
    /// Planted marker occurrences per article (positions in the document tokens).
    std::map<std::string, std::vector<std::size_t>> marker_positions;
    /// Articles whose text carries planted negative-valence words.
    std::map<std::string, bool> negative_planted;
    /// Per gold article, one 1-5 agenda score per simulated annotator.
    std::map<std::string, std::vector<int>> ratings;
};

/// The marker vocabulary of a rationale feature.
const std::vector<std::string>& marker_tokens(FeatureLabel feature);

/// Source label sets follow the high-overlap pairs of the label-site table:
/// clickbait/junk science, junk science/conspiracy, hate/conspiracy,
/// hate/propaganda and conspiracy/propaganda share sources.
SynthCorpus synthesize(const SynthOptions& options);

}  // namespace agenda
