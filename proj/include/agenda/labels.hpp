#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace agenda {

/// The eleven annotated article features plus the "average" corpus class.
enum class FeatureLabel {
    clickbait,
    junk_science,
    hate_speech,
    conspiracy_theory,
    propaganda,
    satire,
    negative_sentiment,
    neutral_sentiment,
    positive_sentiment,
    political_bias,
    call_to_action,
    average,
};

inline constexpr std::size_t kLabelCount = 12;

inline constexpr std::array<FeatureLabel, kLabelCount> kAllLabels = {
    FeatureLabel::clickbait,          FeatureLabel::junk_science,
    FeatureLabel::hate_speech,        FeatureLabel::conspiracy_theory,
    FeatureLabel::propaganda,         FeatureLabel::satire,
    FeatureLabel::negative_sentiment, FeatureLabel::neutral_sentiment,
    FeatureLabel::positive_sentiment, FeatureLabel::political_bias,
    FeatureLabel::call_to_action,     FeatureLabel::average,
};

/// The features fed to the combiner, in feature-vector order.
inline constexpr std::array<FeatureLabel, 7> kModelFeatures = {
    FeatureLabel::clickbait,  FeatureLabel::junk_science,      FeatureLabel::hate_speech,
    FeatureLabel::conspiracy_theory, FeatureLabel::propaganda, FeatureLabel::satire,
    FeatureLabel::negative_sentiment,
};

/// The model features detected by a trained rationale classifier
/// (negative sentiment comes from the lexicon scorer instead).
inline constexpr std::array<FeatureLabel, 6> kRationaleFeatures = {
    FeatureLabel::clickbait,         FeatureLabel::junk_science, FeatureLabel::hate_speech,
    FeatureLabel::conspiracy_theory, FeatureLabel::propaganda,   FeatureLabel::satire,
};

std::string_view to_string(FeatureLabel label);

/// Accepts canonical ids ("junk_science"), spaced forms ("Junk Science") and
/// the short keys used in annotation exports ("junksci", "negprop", ...).
std::optional<FeatureLabel> parse_label(std::string_view text);

/// Like parse_label but throws ValidationError on unknown input.
FeatureLabel label_from_string(std::string_view text);

bool is_model_feature(FeatureLabel label);

/// Index of a model feature within kModelFeatures.
std::size_t model_feature_index(FeatureLabel label);

}  // namespace agenda
