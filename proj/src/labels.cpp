#include "agenda/labels.hpp"

#include "agenda/error.hpp"
#include "agenda/text.hpp"

#include <algorithm>
#include <utility>

namespace agenda {

namespace {

constexpr std::array<std::string_view, kLabelCount> kNames = {
    "clickbait",          "junk_science",       "hate_speech",    "conspiracy_theory",
    "propaganda",         "satire",             "negative_sentiment", "neutral_sentiment",
    "positive_sentiment", "political_bias",     "call_to_action", "average",
};

// Short keys found in annotation exports and pairwise-analysis tables.
constexpr std::array<std::pair<std::string_view, FeatureLabel>, 17> kAliases = {{
    {"junksci", FeatureLabel::junk_science},
    {"junk", FeatureLabel::junk_science},
    {"hate", FeatureLabel::hate_speech},
    {"conspiracy", FeatureLabel::conspiracy_theory},
    {"negprop", FeatureLabel::propaganda},
    {"sathum", FeatureLabel::satire},
    {"negemot", FeatureLabel::negative_sentiment},
    {"negative", FeatureLabel::negative_sentiment},
    {"neutral", FeatureLabel::neutral_sentiment},
    {"posemot", FeatureLabel::positive_sentiment},
    {"positive", FeatureLabel::positive_sentiment},
    {"bias", FeatureLabel::political_bias},
    {"callact", FeatureLabel::call_to_action},
    {"reliable", FeatureLabel::average},
    {"real", FeatureLabel::average},
    {"political", FeatureLabel::political_bias},
    {"conspiracy_theories", FeatureLabel::conspiracy_theory},
}};

}  // namespace

std::string_view to_string(FeatureLabel label) {
    return kNames[static_cast<std::size_t>(label)];
}

std::optional<FeatureLabel> parse_label(std::string_view text) {
    std::string key = to_lower(trim(text));
    std::replace(key.begin(), key.end(), ' ', '_');
    std::replace(key.begin(), key.end(), '-', '_');
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (kNames[i] == key) return kAllLabels[i];
    }
    for (const auto& [alias, label] : kAliases) {
        if (alias == key) return label;
    }
    return std::nullopt;
}

FeatureLabel label_from_string(std::string_view text) {
    if (auto label = parse_label(text)) return *label;
    throw ValidationError("unknown feature label '" + std::string(text) + "'");
}

bool is_model_feature(FeatureLabel label) {
    return std::find(kModelFeatures.begin(), kModelFeatures.end(), label) != kModelFeatures.end();
}

std::size_t model_feature_index(FeatureLabel label) {
    auto it = std::find(kModelFeatures.begin(), kModelFeatures.end(), label);
    if (it == kModelFeatures.end()) {
        throw ValidationError("'" + std::string(to_string(label)) + "' is not a model feature");
    }
    return static_cast<std::size_t>(it - kModelFeatures.begin());
}

}  // namespace agenda
