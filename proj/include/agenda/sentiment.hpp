#pragma once

#include "agenda/corpus.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace agenda {

/// Constants of the compound-polarity rule. Defaults follow the published
/// VADER formulation.
struct SentimentConfig {
    double normalization_alpha = 15.0;
    double negation_scalar = -0.74;
    double booster_increment = 0.293;
    std::size_t negation_window = 3;
    /// ALL-CAPS emphasis and '!' amplification; off keeps the score a plain
    /// function of the lexicon, negators and boosters.
    bool emphasis = false;
    double caps_increment = 0.733;
    double exclamation_increment = 0.292;
};

class ValenceLexicon {
public:
    ValenceLexicon() = default;

    /// Reads `token<TAB>valence` lines; booster and dampener files hold one
    /// token per line, as does the negation file.
    static ValenceLexicon load(const std::filesystem::path& lexicon, const std::filesystem::path& boosters,
                               const std::filesystem::path& dampeners, const std::filesystem::path& negations);

    /// Loads lexicon.tsv, boosters.txt, dampeners.txt and negations.txt from one directory.
    static ValenceLexicon load_dir(const std::filesystem::path& dir);

    void set_valence(std::string token, double valence);
    void add_booster(std::string token, double increment);
    void add_negation(std::string token);

    const double* valence(std::string_view token) const;
    const double* booster(std::string_view token) const;
    bool is_negation(std::string_view token) const;

    std::size_t size() const { return valences_.size(); }
    const std::string& version() const { return version_; }

private:
    std::unordered_map<std::string, double> valences_;
    std::unordered_map<std::string, double> boosters_;
    std::unordered_set<std::string> negations_;
    std::string version_ = "inline";
};

class SentimentScorer {
public:
    explicit SentimentScorer(ValenceLexicon lexicon, SentimentConfig config = {});

    /// Signed valence sum before normalization.
    double raw_sum(std::string_view text) const;

    /// s / sqrt(s^2 + alpha) of the raw sum; 0 for empty or lexicon-free text.
    double compound_polarity(std::string_view text) const;

    /// compound_polarity(title + " " + body) < 0.
    bool negative_sentiment(const Article& article) const;

    const ValenceLexicon& lexicon() const { return lexicon_; }
    const SentimentConfig& config() const { return config_; }

private:
    ValenceLexicon lexicon_;
    SentimentConfig config_;
};

}  // namespace agenda
