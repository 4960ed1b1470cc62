#pragma once

#include "agenda/labels.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace agenda {

struct Article {
    std::string id;
    std::string source;
    std::string title;
    std::string body;
    std::set<FeatureLabel> weak_labels;
    std::optional<FeatureLabel> primary_weak_label;

    bool has_weak_label(FeatureLabel label) const { return weak_labels.count(label) > 0; }
    std::string text() const;
};

struct EvidenceSpan {
    FeatureLabel feature{};
    std::size_t start = 0;  ///< byte offset into document_text(title, body)
    std::size_t end = 0;    ///< exclusive
    std::string text;
};

struct GoldAnnotation {
    std::string article_id;
    std::optional<int> agenda_score;
    std::set<FeatureLabel> feature_labels;
    std::vector<EvidenceSpan> evidence_spans;
};

enum class CorpusFormat { jsonl, csv_manifest };

/// Immutable collection of articles with unique ids.
class Corpus {
public:
    Corpus() = default;
    /// Throws ValidationError on duplicate ids or empty sources.
    explicit Corpus(std::vector<Article> articles);

    const std::vector<Article>& articles() const { return articles_; }
    std::size_t size() const { return articles_.size(); }
    bool empty() const { return articles_.empty(); }

    const Article& at(std::string_view id) const;
    const Article* find(std::string_view id) const;

    std::set<std::string> sources() const;

    /// Sub-corpus holding the given ids, in the given order.
    Corpus subset(const std::vector<std::string>& ids) const;

private:
    std::vector<Article> articles_;
    std::unordered_map<std::string, std::size_t> index_;
};

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format = CorpusFormat::jsonl);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

nlohmann::json to_json(const Article& article);
Article article_from_json(const nlohmann::json& j);

/// Gold annotations keyed by article id. Validates span labels and offsets
/// against the corpus when one is given.
std::map<std::string, GoldAnnotation> load_gold(const std::filesystem::path& path,
                                                const Corpus* corpus = nullptr);
void save_gold(const std::map<std::string, GoldAnnotation>& gold, const std::filesystem::path& path);

nlohmann::json to_json(const GoldAnnotation& gold);
GoldAnnotation gold_from_json(const nlohmann::json& j);

/// Checks the annotation invariants against its article (when provided).
void validate_gold(const GoldAnnotation& gold, const Article* article);

/// Removes URLs and case-insensitive occurrences of the source name variants
/// from title and body. Each removed run becomes a single space.
Article scrub_source(const Article& article, const std::vector<std::string>& name_variants);

/// Title plus at most 1,700 body characters cut back to the last sentence end.
std::string annotation_view(const Article& article);

inline constexpr std::size_t kAnnotationWindow = 1700;

enum class AgendaBucket { benign = 0, harmful = 1 };

std::string_view to_string(AgendaBucket bucket);
AgendaBucket bucket_score(int score);

}  // namespace agenda
