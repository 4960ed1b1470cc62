#pragma once

#include "agenda/corpus.hpp"
#include "agenda/rationale.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

namespace agenda {

// ---------------------------------------------------------------------------
// Classification

/// Mean of per-class recalls over the classes present in `golds`.
double balanced_accuracy(const std::vector<int>& preds, const std::vector<int>& golds);
double accuracy(const std::vector<int>& preds, const std::vector<int>& golds);

struct LabelAgreement {
    double iou = 0.0;
    double recall_1 = 0.0;
};

/// |∩|/|∪|, defined as 0 when both sets are empty.
double intersection_over_union(const std::set<std::string>& pred, const std::set<std::string>& gold);

/// IOU and gold coverage; throws ValidationError when gold is empty.
LabelAgreement label_agreement(const std::set<std::string>& pred_positive, const std::set<std::string>& gold_positive);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  ///< population standard deviation
};

MeanStd mean_std(const std::vector<double>& values);

// ---------------------------------------------------------------------------
// Annotator consistency

/// raters x items; std::nullopt marks a missing rating.
using AnnotationMatrix = std::vector<std::vector<std::optional<double>>>;

struct AlphaEstimate {
    double alpha = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t items_used = 0;
};

/// Cronbach's alpha with raters as the scale items, on the items every rater
/// scored (listwise deletion). Throws when the total variance is zero.
double cronbach_alpha_point(const AnnotationMatrix& m);

/// Point estimate plus a 95% percentile bootstrap interval over items.
AlphaEstimate cronbach_alpha(const AnnotationMatrix& m, std::size_t ci_reps = 2000, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Rank-sum tests

struct RankSumResult {
    double u = 0.0;          ///< Mann-Whitney U of the first sample
    double rank_sum = 0.0;   ///< sum of midranks of the first sample
    double p_value = 1.0;    ///< two-sided
    bool exact = false;      ///< permutation distribution rather than normal approximation
};

/// Samples with at most this many pooled observations use the exact
/// (tie-aware) permutation distribution.
inline constexpr std::size_t kExactRankSumLimit = 30;

/// Two-sample Wilcoxon rank-sum test with midranks for ties. Large samples
/// use the tie-corrected normal approximation with continuity correction.
RankSumResult rank_sum_test(const std::vector<double>& a, const std::vector<double>& b);

struct PairwiseResult {
    std::string label_a;
    std::string label_b;
    double mean_difference = 0.0;  ///< mean(a) - mean(b)
    double p_value = 1.0;
    bool significant_05 = false;
    bool significant_01 = false;
};

struct PairwiseReport {
    std::vector<PairwiseResult> results;
    std::vector<std::string> skipped;  ///< labels with fewer than two scores
};

/// Rank-sum comparison of every ordered pair of labels.
PairwiseReport wilcoxon_pairwise(const std::map<std::string, std::vector<double>>& label_scores);

// ---------------------------------------------------------------------------
// Rationale overlap

class StopwordList {
public:
    StopwordList() = default;
    explicit StopwordList(std::vector<std::string> words);
    static StopwordList load(const std::filesystem::path& path);

    bool contains(std::string_view token) const;
    std::size_t size() const { return words_.size(); }
    /// FNV-1a hash of the sorted list, hex encoded, for report provenance.
    std::string hash() const;

private:
    std::unordered_set<std::string> words_;
};

enum class OverlapMode { position, string };

/// Percent of non-stopword rationale tokens inside a gold span. In position
/// mode a token counts when its start offset falls inside a span; in string
/// mode when its lowercase form occurs among the span's words.
double rationale_overlap(const Rationale& rationale, const std::vector<EvidenceSpan>& gold_spans,
                         const StopwordList& stopwords, std::string_view text,
                         OverlapMode mode = OverlapMode::position);

/// Every token whose start offset is below `n`, each with saliency 0.
Rationale first_n_chars_baseline(std::string_view text, std::size_t n = 350);

}  // namespace agenda
