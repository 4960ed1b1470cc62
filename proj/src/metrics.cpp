#include "agenda/metrics.hpp"

#include "agenda/error.hpp"
#include "agenda/random.hpp"
#include "agenda/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace agenda {

// ---------------------------------------------------------------------------
// Classification

double balanced_accuracy(const std::vector<int>& preds, const std::vector<int>& golds) {
    if (preds.size() != golds.size()) throw ValidationError("balanced_accuracy: length mismatch");
    if (golds.empty()) throw ValidationError("balanced_accuracy: empty input");
    std::map<int, std::pair<std::size_t, std::size_t>> per_class;  // hits, total
    for (std::size_t i = 0; i < golds.size(); ++i) {
        auto& c = per_class[golds[i]];
        c.second += 1;
        c.first += preds[i] == golds[i] ? 1 : 0;
    }
    double sum = 0.0;
    for (const auto& [cls, c] : per_class) sum += static_cast<double>(c.first) / static_cast<double>(c.second);
    return sum / static_cast<double>(per_class.size());
}

double accuracy(const std::vector<int>& preds, const std::vector<int>& golds) {
    if (preds.size() != golds.size()) throw ValidationError("accuracy: length mismatch");
    if (golds.empty()) throw ValidationError("accuracy: empty input");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < golds.size(); ++i) hits += preds[i] == golds[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(golds.size());
}

namespace {

std::size_t intersection_size(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::size_t n = 0;
    for (const auto& x : a) n += b.count(x);
    return n;
}

}  // namespace

double intersection_over_union(const std::set<std::string>& pred, const std::set<std::string>& gold) {
    const std::size_t inter = intersection_size(pred, gold);
    const std::size_t uni = pred.size() + gold.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

LabelAgreement label_agreement(const std::set<std::string>& pred, const std::set<std::string>& gold) {
    if (gold.empty()) throw ValidationError("recall-1 is undefined for an empty gold set");
    LabelAgreement out;
    out.iou = intersection_over_union(pred, gold);
    out.recall_1 = static_cast<double>(intersection_size(pred, gold)) / static_cast<double>(gold.size());
    return out;
}

MeanStd mean_std(const std::vector<double>& values) {
    if (values.empty()) return {};
    MeanStd out;
    out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size()));
    return out;
}

// ---------------------------------------------------------------------------
// Cronbach's alpha

namespace {

// Complete columns as raters x items dense rows.
std::vector<std::vector<double>> complete_items(const AnnotationMatrix& m) {
    if (m.size() < 2) throw ValidationError("Cronbach's alpha needs at least 2 raters");
    const std::size_t items = m.front().size();
    for (const auto& row : m) {
        if (row.size() != items) throw ValidationError("annotation matrix rows differ in length");
    }
    std::vector<std::vector<double>> dense(m.size());
    for (std::size_t j = 0; j < items; ++j) {
        bool complete = true;
        for (const auto& row : m) {
            if (!row[j]) {
                complete = false;
                break;
            }
            if (!std::isfinite(*row[j])) throw ValidationError("annotation matrix holds a non-finite rating");
        }
        if (!complete) continue;
        for (std::size_t r = 0; r < m.size(); ++r) dense[r].push_back(*m[r][j]);
    }
    if (dense.front().size() < 2) throw ValidationError("Cronbach's alpha needs at least 2 fully rated items");
    return dense;
}

double sample_variance(const std::vector<double>& xs) {
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(xs.size() - 1);
}

// Alpha over the item columns listed in `cols` (may repeat for bootstrap).
std::optional<double> alpha_of(const std::vector<std::vector<double>>& dense, const std::vector<std::size_t>& cols) {
    const auto k = static_cast<double>(dense.size());
    double rater_var_sum = 0.0;
    std::vector<double> totals(cols.size(), 0.0);
    std::vector<double> column(cols.size());
    for (const auto& row : dense) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            column[c] = row[cols[c]];
            totals[c] += row[cols[c]];
        }
        rater_var_sum += sample_variance(column);
    }
    const double total_var = sample_variance(totals);
    if (!(total_var > 0.0)) return std::nullopt;
    return k / (k - 1.0) * (1.0 - rater_var_sum / total_var);
}

double percentile(std::vector<double> xs, double q) {
    std::sort(xs.begin(), xs.end());
    const double h = (static_cast<double>(xs.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

}  // namespace

double cronbach_alpha_point(const AnnotationMatrix& m) {
    auto dense = complete_items(m);
    std::vector<std::size_t> cols(dense.front().size());
    std::iota(cols.begin(), cols.end(), 0);
    auto alpha = alpha_of(dense, cols);
    if (!alpha) throw ValidationError("Cronbach's alpha is undefined: total score variance is zero");
    return *alpha;
}

AlphaEstimate cronbach_alpha(const AnnotationMatrix& m, std::size_t ci_reps, std::uint64_t seed) {
    auto dense = complete_items(m);
    const std::size_t n = dense.front().size();
    std::vector<std::size_t> cols(n);
    std::iota(cols.begin(), cols.end(), 0);
    auto point = alpha_of(dense, cols);
    if (!point) throw ValidationError("Cronbach's alpha is undefined: total score variance is zero");

    AlphaEstimate out;
    out.alpha = *point;
    out.items_used = n;
    out.ci_low = out.ci_high = out.alpha;
    if (ci_reps == 0) return out;

    Rng rng(seed);
    std::vector<double> draws;
    draws.reserve(ci_reps);
    for (std::size_t rep = 0; rep < ci_reps; ++rep) {
        for (auto& c : cols) c = rng.below(n);
        // Degenerate resamples (zero total variance) carry no information.
        if (auto a = alpha_of(dense, cols)) draws.push_back(*a);
    }
    if (!draws.empty()) {
        out.ci_low = percentile(draws, 0.025);
        out.ci_high = percentile(draws, 0.975);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rank-sum

namespace {

std::vector<double> midranks(const std::vector<double>& pooled) {
    std::vector<std::size_t> order(pooled.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
    std::vector<double> ranks(pooled.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
        i = j + 1;
    }
    return ranks;
}

// Exact two-sided p from the permutation distribution of the first sample's
// rank sum. Midranks are doubled so every rank is an integer.
double exact_rank_sum_p(const std::vector<double>& ranks, std::size_t n1, double observed) {
    const std::size_t n = ranks.size();
    std::vector<int> doubled(n);
    int max_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        doubled[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
        max_sum += doubled[i];
    }
    // ways[j][s]: number of j-subsets of the items seen so far with doubled sum s.
    std::vector<std::vector<double>> ways(n1 + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
    ways[0][0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = std::min(i + 1, n1); j >= 1; --j) {
            auto& dst = ways[j];
            const auto& src = ways[j - 1];
            for (int s = max_sum - doubled[i]; s >= 0; --s) {
                if (src[static_cast<std::size_t>(s)] != 0.0) {
                    dst[static_cast<std::size_t>(s + doubled[i])] += src[static_cast<std::size_t>(s)];
                }
            }
        }
    }
    const double expected2 = static_cast<double>(n1) * static_cast<double>(n + 1);  // doubled mean
    const double dev = std::fabs(2.0 * observed - expected2);
    double extreme = 0.0;
    double total = 0.0;
    for (int s = 0; s <= max_sum; ++s) {
        const double w = ways[n1][static_cast<std::size_t>(s)];
        if (w == 0.0) continue;
        total += w;
        if (std::fabs(static_cast<double>(s) - expected2) >= dev - 1e-9) extreme += w;
    }
    return std::min(1.0, extreme / total);
}

}  // namespace

RankSumResult rank_sum_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw ValidationError("rank-sum test needs two non-empty samples");
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto ranks = midranks(pooled);
    const std::size_t n1 = a.size();
    const std::size_t n2 = b.size();
    const auto dn1 = static_cast<double>(n1);
    const auto dn2 = static_cast<double>(n2);
    const auto n = static_cast<double>(n1 + n2);

    RankSumResult out;
    out.rank_sum = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(n1), 0.0);
    out.u = out.rank_sum - dn1 * (dn1 + 1.0) / 2.0;

    if (n1 + n2 <= kExactRankSumLimit) {
        out.exact = true;
        out.p_value = exact_rank_sum_p(ranks, n1, out.rank_sum);
        return out;
    }

    // Tie term: sum over tie groups of t^3 - t.
    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double ties = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const auto t = static_cast<double>(j - i);
        ties += t * t * t - t;
        i = j;
    }
    const double mean_u = dn1 * dn2 / 2.0;
    const double var_u = dn1 * dn2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    if (!(var_u > 0.0)) {
        out.p_value = 1.0;
        return out;
    }
    const double z = std::max(0.0, std::fabs(out.u - mean_u) - 0.5) / std::sqrt(var_u);
    out.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    return out;
}

PairwiseReport wilcoxon_pairwise(const std::map<std::string, std::vector<double>>& label_scores) {
    PairwiseReport report;
    std::vector<const std::pair<const std::string, std::vector<double>>*> usable;
    for (const auto& entry : label_scores) {
        if (entry.second.size() < 2) {
            report.skipped.push_back(entry.first);
        } else {
            usable.push_back(&entry);
        }
    }
    auto mean = [](const std::vector<double>& xs) {
        return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    };
    for (const auto* a : usable) {
        for (const auto* b : usable) {
            if (a == b) continue;
            PairwiseResult r;
            r.label_a = a->first;
            r.label_b = b->first;
            r.mean_difference = mean(a->second) - mean(b->second);
            r.p_value = rank_sum_test(a->second, b->second).p_value;
            r.significant_05 = r.p_value < 0.05;
            r.significant_01 = r.p_value < 0.01;
            report.results.push_back(std::move(r));
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Rationale overlap

StopwordList::StopwordList(std::vector<std::string> words) {
    for (auto& w : words) {
        std::string t = to_lower(trim(w));
        if (!t.empty()) words_.insert(std::move(t));
    }
}

StopwordList StopwordList::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open stopword list " + path.string());
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') continue;
        words.push_back(line);
    }
    return StopwordList(std::move(words));
}

bool StopwordList::contains(std::string_view token) const { return words_.count(normalize_token(token)) > 0; }

std::string StopwordList::hash() const {
    std::vector<std::string> sorted(words_.begin(), words_.end());
    std::sort(sorted.begin(), sorted.end());
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& w : sorted) {
        for (unsigned char c : w) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        h ^= '\n';
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

double rationale_overlap(const Rationale& rationale, const std::vector<EvidenceSpan>& gold_spans,
                         const StopwordList& stopwords, std::string_view text, OverlapMode mode) {
    std::set<std::string> span_words;
    if (mode == OverlapMode::string) {
        for (const auto& s : gold_spans) {
            if (s.start > s.end || s.end > text.size()) throw ValidationError("gold span outside text");
            for (const auto& t : tokenize_words(text.substr(s.start, s.end - s.start))) {
                span_words.insert(normalize_token(t.text));
            }
        }
    }
    std::size_t counted = 0;
    std::size_t inside = 0;
    for (const auto& t : rationale.selected) {
        if (stopwords.contains(t.token)) continue;
        ++counted;
        bool hit = false;
        if (mode == OverlapMode::position) {
            for (const auto& s : gold_spans) {
                if (t.begin >= s.start && t.begin < s.end) {
                    hit = true;
                    break;
                }
            }
        } else {
            hit = span_words.count(normalize_token(t.token)) > 0;
        }
        inside += hit ? 1 : 0;
    }
    return counted == 0 ? 0.0 : 100.0 * static_cast<double>(inside) / static_cast<double>(counted);
}

Rationale first_n_chars_baseline(std::string_view text, std::size_t n) {
    Rationale r;
    const auto tokens = tokenize_words(text);
    std::size_t chars = 0;  // code points before `cursor`
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        for (; cursor < tokens[i].begin; ++cursor) {
            if ((static_cast<unsigned char>(text[cursor]) & 0xC0) != 0x80) ++chars;
        }
        if (chars >= n) break;
        r.selected.push_back({i, tokens[i].text, 0.0, tokens[i].begin, tokens[i].end});
    }
    if (!tokens.empty()) {
        r.fraction = static_cast<double>(r.selected.size()) / static_cast<double>(tokens.size());
    }
    return r;
}

}  // namespace agenda
