#include "agenda/evaluation.hpp"

#include "agenda/error.hpp"
#include "agenda/feature_model.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace agenda {

namespace {

CombinerRow row_from_folds(const std::string& method, const std::vector<double>& acc,
                           const std::vector<double>& bal, std::size_t articles) {
    auto percent = [](std::vector<double> v) {
        for (double& x : v) x *= 100.0;
        return mean_std(v);
    };
    return {method, percent(acc), percent(bal), articles};
}

}  // namespace

CombinerRow majority_row(const std::vector<AgendaBucket>& buckets, std::size_t k, std::uint64_t seed) {
    const auto fold_of = stratified_folds(buckets, k, seed);
    std::vector<double> acc;
    std::vector<double> bal;
    for (std::size_t fold = 0; fold < k; ++fold) {
        std::vector<AgendaBucket> train;
        std::vector<int> golds;
        for (std::size_t i = 0; i < buckets.size(); ++i) {
            if (fold_of[i] == fold) golds.push_back(static_cast<int>(buckets[i]));
            else train.push_back(buckets[i]);
        }
        if (golds.empty()) continue;
        const int constant = static_cast<int>(majority_baseline(train).predict());
        const std::vector<int> preds(golds.size(), constant);
        acc.push_back(accuracy(preds, golds));
        bal.push_back(balanced_accuracy(preds, golds));
    }
    return row_from_folds("Majority", acc, bal, buckets.size());
}

CombinerRow combiner_row(const std::string& method, const std::vector<FeatureVector>& features,
                         const std::vector<AgendaBucket>& buckets, std::size_t k, std::uint64_t seed,
                         const CombinerConfig& config, CrossValidationResult* detail) {
    auto cv = cross_validate(features, buckets, k, seed, config);
    CombinerRow row = row_from_folds(method, cv.fold_accuracy, cv.fold_balanced_accuracy, buckets.size());
    if (detail) *detail = std::move(cv);
    return row;
}

CombinerRow agenda_baseline_row(const std::vector<std::string>& texts, const std::vector<AgendaBucket>& buckets,
                                std::shared_ptr<const ClassifierBackend> backend, const TrainConfig& config,
                                std::size_t k, std::uint64_t seed) {
    if (texts.size() != buckets.size()) throw ValidationError("agenda baseline: length mismatch");
    if (k < 3) throw ValidationError("agenda baseline needs at least 3 folds");
    const auto fold_of = stratified_folds(buckets, k, seed);
    std::vector<double> acc;
    std::vector<double> bal;
    for (std::size_t fold = 0; fold < k; ++fold) {
        const std::size_t dev_fold = (fold + 1) % k;
        std::vector<std::pair<std::string, AgendaBucket>> train;
        std::vector<std::pair<std::string, AgendaBucket>> dev;
        std::vector<std::size_t> test;
        for (std::size_t i = 0; i < texts.size(); ++i) {
            if (fold_of[i] == fold) test.push_back(i);
            else if (fold_of[i] == dev_fold) dev.emplace_back(texts[i], buckets[i]);
            else train.emplace_back(texts[i], buckets[i]);
        }
        const auto model = train_agenda_baseline(train, dev, backend, config, seed + fold);
        std::vector<int> preds;
        std::vector<int> golds;
        for (std::size_t i : test) {
            preds.push_back(model.predict(texts[i]) >= 0.5 ? 1 : 0);
            golds.push_back(static_cast<int>(buckets[i]));
        }
        acc.push_back(accuracy(preds, golds));
        bal.push_back(balanced_accuracy(preds, golds));
    }
    return row_from_folds("End-to-end classifier", acc, bal, texts.size());
}

std::vector<std::pair<FeatureLabel, double>> weight_ranking(const std::array<double, kFeatureCount>& weights) {
    std::vector<std::pair<FeatureLabel, double>> out;
    for (std::size_t j = 0; j < kFeatureCount; ++j) out.emplace_back(kModelFeatures[j], weights[j]);
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

std::map<std::string, std::vector<double>> scores_by_label(const std::map<std::string, GoldAnnotation>& gold) {
    std::map<std::string, std::vector<double>> out;
    for (const auto& [id, g] : gold) {
        if (!g.agenda_score) continue;
        for (FeatureLabel l : g.feature_labels) out[std::string(to_string(l))].push_back(*g.agenda_score);
    }
    return out;
}

AnnotationMatrix load_ratings_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open ratings " + path.string());
    std::vector<std::string> items;
    std::map<std::string, std::size_t> item_index;
    std::map<std::string, std::map<std::size_t, double>> by_rater;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || (line_no == 1 && line.rfind("article_id", 0) == 0)) continue;
        std::stringstream ss(line);
        std::string id, rater, score;
        if (!std::getline(ss, id, ',') || !std::getline(ss, rater, ',') || !std::getline(ss, score)) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": expected article_id,rater,score");
        }
        double value = 0.0;
        try {
            std::size_t used = 0;
            value = std::stod(score, &used);
            if (used != score.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": bad score '" + score + "'");
        }
        auto [it, inserted] = item_index.emplace(id, items.size());
        if (inserted) items.push_back(id);
        by_rater[rater][it->second] = value;
    }
    AnnotationMatrix m;
    for (const auto& [rater, scores] : by_rater) {
        std::vector<std::optional<double>> row(items.size());
        for (const auto& [item, v] : scores) row[item] = v;
        m.push_back(std::move(row));
    }
    return m;
}

void save_ratings_csv(const std::map<std::string, std::vector<int>>& ratings, const std::filesystem::path& path) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& [id, scores] : ratings) {
        for (std::size_t r = 0; r < scores.size(); ++r) {
            rows.push_back({id, "rater" + std::to_string(r + 1), std::to_string(scores[r])});
        }
    }
    write_csv(path, {"article_id", "rater", "score"}, rows);
}

std::string fmt(double value, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, value);
    std::string s = buf;
    // Avoid "-0.0000".
    if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) return s.substr(1);
    return s;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    auto field = [](const std::string& f) {
        if (f.find_first_of(",\"\n") == std::string::npos) return f;
        std::string q = "\"";
        for (char c : f) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + "\"";
    };
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << field(cells[i]);
        out << "\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
}

}  // namespace agenda
