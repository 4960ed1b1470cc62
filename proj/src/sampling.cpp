#include "agenda/sampling.hpp"

#include "agenda/error.hpp"
#include "agenda/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

namespace agenda {

using nlohmann::json;

double overlap_coefficient(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() || b.empty()) throw ValidationError("overlap coefficient of an empty set is undefined");
    std::size_t shared = 0;
    for (const auto& x : a) shared += b.count(x);
    return static_cast<double>(shared) / static_cast<double>(std::min(a.size(), b.size()));
}

std::set<FeatureLabel> select_negative_classes(FeatureLabel positive, const LabelSiteMap& map,
                                               double threshold) {
    auto pos = map.find(positive);
    if (pos == map.end() || pos->second.empty()) {
        throw ValidationError("label '" + std::string(to_string(positive)) + "' is not in the label-site map");
    }
    std::set<FeatureLabel> out{FeatureLabel::average};
    for (const auto& [label, sites] : map) {
        // Only the rationale classes compete; labels such as political bias
        // never supply negatives.
        const bool candidate =
            std::find(kRationaleFeatures.begin(), kRationaleFeatures.end(), label) != kRationaleFeatures.end();
        if (!candidate || label == positive || sites.empty()) continue;
        if (overlap_coefficient(pos->second, sites) <= threshold) out.insert(label);
    }
    return out;
}

LabelSiteMap label_site_map(const Corpus& corpus) {
    LabelSiteMap map;
    for (const auto& a : corpus.articles()) {
        for (FeatureLabel l : a.weak_labels) map[l].insert(a.source);
    }
    return map;
}

LabelSiteMap load_label_site_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open label-site map " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    LabelSiteMap map;
    for (const auto& [key, sites] : j.items()) {
        auto& bucket = map[label_from_string(key)];
        for (const auto& s : sites) bucket.insert(s.get<std::string>());
    }
    return map;
}

json to_json(const LabelSiteMap& map) {
    json j = json::object();
    for (const auto& [label, sites] : map) j[std::string(to_string(label))] = sites;
    return j;
}

std::vector<double> source_weights(const std::vector<const Article*>& articles) {
    if (articles.empty()) throw ValidationError("source_weights needs at least one article");
    std::unordered_map<std::string, std::size_t> counts;
    for (const Article* a : articles) ++counts[a->source];
    std::vector<double> weights;
    weights.reserve(articles.size());
    for (const Article* a : articles) weights.push_back(1.0 / static_cast<double>(counts[a->source]));
    // Each site contributes exactly 1 before normalization.
    const double total = static_cast<double>(counts.size());
    for (double& w : weights) w /= total;
    return weights;
}

std::vector<double> source_weights(const std::vector<Article>& articles) {
    std::vector<const Article*> ptrs;
    ptrs.reserve(articles.size());
    for (const auto& a : articles) ptrs.push_back(&a);
    return source_weights(ptrs);
}

namespace {

std::optional<FeatureLabel> article_class(const Article& a) {
    if (a.primary_weak_label) return a.primary_weak_label;
    if (a.weak_labels.size() == 1) return *a.weak_labels.begin();
    return std::nullopt;
}

std::vector<std::string> weighted_pick(const std::vector<const Article*>& pool, std::size_t count, Rng& rng) {
    if (pool.empty() || count == 0) return {};
    auto idx = weighted_sample_without_replacement(source_weights(pool), count, rng);
    std::vector<std::string> ids;
    ids.reserve(idx.size());
    for (std::size_t i : idx) ids.push_back(pool[i]->id);
    return ids;
}

// Largest-remainder split of `target` across classes in proportion to their
// availability, never exceeding what a class can supply.
std::map<FeatureLabel, std::size_t> allocate(const std::map<FeatureLabel, std::size_t>& available,
                                             std::size_t target) {
    std::size_t total = 0;
    for (const auto& [l, n] : available) total += n;
    std::map<FeatureLabel, std::size_t> out;
    if (total <= target) return available;
    std::vector<std::pair<double, FeatureLabel>> remainders;
    std::size_t given = 0;
    for (const auto& [l, n] : available) {
        double share = static_cast<double>(target) * static_cast<double>(n) / static_cast<double>(total);
        auto whole = static_cast<std::size_t>(std::floor(share));
        out[l] = whole;
        given += whole;
        remainders.emplace_back(share - static_cast<double>(whole), l);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });
    for (std::size_t i = 0; given < target && i < remainders.size(); ++i) {
        FeatureLabel l = remainders[i].second;
        if (out[l] < available.at(l)) {
            ++out[l];
            ++given;
        }
    }
    return out;
}

}  // namespace

TrainingSet build_training_set(FeatureLabel positive, const Corpus& corpus, const LabelSiteMap& map,
                               std::uint64_t seed, const SamplingOptions& options) {
    TrainingSet ts;
    ts.positive_label = positive;
    ts.seed = seed;
    ts.threshold = options.threshold;
    ts.negative_classes = select_negative_classes(positive, map, options.threshold);

    std::vector<const Article*> pos_pool;
    std::map<FeatureLabel, std::vector<const Article*>> neg_pools;
    for (const auto& a : corpus.articles()) {
        if (a.has_weak_label(positive)) {
            pos_pool.push_back(&a);
            continue;
        }
        auto cls = article_class(a);
        if (cls && ts.negative_classes.count(*cls)) neg_pools[*cls].push_back(&a);
    }
    if (pos_pool.empty()) {
        throw ValidationError("no articles carry the positive label '" + std::string(to_string(positive)) + "'");
    }
    std::map<FeatureLabel, std::size_t> available;
    for (const auto& [l, pool] : neg_pools) available[l] = pool.size();
    if (available.empty()) {
        throw ValidationError("no negative articles available for '" + std::string(to_string(positive)) + "'");
    }

    Rng rng(seed);
    ts.positives = weighted_pick(pos_pool, std::min(options.n_pos, pos_pool.size()), rng);

    const auto target = static_cast<std::size_t>(
        std::llround(options.neg_ratio * static_cast<double>(ts.positives.size())));
    ts.negative_allocation = allocate(available, std::max<std::size_t>(target, 1));
    for (const auto& [l, n] : ts.negative_allocation) {
        auto picked = weighted_pick(neg_pools[l], n, rng);
        ts.negatives.insert(ts.negatives.end(), picked.begin(), picked.end());
    }
    if (ts.negatives.empty()) {
        throw ValidationError("no negative articles sampled for '" + std::string(to_string(positive)) + "'");
    }
    const double n = static_cast<double>(ts.positives.size() + ts.negatives.size());
    ts.class_weights.positive = n / (2.0 * static_cast<double>(ts.positives.size()));
    ts.class_weights.negative = n / (2.0 * static_cast<double>(ts.negatives.size()));
    return ts;
}

void write_sampling_manifest(const TrainingSet& ts, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    json classes = json::array();
    for (FeatureLabel l : ts.negative_classes) classes.push_back(to_string(l));
    json allocation = json::object();
    for (const auto& [l, n] : ts.negative_allocation) allocation[std::string(to_string(l))] = n;
    json header = {{"positive_label", to_string(ts.positive_label)},
                   {"seed", ts.seed},
                   {"threshold", ts.threshold},
                   {"negative_classes", classes},
                   {"negative_allocation", allocation},
                   {"class_weights", {{"positive", ts.class_weights.positive}, {"negative", ts.class_weights.negative}}}};
    out << header.dump() << '\n';
    for (const auto& id : ts.positives) out << json{{"role", "pos"}, {"article_id", id}}.dump() << '\n';
    for (const auto& id : ts.negatives) out << json{{"role", "neg"}, {"article_id", id}}.dump() << '\n';
}

TrainingSet read_sampling_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot open sampling manifest " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty manifest");
    TrainingSet ts;
    try {
        json header = json::parse(line);
        ts.positive_label = label_from_string(header.at("positive_label").get<std::string>());
        ts.seed = header.at("seed").get<std::uint64_t>();
        ts.threshold = header.at("threshold").get<double>();
        for (const auto& l : header.at("negative_classes")) ts.negative_classes.insert(label_from_string(l.get<std::string>()));
        const json allocation = header.value("negative_allocation", json::object());
        for (const auto& [k, v] : allocation.items()) {
            ts.negative_allocation[label_from_string(k)] = v.get<std::size_t>();
        }
        ts.class_weights.positive = header.at("class_weights").at("positive").get<double>();
        ts.class_weights.negative = header.at("class_weights").at("negative").get<double>();
        std::size_t line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            json j = json::parse(line);
            const std::string role = j.at("role").get<std::string>();
            const std::string id = j.at("article_id").get<std::string>();
            if (role == "pos") {
                ts.positives.push_back(id);
            } else if (role == "neg") {
                ts.negatives.push_back(id);
            } else {
                throw ValidationError("line " + std::to_string(line_no) + ": unknown role '" + role + "'");
            }
        }
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return ts;
}

// ---------------------------------------------------------------------------

namespace {

struct SourceGroup {
    std::string name;
    std::vector<const Article*> articles;
    bool positive_majority = false;
};

void take_stratified(std::vector<const Article*> pool, std::size_t n, const StratifyFn& stratify, Rng& rng,
                     std::vector<std::string>& out, std::set<std::string>& used) {
    rng.shuffle(pool);
    if (!stratify || pool.empty()) {
        for (std::size_t i = 0; i < pool.size() && i < n; ++i) {
            out.push_back(pool[i]->id);
            used.insert(pool[i]->id);
        }
        return;
    }
    std::vector<const Article*> pos;
    std::vector<const Article*> neg;
    for (const Article* a : pool) (stratify(*a) ? pos : neg).push_back(a);
    auto want_pos = static_cast<std::size_t>(std::llround(static_cast<double>(n) * static_cast<double>(pos.size()) /
                                                          static_cast<double>(pool.size())));
    want_pos = std::min(want_pos, pos.size());
    std::size_t want_neg = std::min(n - want_pos, neg.size());
    if (want_pos + want_neg < n) want_pos = std::min(pos.size(), n - want_neg);
    for (std::size_t i = 0; i < want_pos; ++i) {
        out.push_back(pos[i]->id);
        used.insert(pos[i]->id);
    }
    for (std::size_t i = 0; i < want_neg; ++i) {
        out.push_back(neg[i]->id);
        used.insert(neg[i]->id);
    }
}

}  // namespace

SplitSpec split_disjoint_sources(const Corpus& corpus, std::size_t dev_n, std::size_t test_n,
                                 std::uint64_t seed, const StratifyFn& stratify) {
    std::map<std::string, SourceGroup> by_source;
    for (const auto& a : corpus.articles()) {
        auto& g = by_source[a.source];
        g.name = a.source;
        g.articles.push_back(&a);
    }
    if (by_source.size() < 2) {
        throw ValidationError("need at least 2 distinct sources for a source-disjoint split, found " +
                              std::to_string(by_source.size()));
    }
    std::size_t total_pos = 0;
    std::vector<SourceGroup> groups;
    for (auto& [name, g] : by_source) {
        if (stratify) {
            std::size_t p = 0;
            for (const Article* a : g.articles) p += stratify(*a) ? 1 : 0;
            total_pos += p;
            g.positive_majority = 2 * p > g.articles.size();
        }
        groups.push_back(std::move(g));
    }

    Rng rng(seed);
    rng.shuffle(groups);

    // Pick whole sources for the test side until the requested size is covered.
    std::vector<bool> in_test(groups.size(), false);
    std::size_t test_supply = 0;
    if (stratify) {
        const double pos_frac = static_cast<double>(total_pos) / static_cast<double>(corpus.size());
        const auto want_pos = static_cast<std::size_t>(std::llround(static_cast<double>(test_n) * pos_frac));
        const std::size_t want_neg = test_n - std::min(want_pos, test_n);
        std::size_t got_pos = 0;
        std::size_t got_neg = 0;
        for (std::size_t i = 0; i < groups.size(); ++i) {
            const bool majority = groups[i].positive_majority;
            if ((majority && got_pos < want_pos) || (!majority && got_neg < want_neg)) {
                in_test[i] = true;
                for (const Article* a : groups[i].articles) (stratify(*a) ? got_pos : got_neg) += 1;
            }
        }
        test_supply = got_pos + got_neg;
        for (std::size_t i = 0; i < groups.size() && test_supply < test_n; ++i) {
            if (in_test[i]) continue;
            in_test[i] = true;
            test_supply += groups[i].articles.size();
        }
    } else {
        for (std::size_t i = 0; i < groups.size() && test_supply < test_n; ++i) {
            in_test[i] = true;
            test_supply += groups[i].articles.size();
        }
    }

    std::vector<const Article*> test_pool;
    std::vector<const Article*> rest_pool;
    std::size_t rest_sources = 0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        auto& target = in_test[i] ? test_pool : rest_pool;
        target.insert(target.end(), groups[i].articles.begin(), groups[i].articles.end());
        rest_sources += in_test[i] ? 0 : 1;
    }
    if (test_pool.size() < test_n) {
        throw ValidationError("test split short by " + std::to_string(test_n - test_pool.size()) +
                              " articles: sources cannot supply " + std::to_string(test_n));
    }
    if (rest_sources == 0) {
        throw ValidationError("insufficient distinct sources: the test split consumed all " +
                              std::to_string(groups.size()) + " sources, none left for train/dev");
    }
    if (rest_pool.size() <= dev_n) {
        throw ValidationError("train/dev sources hold " + std::to_string(rest_pool.size()) + " articles, short by " +
                              std::to_string(dev_n + 1 - rest_pool.size()) + " for dev_n=" + std::to_string(dev_n) +
                              " plus a non-empty train split");
    }

    SplitSpec split;
    split.seed = seed;
    std::set<std::string> used;
    take_stratified(test_pool, test_n, stratify, rng, split.test, used);
    take_stratified(rest_pool, dev_n, stratify, rng, split.dev, used);
    for (const Article* a : rest_pool) {
        if (!used.count(a->id)) split.train.push_back(a->id);
    }
    return split;
}

}  // namespace agenda
