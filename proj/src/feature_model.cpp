#include "agenda/feature_model.hpp"

#include "agenda/error.hpp"

#include <unordered_set>

namespace agenda {

using nlohmann::json;

namespace {

std::vector<PositionedToken> full_input(const ClassifierBackend& backend, std::string_view text) {
    return positioned(backend.tokenize(text));
}

std::vector<PositionedToken> rationale_input(const ClassifierBackend& backend, const ClassifierModel& extractor,
                                             std::string_view text, double fraction) {
    const auto tokens = backend.tokenize(text);
    if (tokens.empty()) return {};
    return predictor_input(extract_rationale(saliency(extractor, tokens), fraction));
}

}  // namespace

FeatureModel train_feature_model(const TrainingSet& ts, const Corpus& corpus, const SplitSpec& split,
                                 std::shared_ptr<const ClassifierBackend> backend, TrainConfig config,
                                 std::uint64_t seed) {
    if (!backend) throw ValidationError("train_feature_model: no backend");
    config.positive_weight = ts.class_weights.positive;
    config.negative_weight = ts.class_weights.negative;
    config.validate();

    const std::unordered_set<std::string> positives(ts.positives.begin(), ts.positives.end());
    std::unordered_set<std::string> members(ts.negatives.begin(), ts.negatives.end());
    members.insert(ts.positives.begin(), ts.positives.end());

    auto collect = [&](const std::vector<std::string>& ids) {
        std::vector<const Article*> out;
        for (const auto& id : ids) {
            if (members.count(id)) out.push_back(&corpus.at(id));
        }
        return out;
    };
    const auto train_articles = collect(split.train);
    const auto dev_articles = collect(split.dev);

    auto label_of = [&](const Article* a) { return positives.count(a->id) ? 1 : 0; };
    std::size_t train_pos = 0;
    for (const Article* a : train_articles) train_pos += static_cast<std::size_t>(label_of(a));
    if (train_pos == 0 || train_pos == train_articles.size()) {
        throw ValidationError("feature '" + std::string(to_string(ts.positive_label)) +
                              "': training split lacks positive or negative examples");
    }
    if (dev_articles.empty()) throw ValidationError("a dev split is required for early stopping");

    FeatureModel fm;
    fm.feature = ts.positive_label;
    fm.backend = backend;
    fm.config = config;
    fm.seed = seed;

    // Stage 1: extractor on full documents.
    std::vector<LabeledSequence> train_full;
    std::vector<LabeledSequence> dev_full;
    for (const Article* a : train_articles) {
        auto tokens = full_input(*backend, a->text());
        if (!tokens.empty()) train_full.push_back({std::move(tokens), label_of(a)});
    }
    for (const Article* a : dev_articles) {
        auto tokens = full_input(*backend, a->text());
        if (!tokens.empty()) dev_full.push_back({std::move(tokens), label_of(a)});
    }
    fm.extractor = backend->train(train_full, dev_full, config, seed, &fm.extractor_report);

    // Stage 2: predictor on rationale tokens only.
    auto to_rationales = [&](const std::vector<const Article*>& articles) {
        std::vector<LabeledSequence> out;
        for (const Article* a : articles) {
            auto tokens = rationale_input(*backend, *fm.extractor, a->text(), config.rationale_fraction);
            if (!tokens.empty()) out.push_back({std::move(tokens), label_of(a)});
        }
        return out;
    };
    const auto train_rat = to_rationales(train_articles);
    const auto dev_rat = to_rationales(dev_articles);
    fm.predictor = backend->train(train_rat, dev_rat, config, seed + 1, &fm.predictor_report);
    return fm;
}

FeaturePrediction predict_feature(const FeatureModel& fm, const Article& article) {
    if (!fm.extractor || !fm.predictor) throw UnavailableError("feature model is not trained");
    const auto tokens = fm.backend->tokenize(article.text());
    if (tokens.empty()) throw ValidationError("article '" + article.id + "' has no text to classify");
    FeaturePrediction out;
    out.feature = fm.feature;
    out.rationale = extract_rationale(saliency(*fm.extractor, tokens), fm.config.rationale_fraction);
    out.confidence = fm.predictor->predict(predictor_input(out.rationale));
    out.label = out.confidence >= 0.5;
    return out;
}

double predict_extractor(const FeatureModel& fm, const Article& article) {
    if (!fm.extractor) throw UnavailableError("feature model is not trained");
    const auto tokens = full_input(*fm.backend, article.text());
    if (tokens.empty()) throw ValidationError("article '" + article.id + "' has no text to classify");
    return fm.extractor->predict(tokens);
}

json to_json(const Rationale& rationale) {
    json out = json::array();
    for (const auto& t : rationale.selected) out.push_back({{"pos", t.position}, {"token", t.token}, {"score", t.score}});
    return out;
}

json to_json(const FeaturePrediction& p) {
    return {{"feature", to_string(p.feature)},
            {"label", p.label},
            {"confidence", p.confidence},
            {"rationale", to_json(p.rationale)}};
}

double AgendaBaselineModel::predict(std::string_view text) const {
    if (!model) throw UnavailableError("agenda baseline is not trained");
    const auto tokens = full_input(*backend, text);
    if (tokens.empty()) throw ValidationError("no text to classify");
    return model->predict(tokens);
}

AgendaBaselineModel train_agenda_baseline(const std::vector<std::pair<std::string, AgendaBucket>>& train,
                                          const std::vector<std::pair<std::string, AgendaBucket>>& dev,
                                          std::shared_ptr<const ClassifierBackend> backend,
                                          const TrainConfig& config, std::uint64_t seed) {
    if (!backend) throw ValidationError("train_agenda_baseline: no backend");
    std::size_t harmful = 0;
    for (const auto& [text, bucket] : train) harmful += bucket == AgendaBucket::harmful ? 1 : 0;
    if (harmful == 0 || harmful == train.size()) {
        throw ValidationError("agenda baseline needs both benign and harmful training examples");
    }
    auto convert = [&](const std::vector<std::pair<std::string, AgendaBucket>>& rows) {
        std::vector<LabeledSequence> out;
        for (const auto& [text, bucket] : rows) {
            auto tokens = full_input(*backend, text);
            if (!tokens.empty()) out.push_back({std::move(tokens), bucket == AgendaBucket::harmful ? 1 : 0});
        }
        return out;
    };
    TrainConfig c = config;
    const double n = static_cast<double>(train.size());
    c.positive_weight = n / (2.0 * static_cast<double>(harmful));
    c.negative_weight = n / (2.0 * static_cast<double>(train.size() - harmful));
    AgendaBaselineModel out;
    out.backend = backend;
    out.model = backend->train(convert(train), convert(dev), c, seed, &out.report);
    return out;
}

}  // namespace agenda
