#include "agenda/registry.hpp"

#include "agenda/error.hpp"

#include <fstream>

namespace agenda {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw UnavailableError("registry file missing: " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const json& j) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

void write_model(const ClassifierModel& model, const fs::path& path) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    model.save(out);
    if (!out) throw Error("failed writing " + path.string());
}

std::shared_ptr<const ClassifierModel> read_model(const ClassifierBackend& backend, const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UnavailableError("model file missing: " + path.string());
    return backend.load(in);
}

std::string saliency_description(std::string_view backend) {
    if (backend == "toy") return "explicit attention weights";
    return "classification-token attention, penultimate layer, mean over heads";
}

json feature_config(const FeatureModel& fm) {
    return {{"feature", to_string(fm.feature)},
            {"backend", fm.backend->id()},
            {"seed", fm.seed},
            {"train", to_json(fm.config)},
            {"saliency", saliency_description(fm.backend->id())},
            {"extractor_report", to_json(fm.extractor_report)},
            {"predictor_report", to_json(fm.predictor_report)}};
}

}  // namespace

json to_json(const TrainConfig& c) {
    return {{"learning_rate", c.learning_rate},
            {"early_stop_patience", c.early_stop_patience},
            {"max_epochs", c.max_epochs},
            {"seeds", c.seeds},
            {"rationale_fraction", c.rationale_fraction},
            {"class_weights", {{"positive", c.positive_weight}, {"negative", c.negative_weight}}},
            {"batch_size", c.batch_size},
            {"weight_decay", c.weight_decay},
            {"adam_beta1", c.adam_beta1},
            {"adam_beta2", c.adam_beta2},
            {"adam_epsilon", c.adam_epsilon}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
    if (!j.is_object()) throw ValidationError("train config must be a JSON object");
    try {
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.early_stop_patience = j.value("early_stop_patience", c.early_stop_patience);
        c.max_epochs = j.value("max_epochs", c.max_epochs);
        c.seeds = j.value("seeds", c.seeds);
        c.rationale_fraction = j.value("rationale_fraction", c.rationale_fraction);
        if (j.contains("class_weights")) {
            c.positive_weight = j["class_weights"].value("positive", c.positive_weight);
            c.negative_weight = j["class_weights"].value("negative", c.negative_weight);
        }
        c.batch_size = j.value("batch_size", c.batch_size);
        c.weight_decay = j.value("weight_decay", c.weight_decay);
        c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
        c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
        c.adam_epsilon = j.value("adam_epsilon", c.adam_epsilon);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("train config: ") + e.what());
    }
    c.validate();
    return c;
}

json to_json(const TrainReport& r) {
    return {{"epochs_run", r.epochs_run},
            {"best_epoch", r.best_epoch},
            {"best_dev_metric", r.best_dev_metric},
            {"dev_history", r.dev_history}};
}

fs::path Registry::feature_dir(FeatureLabel feature) const { return root_ / std::string(to_string(feature)); }

void Registry::save_feature_model(const FeatureModel& fm, bool primary) const {
    const fs::path dir = feature_dir(fm.feature);
    const fs::path seed_dir = dir / "seeds" / std::to_string(fm.seed);
    write_model(*fm.extractor, seed_dir / "extractor.bin");
    write_model(*fm.predictor, seed_dir / "predictor.bin");
    write_json(seed_dir / "config.json", feature_config(fm));
    if (!primary) return;
    write_model(*fm.extractor, dir / "extractor.bin");
    write_model(*fm.predictor, dir / "predictor.bin");
    write_json(dir / "config.json", feature_config(fm));
    std::ofstream(dir / "backend.txt") << fm.backend->id() << "\n";
}

void Registry::save_metrics(FeatureLabel feature, const json& metrics) const {
    write_json(feature_dir(feature) / "metrics.json", metrics);
}

void Registry::save_combiner(const CombinerModel& model) const {
    fs::create_directories(root_);
    agenda::save_combiner(model, root_ / "combiner.json");
}

void Registry::save_lexicon(const fs::path& lexicon_dir) const {
    const fs::path target = root_ / "lexicon";
    fs::create_directories(target);
    for (const char* name : {"lexicon.tsv", "boosters.txt", "dampeners.txt", "negations.txt"}) {
        fs::copy_file(lexicon_dir / name, target / name, fs::copy_options::overwrite_existing);
    }
}

void Registry::save_manifest(const json& manifest) const { write_json(root_ / "registry.json", manifest); }

json Registry::manifest() const { return read_json(root_ / "registry.json"); }

std::shared_ptr<const ClassifierBackend> Registry::backend(const BackendOptions& options) const {
    const json m = manifest();
    BackendOptions o = options;
    if (o.model_dir.empty()) o.model_dir = m.value("encoder_dir", std::string());
    if (m.contains("word_merged")) o.word_merged = m["word_merged"].get<bool>();
    return make_backend(m.at("backend").get<std::string>(), o);
}

FeatureModel Registry::load_feature_model(FeatureLabel feature, std::shared_ptr<const ClassifierBackend> backend,
                                          std::optional<std::uint64_t> seed) const {
    const fs::path dir = seed ? feature_dir(feature) / "seeds" / std::to_string(*seed) : feature_dir(feature);
    if (seed && !fs::exists(dir)) {
        throw NotFoundError("no model for '" + std::string(to_string(feature)) + "' with seed " + std::to_string(*seed));
    }
    const json config = read_json(dir / "config.json");
    const std::string backend_id = config.at("backend").get<std::string>();
    if (backend_id != backend->id()) {
        throw ValidationError("model for '" + std::string(to_string(feature)) + "' was trained with backend '" +
                              backend_id + "', not '" + backend->id() + "'");
    }
    FeatureModel fm;
    fm.feature = feature;
    fm.seed = config.at("seed").get<std::uint64_t>();
    fm.config = train_config_from_json(config.at("train"), default_train_config(backend_id));
    fm.extractor = read_model(*backend, dir / "extractor.bin");
    fm.predictor = read_model(*backend, dir / "predictor.bin");
    fm.backend = std::move(backend);
    return fm;
}

CombinerModel Registry::load_combiner() const {
    const fs::path path = root_ / "combiner.json";
    if (!fs::exists(path)) throw UnavailableError("registry has no combiner: " + path.string());
    return agenda::load_combiner(path);
}

Pipeline Registry::load_pipeline(const BackendOptions& options) const {
    if (!fs::exists(root_ / "registry.json")) {
        throw UnavailableError("no model registry at " + root_.string());
    }
    auto b = backend(options);
    std::map<FeatureLabel, FeatureModel> models;
    for (FeatureLabel f : kRationaleFeatures) models.emplace(f, load_feature_model(f, b));
    const fs::path lexicon = root_ / "lexicon";
    if (!fs::exists(lexicon / "lexicon.tsv")) throw UnavailableError("registry has no sentiment lexicon");
    return Pipeline(std::move(models), SentimentScorer(ValenceLexicon::load_dir(lexicon)), load_combiner());
}

json Registry::metadata() const {
    json out = manifest();
    json features = json::object();
    for (FeatureLabel f : kRationaleFeatures) {
        const fs::path dir = feature_dir(f);
        json entry = json::object();
        if (fs::exists(dir / "config.json")) entry["config"] = read_json(dir / "config.json");
        if (fs::exists(dir / "metrics.json")) entry["metrics"] = read_json(dir / "metrics.json");
        features[std::string(to_string(f))] = entry;
    }
    out["features"] = features;
    if (fs::exists(root_ / "combiner.json")) out["combiner"] = read_json(root_ / "combiner.json");
    return out;
}

}  // namespace agenda
