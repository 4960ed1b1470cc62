#pragma once

#include "agenda/rationale.hpp"
#include "agenda/text.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace agenda {

/// Hyperparameters shared by every backend's training loop.
struct TrainConfig {
    double learning_rate = 1e-5;
    std::size_t early_stop_patience = 15;
    std::size_t max_epochs = 50;
    std::vector<std::uint64_t> seeds = {1000, 2000, 3000};
    double rationale_fraction = kDefaultRationaleFraction;
    double positive_weight = 1.0;  ///< class weights of the loss
    double negative_weight = 1.0;
    std::size_t batch_size = 16;
    double weight_decay = 0.01;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;

    /// Throws ValidationError when the invariants do not hold.
    void validate() const;
};

/// Training defaults tuned per backend. The pretrained encoder keeps the
/// fine-tuning rate; the toy backend trains from scratch and needs a larger one.
TrainConfig default_train_config(std::string_view backend_id);

struct LabeledSequence {
    std::vector<PositionedToken> tokens;
    int label = 0;
};

struct TrainReport {
    std::size_t epochs_run = 0;
    std::size_t best_epoch = 0;  ///< 1-based
    double best_dev_metric = 0.0;
    std::vector<double> dev_history;
};

/// A trained binary classifier over positioned tokens. Immutable; safe for
/// concurrent inference.
class ClassifierModel {
public:
    virtual ~ClassifierModel() = default;

    virtual std::string backend_id() const = 0;
    virtual bool trained() const = 0;

    /// Probability of the positive class.
    virtual double predict(std::span<const PositionedToken> tokens) const = 0;

    /// One non-negative finite score per input token.
    virtual std::vector<double> attention_saliency(std::span<const PositionedToken> tokens) const = 0;

    virtual void save(std::ostream& out) const = 0;
};

class ClassifierBackend {
public:
    virtual ~ClassifierBackend() = default;

    virtual std::string id() const = 0;

    /// Deterministic tokenization with byte offsets into `text`.
    virtual std::vector<Token> tokenize(std::string_view text) const = 0;

    /// Fits a model with the shared loop: class-weighted loss, AdamW,
    /// early stopping on dev balanced accuracy, best epoch restored.
    virtual std::unique_ptr<ClassifierModel> train(const std::vector<LabeledSequence>& train,
                                                   const std::vector<LabeledSequence>& dev,
                                                   const TrainConfig& config, std::uint64_t seed,
                                                   TrainReport* report = nullptr) const = 0;

    virtual std::unique_ptr<ClassifierModel> load(std::istream& in) const = 0;
};

/// Saliency over a token sequence; throws if the model is untrained or the
/// input is empty.
SaliencyMap saliency(const ClassifierModel& model, const std::vector<Token>& tokens);

struct BackendOptions {
    /// Directory with the encoder's vocab.txt and weights.bin (pretrained-encoder only).
    std::string model_dir;
    /// Score whole words (max over sub-tokens) instead of sub-tokens.
    bool word_merged = true;
};

/// "toy" or "pretrained-encoder"; throws UnavailableError for unknown ids or
/// missing encoder weights.
std::unique_ptr<ClassifierBackend> make_backend(std::string_view id, const BackendOptions& options = {});

}  // namespace agenda
