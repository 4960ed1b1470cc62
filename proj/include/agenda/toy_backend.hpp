#pragma once

#include "agenda/backend.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace agenda {

struct ToyShape {
    std::size_t hash_buckets = std::size_t{1} << 14;
    std::size_t position_buckets = 16;
    std::size_t context_limit = 4096;
};

/// Hashed-feature attention classifier. Every token hashes to a bucket that
/// owns an attention key and a value; position buckets add a key offset.
///
///   s_i = key[h(t_i)] + pos_key[b(p_i)]
///   a   = softmax(s)
///   z   = sum_i a_i * value[h(t_i)] + bias,   p = sigmoid(z)
///
/// The attention weights a_i are the model's saliency scores.
class ToyModel final : public ClassifierModel {
public:
    explicit ToyModel(ToyShape shape = {});

    static std::size_t token_bucket(std::string_view token, std::size_t buckets);
    static std::size_t position_bucket(std::size_t position, std::size_t buckets);

    std::string backend_id() const override { return "toy"; }
    bool trained() const override { return trained_; }
    double predict(std::span<const PositionedToken> tokens) const override;
    std::vector<double> attention_saliency(std::span<const PositionedToken> tokens) const override;
    void save(std::ostream& out) const override;
    static ToyModel load(std::istream& in);

    struct Forward {
        std::vector<std::size_t> token_buckets;
        std::vector<std::size_t> position_buckets;
        std::vector<double> attention;
        double pooled = 0.0;
        double logit = 0.0;
        double probability = 0.0;
    };

    /// Forward pass over at most context_limit tokens (the rest are dropped).
    Forward forward(std::span<const PositionedToken> tokens) const;

    /// weight * BCE(p, label) and its gradient added into grad.
    double loss(std::span<const PositionedToken> tokens, int label, double weight) const;
    void accumulate_gradient(std::span<const PositionedToken> tokens, int label, double weight,
                             std::vector<double>& grad) const;

    double& key(std::string_view token) { return params_[token_bucket(token, shape_.hash_buckets)]; }
    double& value(std::string_view token) {
        return params_[shape_.hash_buckets + token_bucket(token, shape_.hash_buckets)];
    }
    double& position_key(std::size_t bucket) { return params_[2 * shape_.hash_buckets + bucket]; }
    double& bias() { return params_.back(); }

    std::vector<double>& parameters() { return params_; }
    const std::vector<double>& parameters() const { return params_; }
    const ToyShape& shape() const { return shape_; }
    void mark_trained() { trained_ = true; }

private:
    ToyShape shape_;
    std::vector<double> params_;
    bool trained_ = false;
};

class ToyBackend final : public ClassifierBackend {
public:
    explicit ToyBackend(ToyShape shape = {}) : shape_(shape) {}

    std::string id() const override { return "toy"; }
    std::vector<Token> tokenize(std::string_view text) const override { return tokenize_words(text); }
    std::unique_ptr<ClassifierModel> train(const std::vector<LabeledSequence>& train,
                                           const std::vector<LabeledSequence>& dev, const TrainConfig& config,
                                           std::uint64_t seed, TrainReport* report) const override;
    std::unique_ptr<ClassifierModel> load(std::istream& in) const override;

private:
    ToyShape shape_;
};

}  // namespace agenda
