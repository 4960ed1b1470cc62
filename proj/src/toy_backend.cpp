#include "agenda/toy_backend.hpp"

#include "agenda/error.hpp"
#include "agenda/metrics.hpp"
#include "agenda/random.hpp"
#include "agenda/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

namespace agenda {

namespace {

constexpr char kMagic[8] = {'A', 'G', 'T', 'O', 'Y', '0', '0', '1'};

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char buf[8];
    if (!in.read(reinterpret_cast<char*>(buf), 8)) throw ValidationError("truncated toy model file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void write_f64(std::ostream& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof bits);
    write_u64(out, bits);
}

double read_f64(std::istream& in) {
    std::uint64_t bits = read_u64(in);
    double d;
    std::memcpy(&d, &bits, sizeof d);
    return d;
}

}  // namespace

ToyModel::ToyModel(ToyShape shape)
    : shape_(shape), params_(2 * shape.hash_buckets + shape.position_buckets + 1, 0.0) {
    if (shape.hash_buckets == 0 || shape.position_buckets == 0 || shape.context_limit == 0) {
        throw ValidationError("toy model dimensions must be positive");
    }
}

std::size_t ToyModel::token_bucket(std::string_view token, std::size_t buckets) {
    // FNV-1a over the normalized form.
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : normalize_token(token)) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h % buckets);
}

std::size_t ToyModel::position_bucket(std::size_t position, std::size_t buckets) {
    // 0 | 1 | 2-3 | 4-7 | ... logarithmic bands.
    std::size_t b = 0;
    while (position > 0) {
        position >>= 1;
        ++b;
    }
    return std::min(b, buckets - 1);
}

ToyModel::Forward ToyModel::forward(std::span<const PositionedToken> tokens) const {
    Forward f;
    const std::size_t n = std::min(tokens.size(), shape_.context_limit);
    f.token_buckets.resize(n);
    f.position_buckets.resize(n);
    f.attention.resize(n);
    const std::size_t H = shape_.hash_buckets;
    double max_score = -INFINITY;
    for (std::size_t i = 0; i < n; ++i) {
        f.token_buckets[i] = token_bucket(tokens[i].token, H);
        f.position_buckets[i] = position_bucket(tokens[i].position, shape_.position_buckets);
        f.attention[i] = params_[f.token_buckets[i]] + params_[2 * H + f.position_buckets[i]];
        max_score = std::max(max_score, f.attention[i]);
    }
    double norm = 0.0;
    for (double& a : f.attention) {
        a = std::exp(a - max_score);
        norm += a;
    }
    for (std::size_t i = 0; i < n; ++i) {
        f.attention[i] /= norm;
        f.pooled += f.attention[i] * params_[H + f.token_buckets[i]];
    }
    f.logit = f.pooled + params_.back();
    f.probability = sigmoid(f.logit);
    return f;
}

double ToyModel::predict(std::span<const PositionedToken> tokens) const {
    if (tokens.empty()) throw ValidationError("cannot classify an empty token sequence");
    return forward(tokens).probability;
}

std::vector<double> ToyModel::attention_saliency(std::span<const PositionedToken> tokens) const {
    if (!trained_) throw UnavailableError("saliency requested from an untrained model");
    if (tokens.empty()) throw ValidationError("saliency requested for an empty token sequence");
    auto f = forward(tokens);
    // Tokens past the context limit were never attended to.
    f.attention.resize(tokens.size(), 0.0);
    return f.attention;
}

double ToyModel::loss(std::span<const PositionedToken> tokens, int label, double weight) const {
    const double z = forward(tokens).logit;
    // weight * (softplus(z) - y z)
    const double sp = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    return weight * (sp - (label ? z : 0.0));
}

void ToyModel::accumulate_gradient(std::span<const PositionedToken> tokens, int label, double weight,
                                   std::vector<double>& grad) const {
    const auto f = forward(tokens);
    const std::size_t H = shape_.hash_buckets;
    const double dz = weight * (f.probability - (label ? 1.0 : 0.0));
    grad.back() += dz;
    for (std::size_t i = 0; i < f.attention.size(); ++i) {
        const double a = f.attention[i];
        const std::size_t h = f.token_buckets[i];
        grad[H + h] += dz * a;
        const double ds = dz * a * (params_[H + h] - f.pooled);
        grad[h] += ds;
        grad[2 * H + f.position_buckets[i]] += ds;
    }
}

void ToyModel::save(std::ostream& out) const {
    out.write(kMagic, sizeof kMagic);
    write_u64(out, shape_.hash_buckets);
    write_u64(out, shape_.position_buckets);
    write_u64(out, shape_.context_limit);
    write_u64(out, params_.size());
    for (double p : params_) write_f64(out, p);
}

ToyModel ToyModel::load(std::istream& in) {
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw ValidationError("not a toy model file");
    ToyShape shape;
    shape.hash_buckets = read_u64(in);
    shape.position_buckets = read_u64(in);
    shape.context_limit = read_u64(in);
    if (shape.hash_buckets == 0 || shape.hash_buckets > (std::size_t{1} << 26) || shape.position_buckets == 0 ||
        shape.position_buckets > 4096) {
        throw ValidationError("toy model header holds implausible dimensions");
    }
    ToyModel model(shape);
    const std::uint64_t count = read_u64(in);
    if (count != model.params_.size()) throw ValidationError("toy model parameter count mismatch");
    for (double& p : model.params_) p = read_f64(in);
    model.trained_ = true;
    return model;
}

namespace {

class ToyTrainable final : public TrainableModel {
public:
    ToyTrainable(ToyModel& model, const std::vector<LabeledSequence>& train, const std::vector<LabeledSequence>& dev)
        : model_(model), train_(train), dev_(dev), mask_(model.parameters().size(), true) {
        mask_.back() = false;  // bias
    }

    std::vector<double>& parameters() override { return model_.parameters(); }
    const std::vector<bool>& decay_mask() const override { return mask_; }
    std::size_t example_count() const override { return train_.size(); }
    int example_label(std::size_t i) const override { return train_[i].label; }

    void accumulate_gradient(std::size_t i, double weight, std::vector<double>& grad) const override {
        model_.accumulate_gradient(train_[i].tokens, train_[i].label, weight, grad);
    }

    double dev_metric() const override {
        std::vector<int> preds;
        std::vector<int> golds;
        for (const auto& ex : dev_) {
            if (ex.tokens.empty()) continue;
            preds.push_back(model_.predict(ex.tokens) >= 0.5 ? 1 : 0);
            golds.push_back(ex.label);
        }
        return golds.empty() ? 0.0 : balanced_accuracy(preds, golds);
    }

private:
    ToyModel& model_;
    const std::vector<LabeledSequence>& train_;
    const std::vector<LabeledSequence>& dev_;
    std::vector<bool> mask_;
};

}  // namespace

std::unique_ptr<ClassifierModel> ToyBackend::train(const std::vector<LabeledSequence>& train,
                                                   const std::vector<LabeledSequence>& dev, const TrainConfig& config,
                                                   std::uint64_t seed, TrainReport* report) const {
    if (dev.empty()) throw ValidationError("a dev set is required for early stopping");
    auto model = std::make_unique<ToyModel>(shape_);
    Rng init(seed);
    auto& params = model->parameters();
    for (std::size_t i = 0; i < shape_.hash_buckets; ++i) params[shape_.hash_buckets + i] = 0.01 * init.normal();
    ToyTrainable trainable(*model, train, dev);
    TrainReport r = run_training(trainable, config, seed);
    model->mark_trained();
    if (report) *report = std::move(r);
    return model;
}

std::unique_ptr<ClassifierModel> ToyBackend::load(std::istream& in) const {
    return std::make_unique<ToyModel>(ToyModel::load(in));
}

}  // namespace agenda
