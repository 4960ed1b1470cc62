#include "agenda/training.hpp"

#include "agenda/error.hpp"
#include "agenda/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace agenda {

void TrainConfig::validate() const {
    if (!(rationale_fraction > 0.0 && rationale_fraction <= 1.0)) {
        throw ValidationError("rationale_fraction must lie in (0, 1]");
    }
    if (early_stop_patience >= max_epochs) throw ValidationError("early_stop_patience must be below max_epochs");
    if (seeds.empty()) throw ValidationError("at least one training seed is required");
    if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
    if (batch_size == 0) throw ValidationError("batch_size must be positive");
    if (!(positive_weight > 0.0) || !(negative_weight > 0.0)) throw ValidationError("class weights must be positive");
}

TrainConfig default_train_config(std::string_view backend_id) {
    TrainConfig c;
    if (backend_id == "toy") {
        c.learning_rate = 0.05;
        c.weight_decay = 1e-4;
    } else if (backend_id == "pretrained-encoder") {
        // Only the classification head is trained on top of the frozen encoder.
        c.learning_rate = 1e-3;
    }
    return c;
}

EarlyStopping::EarlyStopping(std::size_t patience, std::size_t max_epochs)
    : patience_(patience), max_epochs_(max_epochs) {
    if (max_epochs == 0) throw ValidationError("max_epochs must be positive");
}

bool EarlyStopping::record(double metric) {
    history_.push_back(metric);
    if (best_epoch_ == 0 || metric > best_metric_) {
        best_metric_ = metric;
        best_epoch_ = history_.size();
        return true;
    }
    return false;
}

bool EarlyStopping::should_stop() const {
    if (history_.size() >= max_epochs_) return true;
    return best_epoch_ > 0 && history_.size() - best_epoch_ >= patience_;
}

AdamW::AdamW(std::size_t size, const TrainConfig& config)
    : lr_(config.learning_rate),
      beta1_(config.adam_beta1),
      beta2_(config.adam_beta2),
      eps_(config.adam_epsilon),
      weight_decay_(config.weight_decay),
      m_(size, 0.0),
      v_(size, 0.0) {}

void AdamW::step(std::vector<double>& params, const std::vector<double>& grad, const std::vector<bool>& decay_mask) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grad[i];
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
        if (decay_mask[i]) params[i] -= lr_ * weight_decay_ * params[i];
        params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
    }
}

double weighted_bce(double probability, int label, const TrainConfig& config) {
    const double p = std::clamp(probability, 1e-12, 1.0 - 1e-12);
    return label ? -config.positive_weight * std::log(p) : -config.negative_weight * std::log(1.0 - p);
}

TrainReport run_training(TrainableModel& model, const TrainConfig& config, std::uint64_t seed) {
    config.validate();
    const std::size_t n = model.example_count();
    if (n == 0) throw ValidationError("no training examples");
    bool has_pos = false;
    bool has_neg = false;
    for (std::size_t i = 0; i < n; ++i) (model.example_label(i) ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) throw ValidationError("training data must contain both classes");

    std::vector<double>& params = model.parameters();
    AdamW optimizer(params.size(), config);
    EarlyStopping stopper(config.early_stop_patience, config.max_epochs);
    std::vector<double> best = params;
    std::vector<double> grad(params.size(), 0.0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);

    while (!stopper.should_stop()) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t stop = std::min(n, start + config.batch_size);
            std::fill(grad.begin(), grad.end(), 0.0);
            const double scale = 1.0 / static_cast<double>(stop - start);
            for (std::size_t b = start; b < stop; ++b) {
                const std::size_t i = order[b];
                const double w = model.example_label(i) ? config.positive_weight : config.negative_weight;
                model.accumulate_gradient(i, w * scale, grad);
            }
            optimizer.step(params, grad, model.decay_mask());
        }
        if (stopper.record(model.dev_metric())) best = params;
    }
    params = best;

    TrainReport report;
    report.epochs_run = stopper.epochs();
    report.best_epoch = stopper.best_epoch();
    report.best_dev_metric = stopper.best_metric();
    report.dev_history = stopper.history();
    return report;
}

}  // namespace agenda
