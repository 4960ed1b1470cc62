#pragma once

#include "agenda/backend.hpp"

#include <functional>
#include <vector>

namespace agenda {

/// Patience-based early stopping on a metric to maximize. Improvement must
/// be strict, so the best epoch is the first one reaching the maximum.
class EarlyStopping {
public:
    EarlyStopping(std::size_t patience, std::size_t max_epochs);

    /// Records the metric of the next epoch. Returns true when it is a new best.
    bool record(double metric);

    bool should_stop() const;

    std::size_t epochs() const { return history_.size(); }
    std::size_t best_epoch() const { return best_epoch_; }  ///< 1-based, 0 before any epoch
    double best_metric() const { return best_metric_; }
    const std::vector<double>& history() const { return history_; }

private:
    std::size_t patience_;
    std::size_t max_epochs_;
    std::size_t best_epoch_ = 0;
    double best_metric_ = 0.0;
    std::vector<double> history_;
};

/// AdamW: Adam moments with weight decay applied directly to the parameters.
class AdamW {
public:
    AdamW(std::size_t size, const TrainConfig& config);

    /// `decay_mask[i]` false exempts parameter i from weight decay.
    void step(std::vector<double>& params, const std::vector<double>& grad, const std::vector<bool>& decay_mask);

private:
    double lr_, beta1_, beta2_, eps_, weight_decay_;
    std::size_t t_ = 0;
    std::vector<double> m_;
    std::vector<double> v_;
};

/// What the shared loop needs from a differentiable model.
struct TrainableModel {
    virtual ~TrainableModel() = default;
    virtual std::vector<double>& parameters() = 0;
    virtual const std::vector<bool>& decay_mask() const = 0;
    virtual std::size_t example_count() const = 0;
    /// Adds weight * d(loss)/d(params) for training example i into grad.
    virtual void accumulate_gradient(std::size_t i, double weight, std::vector<double>& grad) const = 0;
    virtual int example_label(std::size_t i) const = 0;
    /// Balanced accuracy on the dev set under the current parameters.
    virtual double dev_metric() const = 0;
};

/// Mini-batch AdamW with class weights and early stopping; leaves the best
/// epoch's parameters in the model.
TrainReport run_training(TrainableModel& model, const TrainConfig& config, std::uint64_t seed);

/// Binary cross-entropy weighted per class.
double weighted_bce(double probability, int label, const TrainConfig& config);

}  // namespace agenda
