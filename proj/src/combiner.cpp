#include "agenda/combiner.hpp"

#include "agenda/error.hpp"
#include "agenda/metrics.hpp"
#include "agenda/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>

namespace agenda {

using nlohmann::json;

std::string_view to_string(Provenance p) {
    switch (p) {
        case Provenance::annotated: return "annotated";
        case Provenance::weak: return "weak";
        case Provenance::model: return "model";
    }
    return "model";
}

namespace {

constexpr std::size_t kParams = kFeatureCount + 1;  // weights then bias
using Vec = Eigen::Matrix<double, kParams, 1>;
using Mat = Eigen::Matrix<double, kParams, kParams>;

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

Vec design_row(const FeatureVector& fv) {
    Vec x;
    for (std::size_t i = 0; i < kFeatureCount; ++i) x[static_cast<Eigen::Index>(i)] = fv.values[i];
    x[kFeatureCount] = 1.0;
    return x;
}

struct Objective {
    const std::vector<Vec>& rows;
    const std::vector<double>& targets;
    double l2;

    double value(const Vec& theta) const {
        double loss = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double z = rows[i].dot(theta);
            loss += softplus(z) - targets[i] * z;
        }
        loss /= static_cast<double>(rows.size());
        return loss + 0.5 * l2 * theta.head<kFeatureCount>().squaredNorm();
    }

    void gradient_hessian(const Vec& theta, Vec& g, Mat& h) const {
        g.setZero();
        h.setZero();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double p = sigmoid(rows[i].dot(theta));
            g += (p - targets[i]) * rows[i];
            h += p * (1.0 - p) * rows[i] * rows[i].transpose();
        }
        const double n = static_cast<double>(rows.size());
        g /= n;
        h /= n;
        for (std::size_t j = 0; j < kFeatureCount; ++j) {
            const auto idx = static_cast<Eigen::Index>(j);
            g[idx] += l2 * theta[idx];
            h(idx, idx) += l2;
        }
    }
};

}  // namespace

CombinerModel fit(const std::vector<FeatureVector>& features, const std::vector<AgendaBucket>& buckets,
                  const CombinerConfig& config, std::uint64_t seed) {
    if (features.size() != buckets.size()) throw ValidationError("fit: features/buckets length mismatch");
    std::size_t harmful = 0;
    for (AgendaBucket b : buckets) harmful += b == AgendaBucket::harmful ? 1 : 0;
    if (harmful == 0 || harmful == buckets.size()) {
        throw ValidationError("fit: both benign and harmful examples are required");
    }
    std::vector<Vec> rows;
    std::vector<double> targets;
    rows.reserve(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        rows.push_back(design_row(features[i]));
        targets.push_back(buckets[i] == AgendaBucket::harmful ? 1.0 : 0.0);
    }
    Objective obj{rows, targets, config.l2};

    Vec theta = Vec::Zero();
    Vec g;
    Mat h;
    double current = obj.value(theta);
    for (int iter = 0; iter < config.max_iterations; ++iter) {
        obj.gradient_hessian(theta, g, h);
        if (g.norm() < config.tolerance) break;
        // A tiny ridge keeps the solve well posed when a column is constant.
        Mat reg = h;
        reg.diagonal().array() += 1e-12;
        Vec step = reg.ldlt().solve(-g);
        double t = 1.0;
        Vec candidate = theta + step;
        double value = obj.value(candidate);
        while (value > current + 1e-4 * t * g.dot(step) && t > 1e-10) {
            t *= 0.5;
            candidate = theta + t * step;
            value = obj.value(candidate);
        }
        const double change = current - value;
        theta = candidate;
        current = value;
        if (std::fabs(change) < 1e-15) break;
    }

    CombinerModel model;
    for (std::size_t j = 0; j < kFeatureCount; ++j) model.weights[j] = theta[static_cast<Eigen::Index>(j)];
    model.bias = theta[kFeatureCount];
    model.seed = seed;
    model.l2 = config.l2;
    for (double w : model.weights) {
        if (!std::isfinite(w)) throw Error("fit: non-finite weight");
    }
    return model;
}

AgendaVerdict predict(const CombinerModel& model, const FeatureVector& fv) {
    AgendaVerdict v;
    v.logit = model.bias;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        v.contributions[j] = model.weights[j] * fv.values[j];
        v.logit += v.contributions[j];
    }
    v.probability = sigmoid(v.logit);
    v.bucket = v.probability >= 0.5 ? AgendaBucket::harmful : AgendaBucket::benign;
    return v;
}

double log_loss(const CombinerModel& model, const std::vector<FeatureVector>& features,
                const std::vector<AgendaBucket>& buckets) {
    double loss = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const double z = predict(model, features[i]).logit;
        loss += softplus(z) - (buckets[i] == AgendaBucket::harmful ? z : 0.0);
    }
    return loss / static_cast<double>(features.size());
}

std::vector<std::size_t> stratified_folds(const std::vector<AgendaBucket>& buckets, std::size_t k,
                                          std::uint64_t seed) {
    if (k < 2) throw ValidationError("cross-validation needs k >= 2");
    if (buckets.size() < k) {
        throw ValidationError("cross-validation needs n >= k (n=" + std::to_string(buckets.size()) +
                              ", k=" + std::to_string(k) + ")");
    }
    Rng rng(seed);
    std::vector<std::size_t> fold_of(buckets.size(), 0);
    std::size_t next = 0;
    for (AgendaBucket cls : {AgendaBucket::benign, AgendaBucket::harmful}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < buckets.size(); ++i) {
            if (buckets[i] == cls) members.push_back(i);
        }
        rng.shuffle(members);
        for (std::size_t i : members) fold_of[i] = next++ % k;
    }
    return fold_of;
}

CrossValidationResult cross_validate(const std::vector<FeatureVector>& features,
                                     const std::vector<AgendaBucket>& buckets, std::size_t k, std::uint64_t seed,
                                     const CombinerConfig& config) {
    if (features.size() != buckets.size()) throw ValidationError("cross_validate: length mismatch");
    CrossValidationResult out;
    out.fold_of = stratified_folds(buckets, k, seed);
    out.predictions.assign(buckets.size(), AgendaBucket::benign);

    for (std::size_t fold = 0; fold < k; ++fold) {
        std::vector<FeatureVector> train_x;
        std::vector<AgendaBucket> train_y;
        std::vector<std::size_t> held_out;
        for (std::size_t i = 0; i < features.size(); ++i) {
            if (out.fold_of[i] == fold) {
                held_out.push_back(i);
            } else {
                train_x.push_back(features[i]);
                train_y.push_back(buckets[i]);
            }
        }
        std::size_t harmful = 0;
        for (AgendaBucket b : train_y) harmful += b == AgendaBucket::harmful ? 1 : 0;
        if (harmful == 0 || harmful == train_y.size()) {
            throw ValidationError("training fold " + std::to_string(fold) +
                                  " lacks a class; use a smaller k (k=" + std::to_string(k) + ")");
        }
        CombinerModel model = fit(train_x, train_y, config, seed);
        model.folds = k;
        for (std::size_t j = 0; j < kFeatureCount; ++j) out.mean_weights[j] += model.weights[j] / static_cast<double>(k);
        out.mean_bias += model.bias / static_cast<double>(k);

        std::vector<int> preds;
        std::vector<int> golds;
        for (std::size_t i : held_out) {
            out.predictions[i] = predict(model, features[i]).bucket;
            preds.push_back(static_cast<int>(out.predictions[i]));
            golds.push_back(static_cast<int>(buckets[i]));
        }
        out.fold_accuracy.push_back(accuracy(preds, golds));
        out.fold_balanced_accuracy.push_back(balanced_accuracy(preds, golds));
    }
    const auto acc = mean_std(out.fold_accuracy);
    const auto bal = mean_std(out.fold_balanced_accuracy);
    out.mean_accuracy = acc.mean;
    out.std_accuracy = acc.std;
    out.mean_balanced_accuracy = bal.mean;
    out.std_balanced_accuracy = bal.std;
    return out;
}

MajorityBaseline majority_baseline(const std::vector<AgendaBucket>& buckets) {
    std::size_t harmful = 0;
    for (AgendaBucket b : buckets) harmful += b == AgendaBucket::harmful ? 1 : 0;
    MajorityBaseline m;
    m.bucket = 2 * harmful > buckets.size() ? AgendaBucket::harmful : AgendaBucket::benign;
    return m;
}

json to_json(const CombinerModel& model) {
    json weights = json::object();
    for (std::size_t j = 0; j < kFeatureCount; ++j) weights[std::string(to_string(kModelFeatures[j]))] = model.weights[j];
    return {{"weights", weights}, {"bias", model.bias}, {"folds", model.folds}, {"seed", model.seed}, {"l2", model.l2}};
}

CombinerModel combiner_from_json(const json& j) {
    CombinerModel m;
    try {
        for (std::size_t k = 0; k < kFeatureCount; ++k) {
            m.weights[k] = j.at("weights").at(std::string(to_string(kModelFeatures[k]))).get<double>();
        }
        m.bias = j.at("bias").get<double>();
        m.folds = j.value("folds", std::size_t{0});
        m.seed = j.value("seed", std::uint64_t{0});
        m.l2 = j.value("l2", 0.0);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("combiner model: ") + e.what());
    }
    return m;
}

void save_combiner(const CombinerModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << to_json(model).dump(2) << '\n';
}

CombinerModel load_combiner(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open combiner model " + path.string());
    try {
        return combiner_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

json to_json(const AgendaVerdict& verdict, const FeatureVector& fv) {
    json contributions = json::array();
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        contributions.push_back({{"feature", to_string(kModelFeatures[j])},
                                 {"value", fv.values[j]},
                                 {"contribution", verdict.contributions[j]}});
    }
    return {{"bucket", to_string(verdict.bucket)},
            {"probability", verdict.probability},
            {"logit", verdict.logit},
            {"contributions", contributions}};
}

}  // namespace agenda
