#include "agenda/backend.hpp"

#include "agenda/encoder_backend.hpp"
#include "agenda/error.hpp"
#include "agenda/toy_backend.hpp"

#include <cmath>

namespace agenda {

SaliencyMap saliency(const ClassifierModel& model, const std::vector<Token>& tokens) {
    if (!model.trained()) throw UnavailableError("saliency requested from an untrained model");
    if (tokens.empty()) throw ValidationError("saliency requested for an empty token sequence");
    SaliencyMap map;
    map.tokens = tokens;
    const auto input = positioned(tokens);
    map.scores = model.attention_saliency(input);
    if (map.scores.size() != tokens.size()) throw Error("backend returned a saliency vector of the wrong length");
    for (double s : map.scores) {
        if (!std::isfinite(s) || s < 0.0) throw Error("backend returned a negative or non-finite saliency score");
    }
    return map;
}

std::unique_ptr<ClassifierBackend> make_backend(std::string_view id, const BackendOptions& options) {
    if (id == "toy") return std::make_unique<ToyBackend>();
    if (id == "pretrained-encoder") return make_encoder_backend(options);
    throw ValidationError("unknown backend '" + std::string(id) + "' (expected toy or pretrained-encoder)");
}

}  // namespace agenda
