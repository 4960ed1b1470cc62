#include "agenda/rationale.hpp"

#include "agenda/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace agenda {

std::size_t rationale_size(std::size_t n, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ValidationError("rationale fraction must lie in (0, 1]");
    if (n == 0) return 0;
    const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
    return std::clamp<std::size_t>(k, 1, n);
}

Rationale extract_rationale(const SaliencyMap& map, double fraction) {
    if (map.tokens.size() != map.scores.size()) throw ValidationError("saliency map tokens/scores length mismatch");
    if (map.tokens.empty()) throw ValidationError("cannot extract a rationale from an empty saliency map");
    const std::size_t n = map.tokens.size();
    const std::size_t k = rationale_size(n, fraction);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return map.scores[a] > map.scores[b]; });
    order.resize(k);
    std::sort(order.begin(), order.end());

    Rationale r;
    r.fraction = fraction;
    r.selected.reserve(k);
    for (std::size_t i : order) {
        const Token& t = map.tokens[i];
        r.selected.push_back({i, t.text, map.scores[i], t.begin, t.end});
    }
    return r;
}

std::vector<PositionedToken> predictor_input(const Rationale& rationale) {
    if (rationale.selected.empty()) throw ValidationError("empty rationale");
    std::vector<PositionedToken> out;
    out.reserve(rationale.selected.size());
    for (const auto& t : rationale.selected) out.push_back({t.token, t.position});
    return out;
}

std::vector<PositionedToken> positioned(const std::vector<Token>& tokens) {
    std::vector<PositionedToken> out;
    out.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) out.push_back({tokens[i].text, i});
    return out;
}

}  // namespace agenda
