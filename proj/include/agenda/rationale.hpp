#pragma once

#include "agenda/text.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace agenda {

/// Per-token importance scores from a model's attention.
struct SaliencyMap {
    std::vector<Token> tokens;
    std::vector<double> scores;
};

struct RationaleToken {
    std::size_t position = 0;  ///< token index in the document
    std::string token;
    double score = 0.0;
    std::size_t begin = 0;  ///< byte offsets in the document text
    std::size_t end = 0;
};

/// The selected subset of document tokens, in document order.
struct Rationale {
    std::vector<RationaleToken> selected;
    double fraction = 0.0;
};

inline constexpr double kDefaultRationaleFraction = 0.2;

/// Number of tokens kept from an n-token document: max(1, floor(fraction*n + 0.5)).
std::size_t rationale_size(std::size_t n, double fraction = kDefaultRationaleFraction);

/// Keeps the rationale_size(n) highest-scoring tokens; ties go to the earlier
/// position. The result is in document order.
Rationale extract_rationale(const SaliencyMap& map, double fraction = kDefaultRationaleFraction);

/// A token paired with its original document position.
struct PositionedToken {
    std::string token;
    std::size_t position = 0;

    bool operator==(const PositionedToken&) const = default;
};

/// The predictor's view of a rationale: selected tokens with their positions.
std::vector<PositionedToken> predictor_input(const Rationale& rationale);

/// Positions 0..n-1 for a full document.
std::vector<PositionedToken> positioned(const std::vector<Token>& tokens);

}  // namespace agenda
