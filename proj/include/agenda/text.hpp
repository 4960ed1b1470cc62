#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace agenda {

/// A word token with its byte span in the source text.
struct Token {
    std::string text;
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Splits text into word tokens: maximal runs of ASCII letters, digits,
/// apostrophes, hyphens and any non-ASCII byte. Everything else separates.
std::vector<Token> tokenize_words(std::string_view text);

std::string to_lower(std::string_view text);

/// Lowercases and trims leading/trailing hyphens and apostrophes.
std::string normalize_token(std::string_view token);

std::string trim(std::string_view text);

/// Text every model sees for an article; gold span offsets refer to it.
std::string document_text(std::string_view title, std::string_view body);

}  // namespace agenda
