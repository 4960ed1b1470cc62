#include "agenda/text.hpp"

#include <cctype>

namespace agenda {

namespace {

bool is_word_byte(unsigned char c) {
    return std::isalnum(c) || c == '\'' || c == '-' || c >= 0x80;
}

}  // namespace

std::vector<Token> tokenize_words(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && !is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) tokens.push_back({std::string(text.substr(start, i - start)), start, i});
    }
    return tokens;
}

std::string to_lower(std::string_view text) {
    std::string out(text);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string normalize_token(std::string_view token) {
    std::size_t b = 0;
    std::size_t e = token.size();
    while (b < e && (token[b] == '-' || token[b] == '\'')) ++b;
    while (e > b && (token[e - 1] == '-' || token[e - 1] == '\'')) --e;
    return to_lower(token.substr(b, e - b));
}

std::string trim(std::string_view text) {
    std::size_t b = 0;
    std::size_t e = text.size();
    while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
    return std::string(text.substr(b, e - b));
}

std::string document_text(std::string_view title, std::string_view body) {
    std::string out;
    out.reserve(title.size() + 1 + body.size());
    out.append(title);
    out.push_back('\n');
    out.append(body);
    return out;
}

}  // namespace agenda
