#include "agenda/sentiment.hpp"

#include "agenda/error.hpp"
#include "agenda/text.hpp"

#include <cctype>
#include <cmath>
#include <fstream>

namespace agenda {

namespace {

std::vector<std::string> read_token_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open " + path.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        out.push_back(to_lower(t));
    }
    return out;
}

bool is_all_caps(std::string_view token) {
    bool alpha = false;
    for (char c : token) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            alpha = true;
            if (!std::isupper(static_cast<unsigned char>(c))) return false;
        }
    }
    return alpha;
}

}  // namespace

ValenceLexicon ValenceLexicon::load(const std::filesystem::path& lexicon, const std::filesystem::path& boosters,
                                    const std::filesystem::path& dampeners, const std::filesystem::path& negations) {
    ValenceLexicon out;
    std::ifstream in(lexicon);
    if (!in) throw NotFoundError("cannot open lexicon " + lexicon.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# version:", 0) == 0) out.version_ = trim(line.substr(10));
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ValidationError(lexicon.string() + ":" + std::to_string(line_no) + ": expected token<TAB>valence");
        }
        double v = 0.0;
        try {
            v = std::stod(line.substr(tab + 1));
        } catch (const std::exception&) {
            throw ValidationError(lexicon.string() + ":" + std::to_string(line_no) + ": bad valence");
        }
        if (!std::isfinite(v)) throw ValidationError(lexicon.string() + ":" + std::to_string(line_no) + ": non-finite valence");
        out.set_valence(line.substr(0, tab), v);
    }
    // Increments are filled in by SentimentScorer from its config; here they carry only the sign.
    for (auto& t : read_token_list(boosters)) out.add_booster(std::move(t), 1.0);
    for (auto& t : read_token_list(dampeners)) out.add_booster(std::move(t), -1.0);
    for (auto& t : read_token_list(negations)) out.add_negation(std::move(t));
    return out;
}

ValenceLexicon ValenceLexicon::load_dir(const std::filesystem::path& dir) {
    return load(dir / "lexicon.tsv", dir / "boosters.txt", dir / "dampeners.txt", dir / "negations.txt");
}

void ValenceLexicon::set_valence(std::string token, double valence) {
    if (!std::isfinite(valence)) throw ValidationError("non-finite valence for '" + token + "'");
    valences_[to_lower(token)] = valence;
}

void ValenceLexicon::add_booster(std::string token, double increment) { boosters_[to_lower(token)] = increment; }

void ValenceLexicon::add_negation(std::string token) { negations_.insert(to_lower(token)); }

const double* ValenceLexicon::valence(std::string_view token) const {
    auto it = valences_.find(std::string(token));
    return it == valences_.end() ? nullptr : &it->second;
}

const double* ValenceLexicon::booster(std::string_view token) const {
    auto it = boosters_.find(std::string(token));
    return it == boosters_.end() ? nullptr : &it->second;
}

bool ValenceLexicon::is_negation(std::string_view token) const {
    if (negations_.count(std::string(token))) return true;
    return token.size() > 3 && token.substr(token.size() - 3) == "n't";
}

SentimentScorer::SentimentScorer(ValenceLexicon lexicon, SentimentConfig config)
    : lexicon_(std::move(lexicon)), config_(config) {
    if (!(config_.normalization_alpha > 0.0)) throw ValidationError("normalization alpha must be positive");
}

double SentimentScorer::raw_sum(std::string_view text) const {
    const auto tokens = tokenize_words(text);
    std::vector<std::string> lower;
    lower.reserve(tokens.size());
    bool any_caps = false;
    bool any_lower = false;
    for (const auto& t : tokens) {
        lower.push_back(normalize_token(t.text));
        (is_all_caps(t.text) ? any_caps : any_lower) = true;
    }
    const bool caps_differential = config_.emphasis && any_caps && any_lower;

    double sum = 0.0;
    for (std::size_t i = 0; i < lower.size(); ++i) {
        const double* base = lexicon_.valence(lower[i]);
        if (!base || lexicon_.booster(lower[i])) continue;
        double v = *base;
        if (caps_differential && is_all_caps(tokens[i].text)) v += v > 0 ? config_.caps_increment : -config_.caps_increment;

        for (std::size_t d = 1; d <= config_.negation_window && d <= i; ++d) {
            const std::string& prev = lower[i - d];
            if (const double* b = lexicon_.booster(prev); b && !lexicon_.valence(prev)) {
                double scalar = config_.booster_increment * (*b > 0 ? 1.0 : -1.0);
                if (v < 0) scalar = -scalar;
                if (d == 2) scalar *= 0.95;
                if (d == 3) scalar *= 0.9;
                v += scalar;
            }
        }
        for (std::size_t d = 1; d <= config_.negation_window && d <= i; ++d) {
            if (lexicon_.is_negation(lower[i - d])) v *= config_.negation_scalar;
        }
        sum += v;
    }
    if (config_.emphasis && sum != 0.0) {
        std::size_t bangs = 0;
        for (char c : text) bangs += c == '!' ? 1 : 0;
        const double amp = static_cast<double>(std::min<std::size_t>(bangs, 4)) * config_.exclamation_increment;
        sum += sum > 0 ? amp : -amp;
    }
    return sum;
}

double SentimentScorer::compound_polarity(std::string_view text) const {
    const double s = raw_sum(text);
    if (s == 0.0) return 0.0;
    return s / std::sqrt(s * s + config_.normalization_alpha);
}

bool SentimentScorer::negative_sentiment(const Article& article) const {
    std::string text = article.title;
    text.push_back(' ');
    text.append(article.body);
    return compound_polarity(text) < 0.0;
}

}  // namespace agenda
