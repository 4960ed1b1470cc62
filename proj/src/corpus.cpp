#include "agenda/corpus.hpp"

#include "agenda/error.hpp"
#include "agenda/text.hpp"

#include <fstream>
#include <regex>
#include <sstream>

namespace agenda {

using nlohmann::json;

std::string Article::text() const { return document_text(title, body); }

Corpus::Corpus(std::vector<Article> articles) : articles_(std::move(articles)) {
    index_.reserve(articles_.size());
    for (std::size_t i = 0; i < articles_.size(); ++i) {
        const Article& a = articles_[i];
        if (a.id.empty()) throw ValidationError("article #" + std::to_string(i + 1) + ": empty id");
        if (a.source.empty()) throw ValidationError("article '" + a.id + "': empty source");
        auto [it, inserted] = index_.emplace(a.id, i);
        if (!inserted) {
            throw ValidationError("duplicate article id '" + a.id + "' (records #" +
                                  std::to_string(it->second + 1) + " and #" + std::to_string(i + 1) + ")");
        }
    }
}

const Article& Corpus::at(std::string_view id) const {
    if (const Article* a = find(id)) return *a;
    throw NotFoundError("no article with id '" + std::string(id) + "'");
}

const Article* Corpus::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &articles_[it->second];
}

std::set<std::string> Corpus::sources() const {
    std::set<std::string> out;
    for (const auto& a : articles_) out.insert(a.source);
    return out;
}

Corpus Corpus::subset(const std::vector<std::string>& ids) const {
    std::vector<Article> out;
    out.reserve(ids.size());
    for (const auto& id : ids) out.push_back(at(id));
    return Corpus(std::move(out));
}

// ---------------------------------------------------------------------------
// JSON conversion

json to_json(const Article& a) {
    json labels = json::array();
    for (FeatureLabel l : a.weak_labels) labels.push_back(to_string(l));
    json j = {{"id", a.id}, {"source", a.source}, {"title", a.title}, {"body", a.body},
              {"weak_labels", labels}};
    j["primary_weak_label"] = a.primary_weak_label ? json(to_string(*a.primary_weak_label)) : json(nullptr);
    return j;
}

namespace {

std::string required_string(const json& j, const char* field) {
    auto it = j.find(field);
    if (it == j.end() || it->is_null()) throw ValidationError(std::string("missing field '") + field + "'");
    if (!it->is_string()) throw ValidationError(std::string("field '") + field + "' must be a string");
    return it->get<std::string>();
}

}  // namespace

Article article_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("record is not a JSON object");
    Article a;
    a.id = required_string(j, "id");
    a.source = required_string(j, "source");
    if (a.source.empty()) throw ValidationError("field 'source' is empty");
    a.title = required_string(j, "title");
    a.body = required_string(j, "body");
    if (auto it = j.find("weak_labels"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) throw ValidationError("field 'weak_labels' must be an array");
        for (const auto& l : *it) {
            if (!l.is_string()) throw ValidationError("field 'weak_labels' must hold strings");
            a.weak_labels.insert(label_from_string(l.get<std::string>()));
        }
    }
    if (auto it = j.find("primary_weak_label"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw ValidationError("field 'primary_weak_label' must be a string");
        a.primary_weak_label = label_from_string(it->get<std::string>());
        a.weak_labels.insert(*a.primary_weak_label);
    }
    return a;
}

json to_json(const GoldAnnotation& g) {
    json features = json::array();
    for (FeatureLabel l : g.feature_labels) features.push_back(to_string(l));
    json spans = json::array();
    for (const auto& s : g.evidence_spans) {
        spans.push_back({{"feature", to_string(s.feature)}, {"start", s.start}, {"end", s.end}, {"text", s.text}});
    }
    json j = {{"article_id", g.article_id}, {"features", features}, {"spans", spans}};
    j["agenda_score"] = g.agenda_score ? json(*g.agenda_score) : json(nullptr);
    return j;
}

GoldAnnotation gold_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("record is not a JSON object");
    GoldAnnotation g;
    g.article_id = required_string(j, "article_id");
    if (auto it = j.find("agenda_score"); it != j.end() && !it->is_null()) {
        if (!it->is_number_integer()) throw ValidationError("field 'agenda_score' must be an integer");
        int score = it->get<int>();
        if (score < 1 || score > 5) throw ValidationError("field 'agenda_score' out of range 1-5");
        g.agenda_score = score;
    }
    if (auto it = j.find("features"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) throw ValidationError("field 'features' must be an array");
        for (const auto& l : *it) g.feature_labels.insert(label_from_string(l.get<std::string>()));
    }
    if (auto it = j.find("spans"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) throw ValidationError("field 'spans' must be an array");
        for (const auto& s : *it) {
            EvidenceSpan span;
            span.feature = label_from_string(required_string(s, "feature"));
            if (!s.contains("start") || !s["start"].is_number_unsigned() || !s.contains("end") ||
                !s["end"].is_number_unsigned()) {
                throw ValidationError("span fields 'start'/'end' must be non-negative integers");
            }
            span.start = s["start"].get<std::size_t>();
            span.end = s["end"].get<std::size_t>();
            span.text = s.value("text", "");
            g.evidence_spans.push_back(std::move(span));
        }
    }
    return g;
}

void validate_gold(const GoldAnnotation& g, const Article* article) {
    int sentiments = 0;
    for (FeatureLabel l : g.feature_labels) {
        if (l == FeatureLabel::average) throw ValidationError("'average' is not an annotation label");
        if (l == FeatureLabel::negative_sentiment || l == FeatureLabel::neutral_sentiment ||
            l == FeatureLabel::positive_sentiment) {
            ++sentiments;
        }
    }
    if (sentiments > 1) throw ValidationError("more than one sentiment label on '" + g.article_id + "'");
    const std::size_t limit = article ? article->title.size() + 1 + article->body.size() : 0;
    for (const auto& s : g.evidence_spans) {
        if (!g.feature_labels.count(s.feature)) {
            throw ValidationError("span feature '" + std::string(to_string(s.feature)) +
                                  "' is not among the article's feature labels");
        }
        if (s.start > s.end) throw ValidationError("span start after end");
        if (article && s.end > limit) throw ValidationError("span end beyond article text");
    }
}

// ---------------------------------------------------------------------------
// Loading

namespace {

std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    char c;
    while (in.get(c)) {
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && !field_started) {
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            field_started = false;
        } else if (c == '\n') {
            row.push_back(std::move(field));
            field.clear();
            field_started = false;
            rows.push_back(std::move(row));
            row.clear();
        } else if (c != '\r') {
            field.push_back(c);
            field_started = true;
        }
    }
    if (quoted) throw ValidationError("unterminated quoted CSV field");
    if (field_started || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::string> split_labels(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ';' || c == '|') {
            if (!trim(cur).empty()) out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!trim(cur).empty()) out.push_back(trim(cur));
    return out;
}

std::vector<Article> load_jsonl_articles(std::istream& in, const std::string& name) {
    std::vector<Article> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            out.push_back(article_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw ValidationError(name + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError(name + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<Article> load_csv_articles(std::istream& in, const std::string& name) {
    auto rows = parse_csv(in);
    if (rows.empty()) return {};
    const auto& header = rows.front();
    auto column = [&](const char* field) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (trim(header[i]) == field) return i;
        }
        return std::nullopt;
    };
    auto id_col = column("id");
    auto source_col = column("source");
    auto title_col = column("title");
    auto body_col = column("body");
    auto weak_col = column("weak_labels");
    auto primary_col = column("primary_weak_label");
    std::vector<Article> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::string where = name + ":" + std::to_string(r + 1) + ": ";
        auto get = [&](std::optional<std::size_t> col, const char* field, bool required) -> std::string {
            if (!col || *col >= row.size() || (required && row[*col].empty())) {
                if (required) throw ValidationError(where + "missing field '" + field + "'");
                return {};
            }
            return row[*col];
        };
        Article a;
        a.id = get(id_col, "id", true);
        a.source = get(source_col, "source", true);
        a.title = get(title_col, "title", false);
        a.body = get(body_col, "body", true);
        try {
            for (const auto& l : split_labels(get(weak_col, "weak_labels", false))) {
                a.weak_labels.insert(label_from_string(l));
            }
            std::string primary = trim(get(primary_col, "primary_weak_label", false));
            if (!primary.empty()) {
                a.primary_weak_label = label_from_string(primary);
                a.weak_labels.insert(*a.primary_weak_label);
            }
        } catch (const ValidationError& e) {
            throw ValidationError(where + e.what());
        }
        out.push_back(std::move(a));
    }
    return out;
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot open corpus file " + path.string());
    auto articles = format == CorpusFormat::jsonl ? load_jsonl_articles(in, path.string())
                                                  : load_csv_articles(in, path.string());
    try {
        return Corpus(std::move(articles));
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& a : corpus.articles()) out << to_json(a).dump() << '\n';
}

std::map<std::string, GoldAnnotation> load_gold(const std::filesystem::path& path, const Corpus* corpus) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot open gold annotation file " + path.string());
    std::map<std::string, GoldAnnotation> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
        try {
            GoldAnnotation g = gold_from_json(json::parse(line));
            const Article* article = corpus ? corpus->find(g.article_id) : nullptr;
            if (corpus && !article) throw ValidationError("unknown article_id '" + g.article_id + "'");
            validate_gold(g, article);
            std::string id = g.article_id;
            if (!out.emplace(id, std::move(g)).second) {
                throw ValidationError("duplicate annotation for '" + id + "'");
            }
        } catch (const json::exception& e) {
            throw ValidationError(where + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError(where + e.what());
        }
    }
    return out;
}

void save_gold(const std::map<std::string, GoldAnnotation>& gold, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& [id, g] : gold) out << to_json(g).dump() << '\n';
}

// ---------------------------------------------------------------------------
// Scrubbing

namespace {

const std::regex& url_pattern() {
    static const std::regex re(
        R"((?:https?://|www\.)[^\s]*|\b[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.(?:com|org|net|info|biz|gov|edu|co|us|uk|ca|au|io|tv|me|news|ru|de|fr|in)\b(?:/[^\s]*)?)",
        std::regex::icase | std::regex::optimize);
    return re;
}

std::string remove_variants(const std::string& text, const std::vector<std::string>& variants) {
    std::string out = text;
    for (const auto& variant : variants) {
        if (variant.empty()) continue;
        const std::string needle = to_lower(variant);
        std::string lowered = to_lower(out);
        std::string rebuilt;
        std::size_t pos = 0;
        bool changed = false;
        while (true) {
            std::size_t hit = lowered.find(needle, pos);
            if (hit == std::string::npos) break;
            rebuilt.append(out, pos, hit - pos);
            rebuilt.push_back(' ');
            pos = hit + needle.size();
            changed = true;
        }
        if (changed) {
            rebuilt.append(out, pos, std::string::npos);
            out = std::move(rebuilt);
        }
    }
    return out;
}

std::string scrub_text(const std::string& text, const std::vector<std::string>& variants) {
    std::string current = text;
    // Removals can splice new matches together; iterate to a fixed point.
    for (int round = 0; round < 16; ++round) {
        std::string next = std::regex_replace(current, url_pattern(), "");
        next = remove_variants(next, variants);
        if (next == current) break;
        current = std::move(next);
    }
    return current;
}

}  // namespace

Article scrub_source(const Article& article, const std::vector<std::string>& name_variants) {
    Article out = article;
    out.title = scrub_text(article.title, name_variants);
    out.body = scrub_text(article.body, name_variants);
    return out;
}

// ---------------------------------------------------------------------------
// Annotation view

namespace {

bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

// Byte offset after the first `chars` UTF-8 code points.
std::size_t prefix_bytes(std::string_view s, std::size_t chars) {
    std::size_t i = 0;
    std::size_t count = 0;
    while (i < s.size() && count < chars) {
        ++i;
        while (i < s.size() && is_continuation(static_cast<unsigned char>(s[i]))) ++i;
        ++count;
    }
    return i;
}

bool is_closer(std::string_view s, std::size_t i, std::size_t& len) {
    static constexpr std::string_view kAscii = "\"')]}";
    if (kAscii.find(s[i]) != std::string_view::npos) {
        len = 1;
        return true;
    }
    for (std::string_view mb : {"”", "’", "»"}) {
        if (s.substr(i, mb.size()) == mb) {
            len = mb.size();
            return true;
        }
    }
    return false;
}

}  // namespace

std::string annotation_view(const Article& article) {
    if (article.body.empty()) throw ValidationError("article '" + article.id + "' has an empty body");
    const std::string_view body = article.body;
    const std::size_t window = prefix_bytes(body, kAnnotationWindow);
    std::string_view kept = body.substr(0, window);
    if (window < body.size()) {
        std::size_t cut = 0;
        for (std::size_t i = 0; i < window; ++i) {
            std::size_t end = 0;
            if (body[i] == '.' || body[i] == '!' || body[i] == '?') {
                end = i + 1;
            } else if (body.substr(i, 3) == "…") {
                end = i + 3;
            } else {
                continue;
            }
            std::size_t len = 0;
            while (end < window && is_closer(body, end, len) && end + len <= window) end += len;
            if (end <= window) cut = end;
        }
        if (cut > 0) kept = body.substr(0, cut);
    }
    std::string out = article.title;
    out.push_back('\n');
    out.append(kept);
    return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(AgendaBucket bucket) {
    return bucket == AgendaBucket::harmful ? "harmful" : "benign";
}

AgendaBucket bucket_score(int score) {
    if (score < 1 || score > 5) throw ValidationError("agenda score " + std::to_string(score) + " outside 1-5");
    return score >= 4 ? AgendaBucket::harmful : AgendaBucket::benign;
}

}  // namespace agenda
