#include "agenda/synth.hpp"

#include "agenda/error.hpp"
#include "agenda/random.hpp"
#include "agenda/text.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace agenda {

namespace {

const std::vector<std::string> kFiller = {
    "the",       "a",          "of",        "to",         "and",        "in",        "said",       "city",
    "council",   "report",     "year",      "people",     "officials",  "on",        "week",       "new",
    "plan",      "local",      "state",     "market",     "data",       "school",    "water",      "street",
    "program",   "statement",  "group",     "members",    "meeting",    "project",   "according",  "after",
    "before",    "with",       "for",       "from",       "about",      "during",    "that",       "this",
    "it",        "was",        "were",      "has",        "have",       "will",      "would",      "could",
    "some",      "many",       "several",   "public",     "office",     "county",    "board",      "budget",
    "study",     "team",       "season",    "company",    "service",    "residents", "area",       "road",
    "building",  "system",     "policy",    "officer",    "community",  "event",     "center",     "north",
    "south",     "east",       "west",      "morning",    "evening",    "monday",    "tuesday",    "friday",
    "last",      "next",       "first",     "second",     "three",      "four",      "percent",    "million",
    "number",    "time",       "part",      "home",       "family",     "workers",   "business",   "industry",
    "energy",    "price",      "cost",      "tax",        "law",        "court",     "election",   "campaign",
    "candidate", "minister",   "president", "government", "agency",     "department", "federal",   "national",
    "river",     "weather",    "spring",    "summer",     "winter",     "train",     "bus",        "airport",
    "hospital",  "university", "museum",    "park",       "library",    "music",     "film",       "book",
    "game",      "player",     "coach",     "field",      "night",      "told",      "reporters",  "expected",
    "announced", "described",  "included",  "across",     "between",    "under",     "over",       "while",
    "region",    "village",    "province",  "committee",  "survey",     "figures",   "month",      "hours",
};

const std::vector<std::string> kNegativeWords = {"hate",   "evil",   "terrible", "disaster", "horrible", "awful",
                                                 "corrupt", "threat", "destroy",  "angry",    "attack",   "fear"};

const std::vector<std::string> kPositiveWords = {"good",    "great",   "happy", "wonderful", "nice",
                                                 "love",    "excellent", "success", "hope", "calm"};

const std::map<FeatureLabel, std::vector<std::string>>& marker_table() {
    static const std::map<FeatureLabel, std::vector<std::string>> table = {
        {FeatureLabel::clickbait,
         {"unbelievable", "jawdropping", "mustsee", "whoa", "revealed", "gasp", "clickhere", "wowza"}},
        {FeatureLabel::junk_science,
         {"detox", "quantum", "toxins", "superfood", "megadose", "biohack", "alkaline", "vibrational"}},
        {FeatureLabel::hate_speech,
         {"vermin", "subhuman", "infestation", "invaders", "savages", "filth", "mongrels", "parasites"}},
        {FeatureLabel::conspiracy_theory,
         {"globalist", "cabal", "deepstate", "plandemic", "coverup", "chemtrail", "illuminati", "falseflag"}},
        {FeatureLabel::propaganda,
         {"motherland", "glorious", "heroic", "homeland", "fatherland", "steadfast", "unbreakable", "vanguard"}},
        {FeatureLabel::satire,
         {"lolz", "parody", "deadpan", "mockumentary", "spoof", "lampoon", "tongue-in-cheek", "farcical"}},
    };
    return table;
}

struct Source {
    std::string name;
    std::vector<FeatureLabel> labels;  // empty for average sources
    std::vector<std::string> style;
};

std::string pseudo_word(Rng& rng, std::size_t syllables) {
    static const std::string consonants = "bdfgklmnprstvz";
    static const std::string vowels = "aeiou";
    std::string w;
    for (std::size_t i = 0; i < syllables; ++i) {
        w.push_back(consonants[rng.below(consonants.size())]);
        w.push_back(vowels[rng.below(vowels.size())]);
    }
    return w;
}

std::vector<Source> make_sources(const SynthOptions& o, Rng& rng) {
    std::vector<Source> sources;
    std::set<std::string> used_style;
    auto style_words = [&]() {
        std::vector<std::string> out;
        while (out.size() < 4) {
            auto w = pseudo_word(rng, 3);
            if (used_style.insert(w).second) out.push_back(w);
        }
        return out;
    };
    for (FeatureLabel f : kRationaleFeatures) {
        for (std::size_t i = 0; i < o.sources_per_feature; ++i) {
            sources.push_back({std::string(to_string(f)) + "-site-" + std::to_string(i + 1) + ".example", {f},
                               style_words()});
        }
    }
    using L = FeatureLabel;
    const std::vector<std::pair<L, L>> shared = {{L::clickbait, L::junk_science},
                                                 {L::junk_science, L::conspiracy_theory},
                                                 {L::hate_speech, L::conspiracy_theory},
                                                 {L::hate_speech, L::propaganda},
                                                 {L::conspiracy_theory, L::propaganda}};
    for (const auto& [a, b] : shared) {
        for (int i = 0; i < 2; ++i) {
            sources.push_back({std::string(to_string(a)) + "-" + std::string(to_string(b)) + "-site-" +
                                   std::to_string(i + 1) + ".example",
                               {a, b}, style_words()});
        }
    }
    for (std::size_t i = 0; i < o.average_sources; ++i) {
        sources.push_back({"news-site-" + std::to_string(i + 1) + ".example", {}, style_words()});
    }
    return sources;
}

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
    return v[rng.below(v.size())];
}

// Inserts `word` at a random position of `words`, shifting the recorded
// positions at or after it.
void insert_word(std::vector<std::string>& words, std::vector<std::size_t>& tracked, const std::string& word,
                 Rng& rng, std::vector<std::size_t>* record) {
    const std::size_t at = rng.below(words.size() + 1);
    words.insert(words.begin() + static_cast<std::ptrdiff_t>(at), word);
    for (auto& p : tracked) {
        if (p >= at) ++p;
    }
    if (record) {
        record->push_back(tracked.size());
        tracked.push_back(at);
    }
}

struct Draft {
    Article article;
    std::vector<std::string> title_words;
    std::vector<std::string> body_words;
    // Indices into `body_positions`, grouped by the feature they plant.
    std::map<FeatureLabel, std::vector<std::size_t>> marker_slots;
    std::vector<std::size_t> body_positions;
    bool negative = false;
};

std::string join_sentences(const std::vector<std::string>& words, Rng& rng) {
    std::string out;
    std::size_t left = 0;
    bool start = true;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (left == 0) left = 6 + rng.below(10);
        std::string w = words[i];
        if (start && !w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
        start = false;
        out += w;
        if (--left == 0 || i + 1 == words.size()) {
            out += ".";
            start = true;
        }
        if (i + 1 < words.size()) out += " ";
    }
    return out;
}

}  // namespace

const std::vector<std::string>& marker_tokens(FeatureLabel feature) {
    auto it = marker_table().find(feature);
    if (it == marker_table().end()) {
        throw ValidationError("no marker vocabulary for '" + std::string(to_string(feature)) + "'");
    }
    return it->second;
}

SynthCorpus synthesize(const SynthOptions& o) {
    if (o.positives_per_feature == 0 || o.sources_per_feature == 0 || o.average_sources == 0 || o.body_words < 10) {
        throw ValidationError("synth: counts must be positive and bodies at least 10 words");
    }
    if (o.signal < 0 || o.signal > 1 || o.marker_noise < 0 || o.marker_noise > 1 || o.gold_label_noise < 0 ||
        o.gold_label_noise > 1) {
        throw ValidationError("synth: probabilities must lie in [0, 1]");
    }
    Rng rng(o.seed);
    const auto sources = make_sources(o, rng);

    // Which articles to write: (primary label or nullopt for average, source index).
    std::vector<std::pair<std::optional<FeatureLabel>, std::size_t>> plan;
    for (FeatureLabel f : kRationaleFeatures) {
        std::vector<std::size_t> eligible;
        for (std::size_t s = 0; s < sources.size(); ++s) {
            const auto& ls = sources[s].labels;
            if (std::find(ls.begin(), ls.end(), f) != ls.end()) eligible.push_back(s);
        }
        for (std::size_t i = 0; i < o.positives_per_feature; ++i) plan.emplace_back(f, eligible[i % eligible.size()]);
    }
    std::vector<std::size_t> average_sources;
    for (std::size_t s = 0; s < sources.size(); ++s) {
        if (sources[s].labels.empty()) average_sources.push_back(s);
    }
    for (std::size_t i = 0; i < o.average_articles; ++i) {
        plan.emplace_back(std::nullopt, average_sources[i % average_sources.size()]);
    }
    rng.shuffle(plan);

    SynthCorpus out;
    std::vector<Article> articles;
    std::size_t serial = 0;
    for (const auto& [primary, s] : plan) {
        const Source& src = sources[s];
        Draft d;
        d.article.id = "syn-" + std::to_string(o.seed) + "-" + std::to_string(++serial);
        d.article.source = src.name;
        if (primary) {
            d.article.weak_labels.insert(src.labels.begin(), src.labels.end());
            d.article.primary_weak_label = primary;
        } else {
            d.article.weak_labels.insert(FeatureLabel::average);
            d.article.primary_weak_label = FeatureLabel::average;
        }

        const std::size_t title_len = 5 + rng.below(5);
        for (std::size_t i = 0; i < title_len; ++i) d.title_words.push_back(pick(kFiller, rng));
        const std::size_t body_len = o.body_words - o.body_words / 5 + rng.below(o.body_words / 5 * 2 + 1);
        for (std::size_t i = 0; i < body_len; ++i) d.body_words.push_back(pick(kFiller, rng));

        std::vector<std::size_t>& tracked = d.body_positions;
        for (std::size_t i = 0; i < o.style_tokens_per_article; ++i) {
            insert_word(d.body_words, tracked, pick(src.style, rng), rng, nullptr);
        }
        for (FeatureLabel f : src.labels) {
            if (!primary) break;
            const auto& markers = marker_tokens(f);
            for (std::size_t slot = 0; slot < o.marker_slots; ++slot) {
                if (!rng.bernoulli(o.signal)) continue;
                insert_word(d.body_words, tracked, pick(markers, rng), rng, &d.marker_slots[f]);
            }
        }
        if (rng.bernoulli(o.marker_noise)) {
            FeatureLabel other = pick(std::vector<FeatureLabel>(kRationaleFeatures.begin(), kRationaleFeatures.end()), rng);
            if (std::find(src.labels.begin(), src.labels.end(), other) == src.labels.end()) {
                insert_word(d.body_words, tracked, pick(marker_tokens(other), rng), rng, nullptr);
            }
        }
        // Valence words: hostile features lean negative, the rest lean positive.
        double p_negative = 0.15;
        for (FeatureLabel f : src.labels) {
            if (f == FeatureLabel::hate_speech || f == FeatureLabel::propaganda ||
                f == FeatureLabel::conspiracy_theory) {
                p_negative = 0.7;
            }
        }
        d.negative = rng.bernoulli(p_negative);
        const auto& valence = d.negative ? kNegativeWords : kPositiveWords;
        const std::size_t valence_count = 2 + rng.below(2);
        for (std::size_t i = 0; i < valence_count; ++i) insert_word(d.body_words, tracked, pick(valence, rng), rng, nullptr);

        d.article.title = join_sentences(d.title_words, rng);
        if (!d.article.title.empty() && d.article.title.back() == '.') d.article.title.pop_back();
        d.article.body = join_sentences(d.body_words, rng);

        // Document positions of the planted markers.
        const std::size_t offset = d.title_words.size();
        auto& positions = out.marker_positions[d.article.id];
        for (const auto& [f, slots] : d.marker_slots) {
            for (std::size_t slot : slots) positions.push_back(offset + tracked[slot]);
        }
        std::sort(positions.begin(), positions.end());
        out.negative_planted[d.article.id] = d.negative;

        const bool gold = rng.uniform() * static_cast<double>(plan.size()) < static_cast<double>(o.gold_articles);
        if (gold) {
            GoldAnnotation g;
            g.article_id = d.article.id;
            const auto tokens = tokenize_words(d.article.text());
            for (FeatureLabel f : kRationaleFeatures) {
                bool label = std::find(src.labels.begin(), src.labels.end(), f) != src.labels.end() && primary;
                if (rng.bernoulli(o.gold_label_noise)) label = !label;
                if (!label) continue;
                g.feature_labels.insert(f);
                auto it = d.marker_slots.find(f);
                if (it == d.marker_slots.end()) continue;
                for (std::size_t slot : it->second) {
                    const Token& t = tokens.at(offset + tracked[slot]);
                    g.evidence_spans.push_back({f, t.begin, t.end, t.text});
                }
            }
            bool negative = d.negative;
            if (rng.bernoulli(o.gold_label_noise)) negative = !negative;
            g.feature_labels.insert(negative ? FeatureLabel::negative_sentiment : FeatureLabel::neutral_sentiment);
            std::sort(g.evidence_spans.begin(), g.evidence_spans.end(),
                      [](const EvidenceSpan& a, const EvidenceSpan& b) { return a.start < b.start; });

            // Latent harmfulness driven mostly by hate speech, then negative
            // sentiment and propaganda.
            auto has = [&](FeatureLabel f) { return g.feature_labels.count(f) ? 1.0 : 0.0; };
            const double z = -1.3 + 2.4 * has(FeatureLabel::hate_speech) + 1.4 * has(FeatureLabel::negative_sentiment) +
                             1.2 * has(FeatureLabel::propaganda) + 0.7 * has(FeatureLabel::conspiracy_theory) +
                             0.4 * has(FeatureLabel::junk_science) + 0.2 * has(FeatureLabel::clickbait) -
                             0.3 * has(FeatureLabel::satire) + 0.9 * rng.normal();
            g.agenda_score = std::clamp(static_cast<int>(std::lround(3.0 + z)), 1, 5);
            auto& scores = out.ratings[g.article_id];
            for (std::size_t r = 0; r < o.raters; ++r) {
                const double noisy = 3.0 + z + o.rater_noise * rng.normal();
                scores.push_back(std::clamp(static_cast<int>(std::lround(noisy)), 1, 5));
            }
            out.gold.emplace(g.article_id, std::move(g));
        }
        articles.push_back(std::move(d.article));
    }
    out.corpus = Corpus(std::move(articles));
    return out;
}

}  // namespace agenda
