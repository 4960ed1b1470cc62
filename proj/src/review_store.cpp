#include "agenda/review_store.hpp"

#include "agenda/error.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <mutex>

namespace agenda {

using nlohmann::json;

std::string_view to_string(RecordStatus s) {
    switch (s) {
        case RecordStatus::pending: return "pending";
        case RecordStatus::confirmed: return "confirmed";
        case RecordStatus::dismissed: return "dismissed";
        case RecordStatus::auto_resolved: return "auto_resolved";
    }
    return "pending";
}

RecordStatus record_status_from_string(std::string_view text) {
    for (RecordStatus s : {RecordStatus::pending, RecordStatus::confirmed, RecordStatus::dismissed,
                           RecordStatus::auto_resolved}) {
        if (text == to_string(s)) return s;
    }
    throw ValidationError("unknown status '" + std::string(text) +
                          "' (expected pending, confirmed, dismissed or auto_resolved)");
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[40];
    std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
    return out;
}

json to_json(const ReviewDecision& d) {
    json j = {{"action", d.action}, {"note", d.note}, {"reviewer", d.reviewer}, {"timestamp", d.timestamp}};
    j["score"] = d.score ? json(*d.score) : json(nullptr);
    j["bucket_override"] = d.bucket_override ? json(to_string(*d.bucket_override)) : json(nullptr);
    return j;
}

ReviewDecision review_decision_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("review decision must be a JSON object");
    ReviewDecision d;
    try {
        d.action = j.at("action").get<std::string>();
        if (d.action != "confirm" && d.action != "dismiss") {
            throw ValidationError("action must be 'confirm' or 'dismiss', got '" + d.action + "'");
        }
        if (auto it = j.find("score"); it != j.end() && !it->is_null()) {
            if (!it->is_number_integer()) throw ValidationError("score must be an integer");
            d.score = it->get<int>();
            if (*d.score < 1 || *d.score > 5) throw ValidationError("score must be between 1 and 5");
        }
        if (auto it = j.find("bucket_override"); it != j.end() && !it->is_null()) {
            const auto b = it->get<std::string>();
            if (b == "benign") d.bucket_override = AgendaBucket::benign;
            else if (b == "harmful") d.bucket_override = AgendaBucket::harmful;
            else throw ValidationError("bucket_override must be 'benign' or 'harmful'");
        }
        d.note = j.value("note", std::string());
        d.reviewer = j.value("reviewer", std::string());
        d.timestamp = j.value("timestamp", std::string());
    } catch (const json::exception& e) {
        throw ValidationError(std::string("review decision: ") + e.what());
    }
    return d;
}

json to_json(const FlagRecord& r) {
    json decisions = json::array();
    for (const auto& d : r.decisions) decisions.push_back(to_json(d));
    return {{"id", r.id},
            {"created", r.created},
            {"status", to_string(r.status)},
            {"article", to_json(r.article)},
            {"analysis", r.analysis},
            {"decisions", decisions}};
}

namespace {

FlagRecord record_from_json(const json& j) {
    FlagRecord r;
    r.id = j.at("id").get<std::string>();
    r.created = j.at("created").get<std::string>();
    r.status = record_status_from_string(j.at("status").get<std::string>());
    r.article = article_from_json(j.at("article"));
    r.analysis = j.at("analysis");
    for (const auto& d : j.at("decisions")) r.decisions.push_back(review_decision_from_json(d));
    return r;
}

std::string record_id(std::size_t serial) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "rec-%06zu", serial);
    return buf;
}

}  // namespace

ReviewStore::ReviewStore(std::filesystem::path log_path, Clock clock)
    : log_path_(std::move(log_path)), clock_(std::move(clock)) {
    if (log_path_.has_parent_path()) std::filesystem::create_directories(log_path_.parent_path());
    replay();
    log_.open(log_path_, std::ios::app | std::ios::binary);
    if (!log_) throw Error("cannot open review log " + log_path_.string());
}

void ReviewStore::replay() {
    std::ifstream in(log_path_, std::ios::binary);
    if (!in) return;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            apply(json::parse(line), line_no);
        } catch (const json::exception& e) {
            throw ValidationError(log_path_.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void ReviewStore::apply(const json& event, std::size_t line) {
    const auto type = event.at("event").get<std::string>();
    const std::string where = log_path_.string() + ":" + std::to_string(line);
    if (type == "flag") {
        FlagRecord r = record_from_json(event.at("record"));
        if (index_.count(r.id)) throw ValidationError(where + ": duplicate record id " + r.id);
        index_.emplace(r.id, records_.size());
        records_.push_back(std::move(r));
    } else if (type == "review") {
        const auto id = event.at("id").get<std::string>();
        auto it = index_.find(id);
        if (it == index_.end()) throw ValidationError(where + ": review of unknown record " + id);
        FlagRecord& r = records_[it->second];
        if (r.status != RecordStatus::pending) throw ValidationError(where + ": review of resolved record " + id);
        ReviewDecision d = review_decision_from_json(event.at("decision"));
        r.status = d.action == "confirm" ? RecordStatus::confirmed : RecordStatus::dismissed;
        r.decisions.push_back(std::move(d));
    } else {
        throw ValidationError(where + ": unknown event '" + type + "'");
    }
}

void ReviewStore::append(const json& event) {
    log_ << event.dump() << '\n';
    log_.flush();
    if (!log_) throw Error("failed to append to review log " + log_path_.string());
}

FlagRecord ReviewStore::add(const Article& article, const json& analysis, bool harmful) {
    std::unique_lock lock(mutex_);
    FlagRecord r;
    r.id = record_id(records_.size() + 1);
    r.created = clock_();
    r.status = harmful ? RecordStatus::pending : RecordStatus::auto_resolved;
    r.article = article;
    r.analysis = analysis;
    json event = {{"event", "flag"}, {"record", to_json(r)}};
    append(event);
    apply(event, 0);
    return records_.back();
}

FlagRecord ReviewStore::review(const std::string& id, ReviewDecision decision) {
    std::unique_lock lock(mutex_);
    auto it = index_.find(id);
    if (it == index_.end()) throw NotFoundError("no record '" + id + "'");
    const FlagRecord& r = records_[it->second];
    if (r.status != RecordStatus::pending) {
        throw ConflictError("record '" + id + "' is already " + std::string(to_string(r.status)));
    }
    if (decision.action != "confirm" && decision.action != "dismiss") {
        throw ValidationError("action must be 'confirm' or 'dismiss'");
    }
    decision.timestamp = clock_();
    json event = {{"event", "review"}, {"id", id}, {"decision", to_json(decision)}};
    append(event);
    apply(event, 0);
    return records_[it->second];
}

std::optional<FlagRecord> ReviewStore::get(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return records_[it->second];
}

Page ReviewStore::list(std::optional<RecordStatus> status, std::size_t page, std::size_t page_size) const {
    if (page == 0) throw ValidationError("page numbers start at 1");
    if (page_size == 0) throw ValidationError("page_size must be positive");
    std::shared_lock lock(mutex_);
    Page out;
    out.page = page;
    out.page_size = page_size;
    const std::size_t skip = (page - 1) * page_size;
    for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
        if (status && it->status != *status) continue;
        if (out.total >= skip && out.records.size() < page_size) out.records.push_back(*it);
        ++out.total;
    }
    return out;
}

std::size_t ReviewStore::size() const {
    std::shared_lock lock(mutex_);
    return records_.size();
}

std::string ReviewStore::snapshot() const {
    std::shared_lock lock(mutex_);
    json all = json::array();
    for (const auto& r : records_) all.push_back(to_json(r));
    return all.dump();
}

}  // namespace agenda
