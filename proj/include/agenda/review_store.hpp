#pragma once

#include "agenda/corpus.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "json.hpp"

namespace agenda {

/// Benign verdicts never enter the queue; they are stored as auto_resolved.
enum class RecordStatus { pending, confirmed, dismissed, auto_resolved };

std::string_view to_string(RecordStatus status);
RecordStatus record_status_from_string(std::string_view text);

struct ReviewDecision {
    std::string action;  ///< "confirm" or "dismiss"
    std::optional<AgendaBucket> bucket_override;
    std::optional<int> score;  ///< agenda score 1-5
    std::string note;
    std::string reviewer;
    std::string timestamp;
};

nlohmann::json to_json(const ReviewDecision& decision);
/// Validates the action and score; the timestamp is left to the store.
ReviewDecision review_decision_from_json(const nlohmann::json& j);

struct FlagRecord {
    std::string id;
    std::string created;
    RecordStatus status = RecordStatus::pending;
    Article article;
    /// Pipeline output for the article, stored verbatim.
    nlohmann::json analysis;
    std::vector<ReviewDecision> decisions;
};

nlohmann::json to_json(const FlagRecord& record);

struct Page {
    std::vector<FlagRecord> records;
    std::size_t page = 1;
    std::size_t page_size = 0;
    std::size_t total = 0;
};

/// ISO-8601 UTC timestamps; injectable for tests.
using Clock = std::function<std::string()>;
std::string utc_now();

/// Flag records backed by an append-only JSONL event log. The in-memory
/// index is rebuilt by replaying the log on construction. Reads run
/// concurrently; writes are serialized and hit the log before the index.
class ReviewStore {
public:
    explicit ReviewStore(std::filesystem::path log_path, Clock clock = utc_now);

    ReviewStore(const ReviewStore&) = delete;
    ReviewStore& operator=(const ReviewStore&) = delete;

    /// Stores a new record; harmful verdicts start pending, benign ones auto_resolved.
    FlagRecord add(const Article& article, const nlohmann::json& analysis, bool harmful);

    /// Applies a moderator decision to a pending record. Throws NotFoundError
    /// for unknown ids and ConflictError for resolved records.
    FlagRecord review(const std::string& id, ReviewDecision decision);

    std::optional<FlagRecord> get(const std::string& id) const;

    /// Newest first; `page` is 1-based. Throws ValidationError for page 0 or page_size 0.
    Page list(std::optional<RecordStatus> status, std::size_t page, std::size_t page_size) const;

    std::size_t size() const;

    /// Canonical serialization of every record, oldest first.
    std::string snapshot() const;

    const std::filesystem::path& log_path() const { return log_path_; }

private:
    void replay();
    void append(const nlohmann::json& event);
    void apply(const nlohmann::json& event, std::size_t line);

    std::filesystem::path log_path_;
    Clock clock_;
    mutable std::shared_mutex mutex_;
    std::ofstream log_;
    std::vector<FlagRecord> records_;
    std::map<std::string, std::size_t> index_;
};

}  // namespace agenda
