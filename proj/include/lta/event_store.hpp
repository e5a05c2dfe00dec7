#pragma once

#include <cstdint>
#include <fstream>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lta/json_util.hpp"

namespace lta::store {

enum class Category { Traversal, Recovery, Task, Interaction, Trajectory, Battery, Component, RunMarker };

std::string to_string(Category c);
Category category_from_string(const std::string& s);
const std::set<Category>& all_categories();

constexpr int kSchemaVersion = 1;

struct EventRecord {
    std::uint64_t seq = 0;
    double t = 0.0;
    Category category = Category::RunMarker;
    Json payload = Json::object();
    int schema_version = kSchemaVersion;

    friend bool operator==(const EventRecord& a, const EventRecord& b) {
        return a.seq == b.seq && a.t == b.t && a.category == b.category && a.payload == b.payload &&
               a.schema_version == b.schema_version;
    }
};

Json to_json(const EventRecord& r);
EventRecord record_from_json(const Json& doc);

/// Throws SchemaError naming the first missing or mistyped field.
void validate_payload(Category category, const Json& payload);

/// A record opening a new log session (seq and clock restart allowed after it).
bool is_session_start(const EventRecord& r);

/// Append-only, JSON Lines backed event log with a single writer.
class EventStore {
public:
    /// In-memory only.
    EventStore() = default;
    /// Also writes every record to `path` (truncating it), flushed before append returns.
    explicit EventStore(const std::string& path);

    EventStore(EventStore&&) = default;
    EventStore& operator=(EventStore&&) = default;

    /// Validates, assigns the next seq and persists. Returns the seq.
    std::uint64_t append(double t, Category category, Json payload);

    const std::vector<EventRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    const std::optional<std::string>& path() const { return path_; }

    /// Records with t in [t_begin, t_end) and category in `categories`, in seq order.
    std::vector<EventRecord> query(double t_begin, double t_end, const std::set<Category>& categories) const;

    /// Copies the log file to `destination`.
    void snapshot(const std::string& destination) const;

private:
    std::vector<EventRecord> records_;
    std::optional<std::string> path_;
    std::unique_ptr<std::ofstream> file_;
};

/// Reads a JSON Lines log. Errors name the offending line number.
std::vector<EventRecord> read_log(std::istream& in);
std::vector<EventRecord> read_log_file(const std::string& path);

std::vector<EventRecord> query(const std::vector<EventRecord>& records, double t_begin, double t_end,
                               const std::set<Category>& categories);

}  // namespace lta::store
