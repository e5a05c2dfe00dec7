#include "lta/event_store.hpp"

#include <filesystem>
#include <istream>
#include <map>

#include "lta/error.hpp"

namespace lta::store {

namespace {

struct FieldSpec {
    const char* name;
    Json::value_t type;
};

using Fields = std::vector<FieldSpec>;
constexpr auto kString = Json::value_t::string;
constexpr auto kNumber = Json::value_t::number_float;
constexpr auto kBool = Json::value_t::boolean;
constexpr auto kArray = Json::value_t::array;

// Per category: fields every payload carries, then fields keyed by payload "kind".
struct CategorySchema {
    Fields common;
    std::map<std::string, Fields> by_kind;
};

const std::map<Category, CategorySchema>& schemas() {
    static const std::map<Category, CategorySchema> table = {
        {Category::Traversal,
         {{{"kind", kString}, {"edge", kString}},
          {{"segment",
            {{"from_progress", kNumber}, {"to_progress", kNumber}, {"distance", kNumber}, {"duration", kNumber},
             {"completed", kBool}}},
           {"result",
            {{"outcome", kString}, {"result", kString}, {"t_start", kNumber}, {"duration", kNumber},
             {"recovery_time", kNumber}}}}}},
        {Category::Recovery,
         {{{"kind", kString}, {"edge", kString}, {"x", kNumber}, {"y", kNumber}, {"progress", kNumber},
           {"failure_class", kString}},
          {{"failure", {{"fatal", kBool}, {"from_recovery", kBool}}},
           {"recovery", {{"behavior", kString}, {"immediate_success", kBool}, {"duration", kNumber}}}}}},
        {Category::Task,
         {{{"task_id", kString}, {"kind", kString}, {"state", kString}, {"node", kString}, {"maintenance", kBool}},
          {}}},
        {Category::Interaction, {{{"node", kString}, {"interacted", kBool}}, {}}},
        {Category::Trajectory, {{{"traj_id", kString}, {"poses", kArray}, {"label", kString}}, {}}},
        {Category::Battery, {{{"level", kNumber}, {"docked", kBool}}, {}}},
        {Category::Component, {{{"name", kString}, {"state", kString}}, {}}},
        {Category::RunMarker, {{{"kind", kString}}, {{"session", {}}, {"start", {}}, {"end", {{"termination", kString}}}}}},
    };
    return table;
}

bool type_matches(const Json& v, Json::value_t want) {
    if (want == kNumber) return v.is_number();
    return v.type() == want;
}

void check_fields(Category c, const Json& payload, const Fields& fields) {
    for (const auto& f : fields) {
        auto it = payload.find(f.name);
        if (it == payload.end())
            throw SchemaError(to_string(c) + " payload: missing required field '" + f.name + "'");
        if (!type_matches(*it, f.type))
            throw SchemaError(to_string(c) + " payload: field '" + f.name + "' has the wrong type");
    }
}

}  // namespace

std::string to_string(Category c) {
    switch (c) {
        case Category::Traversal: return "traversal";
        case Category::Recovery: return "recovery";
        case Category::Task: return "task";
        case Category::Interaction: return "interaction";
        case Category::Trajectory: return "trajectory";
        case Category::Battery: return "battery";
        case Category::Component: return "component";
        case Category::RunMarker: return "run_marker";
    }
    return "run_marker";
}

Category category_from_string(const std::string& s) {
    for (auto c : all_categories())
        if (to_string(c) == s) return c;
    throw SchemaError("unknown event category '" + s + "'");
}

const std::set<Category>& all_categories() {
    static const std::set<Category> all = {Category::Traversal,   Category::Recovery, Category::Task,
                                           Category::Interaction, Category::Trajectory, Category::Battery,
                                           Category::Component,   Category::RunMarker};
    return all;
}

void validate_payload(Category category, const Json& payload) {
    if (!payload.is_object()) throw SchemaError(to_string(category) + " payload: expected an object");
    const auto& schema = schemas().at(category);
    check_fields(category, payload, schema.common);
    if (schema.by_kind.empty()) return;
    const auto kind = payload.at("kind").get<std::string>();
    auto it = schema.by_kind.find(kind);
    if (it == schema.by_kind.end())
        throw SchemaError(to_string(category) + " payload: unknown kind '" + kind + "'");
    check_fields(category, payload, it->second);
}

bool is_session_start(const EventRecord& r) {
    return r.category == Category::RunMarker && r.payload.value("kind", "") == "session";
}

Json to_json(const EventRecord& r) {
    return {{"seq", r.seq},
            {"t", r.t},
            {"category", to_string(r.category)},
            {"payload", r.payload},
            {"schema_version", r.schema_version}};
}

EventRecord record_from_json(const Json& doc) {
    StrictObject o(doc, "event record");
    EventRecord r;
    r.seq = o.get<std::uint64_t>("seq");
    r.t = o.get<double>("t");
    r.category = category_from_string(o.get<std::string>("category"));
    r.payload = o.require("payload");
    r.schema_version = o.get<int>("schema_version");
    o.finish();
    if (r.schema_version != kSchemaVersion)
        throw SchemaError("event record: unsupported schema_version " + std::to_string(r.schema_version));
    validate_payload(r.category, r.payload);
    return r;
}

EventStore::EventStore(const std::string& path) : path_(path) {
    file_ = std::make_unique<std::ofstream>(path, std::ios::out | std::ios::trunc);
    if (!*file_) throw Error("event store: cannot open '" + path + "' for writing");
}

std::uint64_t EventStore::append(double t, Category category, Json payload) {
    if (!std::isfinite(t)) throw SchemaError("event store: time must be finite");
    validate_payload(category, payload);
    EventRecord r;
    r.t = t;
    r.category = category;
    r.payload = std::move(payload);
    const bool new_session = is_session_start(r);
    if (!records_.empty() && !new_session && t < records_.back().t)
        throw SchemaError("event store: time " + std::to_string(t) + " is earlier than the previous record (" +
                          std::to_string(records_.back().t) + ")");
    r.seq = records_.empty() ? 1 : records_.back().seq + 1;
    if (file_) {
        *file_ << to_json(r).dump() << '\n';
        file_->flush();
        if (!*file_) throw Error("event store: write failed");
    }
    records_.push_back(std::move(r));
    return records_.back().seq;
}

std::vector<EventRecord> query(const std::vector<EventRecord>& records, double t_begin, double t_end,
                               const std::set<Category>& categories) {
    std::vector<EventRecord> out;
    for (const auto& r : records)
        if (r.t >= t_begin && r.t < t_end && categories.count(r.category)) out.push_back(r);
    return out;
}

std::vector<EventRecord> EventStore::query(double t_begin, double t_end, const std::set<Category>& categories) const {
    return store::query(records_, t_begin, t_end, categories);
}

void EventStore::snapshot(const std::string& destination) const {
    if (!path_) throw StateError("event store: in-memory store has no file to snapshot");
    file_->flush();
    std::filesystem::copy_file(*path_, destination, std::filesystem::copy_options::overwrite_existing);
}

std::vector<EventRecord> read_log(std::istream& in) {
    std::vector<EventRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        EventRecord r;
        try {
            r = record_from_json(Json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("event log line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw ParseError("event log line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!out.empty() && !is_session_start(r)) {
            if (r.seq <= out.back().seq)
                throw ParseError("event log line " + std::to_string(line_no) + ": seq is not increasing");
            if (r.t < out.back().t)
                throw ParseError("event log line " + std::to_string(line_no) + ": time goes backwards");
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<EventRecord> read_log_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open event log '" + path + "'");
    return read_log(in);
}

}  // namespace lta::store
