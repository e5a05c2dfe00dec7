#include "lta/executive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lta/error.hpp"

namespace lta::exec {

namespace {

const std::vector<std::pair<TaskKind, std::string>>& kind_names() {
    static const std::vector<std::pair<TaskKind, std::string>> names = {
        {TaskKind::PatrolCheck, "patrol_check"},
        {TaskKind::DoorCheck, "door_check"},
        {TaskKind::InfoTerminal, "info_terminal"},
        {TaskKind::ActivityBatchLearn, "activity_batch_learn"},
        {TaskKind::DbBackup, "db_backup"},
        {TaskKind::Charge, "charge"},
        {TaskKind::ConfirmIdentity, "confirm_identity"},
        {TaskKind::Custom, "custom"},
    };
    return names;
}

constexpr double kDay = 86400.0;

}  // namespace

std::string to_string(TaskKind k) {
    for (const auto& [kind, name] : kind_names())
        if (kind == k) return name;
    return "custom";
}

TaskKind task_kind_from_string(const std::string& s) {
    for (const auto& [kind, name] : kind_names())
        if (name == s) return kind;
    throw ValidationError("unknown task kind '" + s + "'");
}

void Task::validate() const {
    if (id.empty()) throw ValidationError("task: empty id");
    if (!(window.latest_end > window.earliest_start))
        throw ValidationError("task '" + id + "': window is empty");
    if (!(max_duration >= 0.0)) throw ValidationError("task '" + id + "': max_duration must be >= 0");
    if (max_duration > window.length())
        throw ValidationError("task '" + id + "': max_duration exceeds the window length");
    if (!(work_s >= 0.0)) throw ValidationError("task '" + id + "': work_s must be >= 0");
}

Schedule schedule(double now, const NodeId& start, const std::vector<Task>& tasks, const TravelTime& travel_time) {
    std::vector<std::size_t> order(tasks.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (tasks[a].priority != tasks[b].priority) return tasks[a].priority > tasks[b].priority;
        return tasks[a].window.latest_end < tasks[b].window.latest_end;
    });

    Schedule out;
    out.horizon_end = now;
    auto& entries = out.entries;
    for (std::size_t idx : order) {
        const Task& task = tasks[idx];
        std::optional<std::size_t> best_pos;
        ScheduledTask best;
        double best_next_arrive = 0.0;
        for (std::size_t pos = 0; pos <= entries.size(); ++pos) {
            const double prev_end = pos == 0 ? now : entries[pos - 1].planned_end;
            const NodeId& prev_node = pos == 0 ? start : entries[pos - 1].node;
            const double travel = travel_time(prev_node, task.node, prev_end);
            if (!std::isfinite(travel)) continue;
            ScheduledTask cand;
            cand.task = idx;
            cand.task_id = task.id;
            cand.node = task.node;
            cand.depart = prev_end;
            cand.arrive = prev_end + travel;
            cand.planned_start = std::max(cand.arrive, task.window.earliest_start);
            cand.planned_end = cand.planned_start + task.max_duration;
            if (cand.planned_end > task.window.latest_end) continue;
            double next_arrive = 0.0;
            if (pos < entries.size()) {
                const auto& next = entries[pos];
                const double onward = travel_time(task.node, next.node, cand.planned_end);
                if (!std::isfinite(onward)) continue;
                next_arrive = cand.planned_end + onward;
                if (next_arrive > next.planned_start) continue;
            }
            if (!best_pos || cand.planned_start < best.planned_start) {
                best_pos = pos;
                best = cand;
                best_next_arrive = next_arrive;
            }
        }
        if (!best_pos) {
            out.dropped.push_back(idx);
            continue;
        }
        if (*best_pos < entries.size()) {
            entries[*best_pos].depart = best.planned_end;
            entries[*best_pos].arrive = best_next_arrive;
        }
        entries.insert(entries.begin() + static_cast<std::ptrdiff_t>(*best_pos), best);
    }
    std::sort(out.dropped.begin(), out.dropped.end());
    if (!entries.empty()) out.horizon_end = entries.back().planned_end;
    return out;
}

std::optional<Task> battery_guard(double level, double drain_per_s, double travel_time_to_dock, double now,
                                  const NodeId& dock, double charge_per_s, const BatteryGuardOptions& options) {
    if (level - drain_per_s * (travel_time_to_dock + options.safety_margin_s) > options.reserve) return std::nullopt;
    Task t;
    t.kind = TaskKind::Charge;
    t.id = "charge@" + std::to_string(static_cast<long long>(std::floor(now)));
    t.node = dock;
    t.maintenance = true;
    t.priority = INT_MAX;
    // Enough to go from empty to the completion level, plus the trip.
    t.max_duration = options.charge_complete / charge_per_s;
    t.work_s = std::max(0.0, options.charge_complete - level) / charge_per_s;
    t.window = {now, now + travel_time_to_dock + t.max_duration};
    return t;
}

bool charge_complete(double level, bool docked, const BatteryGuardOptions& options) {
    return docked && level >= options.charge_complete;
}

std::string to_string(ComponentState s) {
    switch (s) {
        case ComponentState::Up: return "up";
        case ComponentState::Crashed: return "crashed";
        case ComponentState::Restarting: return "restarting";
    }
    return "up";
}

ComponentHealth::ComponentHealth(std::vector<Spec> components, int max_crashes_per_day)
    : max_crashes_per_day_(max_crashes_per_day) {
    for (auto& s : components) {
        if (!(s.restart_latency_s >= 0.0))
            throw ValidationError("component '" + s.name + "': restart latency must be >= 0");
        Status st;
        st.spec = s;
        if (!components_.emplace(s.name, std::move(st)).second)
            throw ValidationError("duplicate component '" + s.name + "'");
    }
}

WatchdogResult ComponentHealth::tick(double now, const std::vector<std::pair<double, std::string>>& crashes) {
    WatchdogResult out;
    auto finish_restarts = [&](double until) {
        // Restarts complete in time order so the event list stays ordered.
        while (true) {
            Status* first = nullptr;
            for (auto& [name, st] : components_)
                if (st.state != ComponentState::Up && st.up_at <= until && (!first || st.up_at < first->up_at))
                    first = &st;
            if (!first) break;
            first->state = ComponentState::Up;
            out.events.push_back({first->up_at, first->spec.name, ComponentState::Up});
        }
    };
    for (const auto& [t, name] : crashes) {
        if (t > now) throw StateError("watchdog: crash at " + std::to_string(t) + " is in the future");
        auto it = components_.find(name);
        if (it == components_.end()) throw NotFoundError("watchdog: unknown component '" + name + "'");
        finish_restarts(t);
        auto& st = it->second;
        ++st.crashes;
        const int today = ++st.per_day[static_cast<long>(std::floor(t / kDay))];
        out.events.push_back({t, name, ComponentState::Crashed});
        st.state = ComponentState::Restarting;
        st.up_at = t + st.spec.restart_latency_s;
        out.events.push_back({t, name, ComponentState::Restarting});
        if (today > max_crashes_per_day_ && !out.unrecoverable) out.unrecoverable = name;
    }
    finish_restarts(now);
    return out;
}

ComponentState ComponentHealth::state(const std::string& component) const {
    auto it = components_.find(component);
    return it == components_.end() ? ComponentState::Up : it->second.state;
}

int ComponentHealth::crash_count(const std::string& component) const {
    auto it = components_.find(component);
    return it == components_.end() ? 0 : it->second.crashes;
}

std::optional<double> ComponentHealth::next_restart() const {
    std::optional<double> t;
    for (const auto& [name, st] : components_)
        if (st.state != ComponentState::Up && (!t || st.up_at < *t)) t = st.up_at;
    return t;
}

std::optional<std::string> required_component(TaskKind kind) {
    switch (kind) {
        case TaskKind::InfoTerminal: return "info_terminal";
        case TaskKind::ConfirmIdentity: return "people_tracker";
        case TaskKind::DbBackup: return "database";
        case TaskKind::ActivityBatchLearn: return "database";
        default: return std::nullopt;
    }
}

}  // namespace lta::exec
