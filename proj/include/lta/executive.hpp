#pragma once

#include <climits>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lta/json_util.hpp"
#include "lta/topomap.hpp"

namespace lta::exec {

using topo::NodeId;

enum class TaskKind {
    PatrolCheck,
    DoorCheck,
    InfoTerminal,
    ActivityBatchLearn,
    DbBackup,
    Charge,
    ConfirmIdentity,
    Custom
};

std::string to_string(TaskKind k);
TaskKind task_kind_from_string(const std::string& s);

struct TimeWindow {
    double earliest_start = 0.0;
    double latest_end = 0.0;

    double length() const { return latest_end - earliest_start; }
};

struct Task {
    std::string id;
    TaskKind kind = TaskKind::Custom;
    NodeId node;
    double max_duration = 0.0;
    TimeWindow window;
    int priority = 0;
    bool maintenance = false;
    double work_s = 0.0;  // time the task needs when nothing goes wrong

    void validate() const;
};

/// Travel seconds from one node to another when leaving at time t.
using TravelTime = std::function<double(const NodeId&, const NodeId&, double)>;

struct ScheduledTask {
    std::size_t task = 0;  // index into the scheduled task list
    std::string task_id;
    NodeId node;
    double depart = 0.0;  // robot leaves the previous location
    double arrive = 0.0;
    double planned_start = 0.0;
    double planned_end = 0.0;  // planned_start + max_duration
};

struct Schedule {
    std::vector<ScheduledTask> entries;  // in time order
    std::vector<std::size_t> dropped;    // task indices that found no feasible slot
    double horizon_end = 0.0;
};

/// Greedy insertion over priority tiers: tasks sorted by (priority desc,
/// latest_end asc), each placed at its earliest feasible start.
Schedule schedule(double now, const NodeId& start, const std::vector<Task>& tasks, const TravelTime& travel_time);

struct BatteryGuardOptions {
    double reserve = 0.15;
    double safety_margin_s = 600.0;
    double charge_complete = 0.95;
};

/// Max-priority charge task when the battery would reach the reserve before
/// the robot could be docked, nothing otherwise.
std::optional<Task> battery_guard(double level, double drain_per_s, double travel_time_to_dock, double now,
                                  const NodeId& dock, double charge_per_s, const BatteryGuardOptions& options = {});

bool charge_complete(double level, bool docked, const BatteryGuardOptions& options = {});

enum class ComponentState { Up, Crashed, Restarting };
std::string to_string(ComponentState s);

struct WatchdogEvent {
    double t = 0.0;
    std::string component;
    ComponentState state = ComponentState::Up;
};

struct WatchdogResult {
    std::vector<WatchdogEvent> events;  // time ordered
    std::optional<std::string> unrecoverable;  // component that exceeded its daily crash budget
};

/// Health of the supervised software components.
class ComponentHealth {
public:
    struct Spec {
        std::string name;
        double restart_latency_s = 30.0;
    };

    ComponentHealth() = default;
    explicit ComponentHealth(std::vector<Spec> components, int max_crashes_per_day = 10);

    /// Applies crashes up to `now` and completes restarts whose latency has elapsed.
    WatchdogResult tick(double now, const std::vector<std::pair<double, std::string>>& crashes);

    ComponentState state(const std::string& component) const;
    bool up(const std::string& component) const { return state(component) == ComponentState::Up; }
    int crash_count(const std::string& component) const;
    /// Earliest time every currently down component is back, or nullopt if all are up.
    std::optional<double> next_restart() const;

private:
    struct Status {
        Spec spec;
        ComponentState state = ComponentState::Up;
        double up_at = 0.0;
        int crashes = 0;
        std::map<long, int> per_day;
    };
    std::map<std::string, Status> components_;
    int max_crashes_per_day_ = 10;
};

/// The component a task kind cannot run without, if any.
std::optional<std::string> required_component(TaskKind kind);

}  // namespace lta::exec
