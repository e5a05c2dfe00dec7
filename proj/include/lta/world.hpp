#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lta/activity.hpp"
#include "lta/json_util.hpp"
#include "lta/monitored_nav.hpp"
#include "lta/rng.hpp"
#include "lta/topomap.hpp"

namespace lta::sim {

using recovery::FailureClass;
using topo::EdgeId;
using topo::NodeId;

constexpr double kDay = 86400.0;
constexpr double kHour = 3600.0;

/// Periodic ground-truth probability, clamped to [0, 1].
///   cosine: base + amplitude * cos(2 pi (t - phase) / period), peaking at `phase`
///   window: base + amplitude while (t - phase) mod period < width, else base
struct PeriodicProcess {
    enum class Shape { Cosine, Window };
    double base = 0.0;
    double amplitude = 0.0;
    double period_s = kDay;
    double phase_s = 0.0;
    Shape shape = Shape::Cosine;
    double width_s = 0.0;

    static PeriodicProcess constant(double value) { return {value, 0.0, kDay, 0.0, Shape::Cosine, 0.0}; }

    double value(double t) const;
    void validate(const std::string& context) const;
};

struct ComponentSpec {
    std::string name;
    double crash_rate_per_day = 0.0;
    double restart_latency_s = 30.0;
};

struct BatteryParams {
    double initial_level = 1.0;
    double active_hours = 12.0;  // full to empty while undocked
    double charge_hours = 3.0;   // empty to full while docked

    double drain_per_s() const { return 1.0 / (active_hours * kHour); }
    double charge_per_s() const { return 1.0 / (charge_hours * kHour); }
};

/// Generator for one kind of person walk through the semantic map.
struct TrajectoryTemplate {
    std::string name;
    std::vector<activity::Point2> waypoints;
    double speed = 1.0;
    double speed_sd = 0.1;
    double pose_noise = 0.05;
    double waypoint_jitter = 0.2;
    double per_day = 10.0;  // expected count per day
    double sample_dt = 0.5;
};

struct WorldConfig {
    PeriodicProcess default_hazard = PeriodicProcess::constant(0.02);
    std::map<EdgeId, PeriodicProcess> hazards;
    std::map<EdgeId, PeriodicProcess> doors;  // open probability of door_pass edges
    std::set<EdgeId> carpet_edges;
    double bumper_fraction = 0.2;
    std::map<FailureClass, double> fatal_fraction = {
        {FailureClass::BumperPressed, 0.0}, {FailureClass::NavFail, 0.0}, {FailureClass::CarpetStuck, 0.0}};
    double duration_noise_sd = 0.1;
    std::map<NodeId, PeriodicProcess> interaction_propensity;
    double help_availability = 0.9;
    double help_latency_s = 60.0;
    double carpet_escape_probability = 0.06;
    std::vector<ComponentSpec> components;
    BatteryParams battery;
    std::vector<TrajectoryTemplate> trajectory_templates;
    std::vector<activity::SemanticRegion> regions;
    double autonomy_start_h = 8.0;
    double autonomy_end_h = 18.0;
    double task_hang_probability = 0.0;

    void validate(const topo::TopoMap& map) const;
};

WorldConfig world_config_from_json(const Json& doc);
PeriodicProcess periodic_from_json(const Json& doc, const std::string& context);

struct CrashEvent {
    double t = 0.0;
    std::string component;
};

struct DayEvents {
    std::vector<CrashEvent> crashes;                 // time ordered
    std::vector<activity::Trajectory> trajectories;  // ordered by start time
};

/// Deterministic seeded world. All randomness flows through one stream.
class SimWorld : public recovery::NavWorld {
public:
    SimWorld(topo::TopoMap map, WorldConfig config, std::uint64_t seed);

    // NavWorld
    double now() const override { return clock_; }
    const topo::TopoMap& map() const override { return map_; }
    recovery::Location location() const override { return location_; }
    recovery::EdgeAttempt attempt_edge(const topo::TopoEdge& edge, double from_progress) override;
    recovery::RecoveryAttempt attempt_recovery(const recovery::RecoveryBehavior& behavior,
                                               const recovery::RecoveryContext& context) override;
    double abandon_edge(const topo::TopoEdge& edge, double progress) override;

    const WorldConfig& config() const { return config_; }
    Rng& rng() { return rng_; }

    /// Idle until `t` (no-op when t <= now); the battery drains or charges.
    void advance_to(double t);
    void advance_by(double dt) { advance_to(clock_ + dt); }

    double battery() const { return battery_; }
    bool docked() const { return !location_.edge && location_.node == map_.dock(); }
    bool battery_depleted() const { return depleted_; }

    double hazard(const EdgeId& edge, double t) const;
    double door_open_probability(const EdgeId& edge, double t) const;
    double interaction_propensity(const NodeId& node, double t) const;

    /// Whether someone uses the screen during a visit to `node` at the current time.
    bool sample_interaction(const NodeId& node);
    /// Whether the next task execution hangs (and so times out).
    bool sample_task_hang();

    /// Crashes and person trajectories for day `day` (midnight to midnight).
    DayEvents sample_day_events(int day);

    /// Expert reset: robot carried back to the dock.
    void reset_to_dock();

private:
    void move_clock(double dt, bool docked_during);
    double noise_factor();

    topo::TopoMap map_;
    WorldConfig config_;
    Rng rng_;
    double clock_ = 0.0;
    recovery::Location location_;
    double battery_ = 1.0;
    bool depleted_ = false;
    bool pending_failure_ = false;
    int trajectory_counter_ = 0;
};

}  // namespace lta::sim
