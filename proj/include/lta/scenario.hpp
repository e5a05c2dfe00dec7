#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lta/activity.hpp"
#include "lta/executive.hpp"
#include "lta/json_util.hpp"
#include "lta/monitored_nav.hpp"
#include "lta/navmdp.hpp"
#include "lta/topomap.hpp"
#include "lta/world.hpp"

namespace lta::scenario {

/// adaptive: learned navigation policy and FreMEn visit planning.
/// static_nav: nominal routes, FreMEn visit planning.
/// uniform_info: learned navigation, uniformly random visit planning.
enum class Variant { Adaptive, StaticNav, UniformInfo };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

enum class Repeat { Daily, Once };

/// A task template. For daily tasks the window is in seconds after midnight.
struct TaskSpec {
    exec::Task task;
    Repeat repeat = Repeat::Daily;
};

struct InfoTerminalConfig {
    bool enabled = false;
    int visits_per_day = 6;
    double beta = 0.5;
    double slot_s = 1800.0;
    double max_duration_s = 1200.0;
    int priority = 1;
};

struct ActivityConfig {
    bool enabled = false;
    std::size_t max_training = 300;
    activity::EncoderOptions encoder;
    activity::ClusterOptions cluster;
    double prefix_fraction = 0.2;
    std::string identity_node;  // where confirm_identity tasks go; empty disables them
    int identity_per_day = 3;
    double identity_window_s = 1800.0;
    double identity_max_duration_s = 300.0;
    int identity_priority = 2;
};

struct ExecutiveConfig {
    exec::BatteryGuardOptions battery;
    int max_crashes_per_day = 10;
    double restart_delay_s = 3600.0;
    double idle_return_s = 900.0;      // go back to the dock when idle longer than this
    double dispatch_slack_s = 120.0;   // leave this much earlier than the expected travel time
    int expert_intervention_after = 0; // consecutive failed navigations; 0 disables
    bool count_travel_as_active = true;
};

struct NavigationConfig {
    nav::EdgeStatsOptions edges;
    std::optional<double> fatal_cost;
    recovery::RecoveryPolicy recovery = recovery::RecoveryPolicy::defaults();
    nav::SolveOptions solve;
};

struct Scenario {
    std::uint64_t seed = 1;
    int horizon_days = 1;
    topo::TopoMap map;
    sim::WorldConfig world;
    std::vector<TaskSpec> tasks;
    InfoTerminalConfig info;
    ActivityConfig activity;
    ExecutiveConfig executive;
    NavigationConfig navigation;
    Variant variant = Variant::Adaptive;
};

/// Strict parse: unknown keys are rejected. `base_dir` resolves a map path.
Scenario scenario_from_json(const Json& doc, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace lta::scenario
