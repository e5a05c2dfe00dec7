#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lta/event_store.hpp"
#include "lta/info_terminal.hpp"
#include "lta/learner.hpp"
#include "lta/metrics.hpp"
#include "lta/scenario.hpp"

namespace lta::run {

struct RunResult {
    int days = 0;
    double min_battery = 1.0;
    bool battery_depleted = false;
    std::vector<info::VisitPlan> plans;
};

struct RunOutput {
    RunResult result;
    learn::Learner learner;
};

learn::LearnerOptions learner_options(const scenario::Scenario& sc);

/// Runs the executive loop over the scenario horizon, appending every event
/// to `store`. Seed and variant are taken from the scenario.
/// `backup_path` is where db_backup tasks copy the log (file-backed stores only).
RunOutput simulate(const scenario::Scenario& sc, store::EventStore& store,
                   const std::optional<std::string>& backup_path = std::nullopt);

/// Autonomy windows recorded in the log's session marker, or the defaults.
std::vector<metrics::Interval> windows_from_log(const std::vector<store::EventRecord>& log);

/// Summary, run histogram, recovery tables, daily A%, timeline and interaction CSVs.
void write_reports(const std::filesystem::path& dir, const std::vector<store::EventRecord>& log,
                   const std::vector<metrics::Interval>& windows, const metrics::ActivityOptions& options = {});

struct VariantMetrics {
    std::uint64_t seed = 0;
    scenario::Variant variant = scenario::Variant::Adaptive;
    int navigation_failures = 0;
    int visits = 0;
    int interactions = 0;
    std::vector<int> daily_interactions;
    double a_percent = 0.0;
    int tasks_completed = 0;
    double distance_km = 0.0;
    int runs = 0;

    /// Mean interactions per day over days [first, last).
    double interactions_per_day(int first, int last) const;
};

/// One in-memory run of `base` with the given seed and variant.
VariantMetrics run_variant(const scenario::Scenario& base, std::uint64_t seed, scenario::Variant variant);

void write_compare_csv(const std::vector<VariantMetrics>& rows, std::ostream& out);

}  // namespace lta::run
