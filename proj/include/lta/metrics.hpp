#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lta/event_store.hpp"
#include "lta/monitored_nav.hpp"

namespace lta::metrics {

using store::EventRecord;

enum class Termination { UnrecoverableFailure, ExpertIntervention, HorizonEnd };
std::string to_string(Termination t);
Termination termination_from_string(const std::string& s);

struct RunSegment {
    double start = 0.0;
    double end = 0.0;
    Termination termination = Termination::HorizonEnd;

    double length() const { return end - start; }
};

/// Runs delimited by start/end run markers. Throws ValidationError when
/// markers are out of order. An unterminated final run ends at the last record.
std::vector<RunSegment> segment_runs(const std::vector<EventRecord>& log);

struct Interval {
    double begin = 0.0;
    double end = 0.0;
};

/// Sorted, disjoint union.
std::vector<Interval> normalize(std::vector<Interval> intervals);
std::vector<Interval> intersect(const std::vector<Interval>& a, const std::vector<Interval>& b);
double total_length(const std::vector<Interval>& intervals);

/// Daily windows [start_h, end_h) for every day that starts before `horizon_s`, clipped to it.
std::vector<Interval> daily_windows(double start_h, double end_h, double horizon_s);

struct ActivityOptions {
    bool count_travel = true;  // travel toward a task (recoveries included) counts as active
};

/// Intervals spent on non-maintenance tasks: travel toward the task and its execution.
std::vector<Interval> active_intervals(const std::vector<EventRecord>& log, const ActivityOptions& options = {});

/// 100 * |active ∩ windows ∩ runs| / |windows ∩ runs|. Throws ValidationError on empty windows.
double a_percent(const std::vector<EventRecord>& log, const std::vector<Interval>& windows,
                 const ActivityOptions& options = {});

struct LtaReport {
    double max_tsl = 0.0;
    double cumulative_tsl = 0.0;
    int run_count = 0;
    double a_percent = 0.0;
    double distance_km = 0.0;
    int tasks_completed = 0;
    std::vector<double> run_lengths;
    int navigation_failures = 0;
    int visits = 0;
    int interactions = 0;
};

LtaReport compute_report(const std::vector<EventRecord>& log, const std::vector<Interval>& windows,
                         const ActivityOptions& options = {});

/// Sum of traversed edge progress times edge length, in metres.
double distance_m(const std::vector<EventRecord>& log);
int tasks_completed(const std::vector<EventRecord>& log);
/// Failures raised by traversals (not by recoveries that did not work).
int navigation_failures(const std::vector<EventRecord>& log);

/// Monitored-navigation steps reconstructed from traversal and recovery records.
std::vector<recovery::NavStep> nav_steps(const std::vector<EventRecord>& log);
recovery::RecoveryTable recovery_table(const std::vector<EventRecord>& log,
                                       const recovery::ClassifierOptions& options = {});

/// "12 d 03 h 04 m" style rendering.
std::string format_duration(double seconds);

/// The Table 1 rows: distance, tasks completed, max TSL, cumulative TSL, run count, A%.
void write_summary(const LtaReport& report, std::ostream& out);
void write_run_histogram_csv(const std::vector<RunSegment>& runs, std::ostream& out);
void write_daily_a_percent_csv(const std::vector<EventRecord>& log, const std::vector<Interval>& windows,
                               std::ostream& out, const ActivityOptions& options = {});
void write_timeline_csv(const std::vector<EventRecord>& log, std::ostream& out);
void write_interactions_csv(const std::vector<EventRecord>& log, int days, std::ostream& out);

}  // namespace lta::metrics
