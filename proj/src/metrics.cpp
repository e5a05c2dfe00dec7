#include "lta/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "lta/error.hpp"

namespace lta::metrics {

namespace {

using store::Category;
constexpr double kDay = 86400.0;

bool is_terminal_state(const std::string& s) {
    return s == "completed" || s == "failed" || s == "timeout";
}

}  // namespace

std::string to_string(Termination t) {
    switch (t) {
        case Termination::UnrecoverableFailure: return "unrecoverable_failure";
        case Termination::ExpertIntervention: return "expert_intervention";
        case Termination::HorizonEnd: return "horizon_end";
    }
    return "horizon_end";
}

Termination termination_from_string(const std::string& s) {
    if (s == "unrecoverable_failure") return Termination::UnrecoverableFailure;
    if (s == "expert_intervention") return Termination::ExpertIntervention;
    if (s == "horizon_end") return Termination::HorizonEnd;
    throw ValidationError("unknown run termination '" + s + "'");
}

std::vector<RunSegment> segment_runs(const std::vector<EventRecord>& log) {
    std::vector<RunSegment> out;
    std::optional<double> open;
    for (const auto& r : log) {
        if (r.category != Category::RunMarker) continue;
        const auto kind = r.payload.at("kind").get<std::string>();
        if (kind == "start") {
            if (open) throw ValidationError("run markers out of order: start at t=" + std::to_string(r.t) +
                                            " while a run is open");
            open = r.t;
        } else if (kind == "end") {
            if (!open) throw ValidationError("run markers out of order: end at t=" + std::to_string(r.t) +
                                             " without a start");
            out.push_back({*open, r.t, termination_from_string(r.payload.at("termination").get<std::string>())});
            open.reset();
        }
    }
    if (open) out.push_back({*open, log.back().t, Termination::HorizonEnd});
    return out;
}

std::vector<Interval> normalize(std::vector<Interval> intervals) {
    std::erase_if(intervals, [](const Interval& i) { return !(i.end > i.begin); });
    std::sort(intervals.begin(), intervals.end(), [](const Interval& a, const Interval& b) {
        return a.begin < b.begin || (a.begin == b.begin && a.end < b.end);
    });
    std::vector<Interval> out;
    for (const auto& i : intervals) {
        if (!out.empty() && i.begin <= out.back().end)
            out.back().end = std::max(out.back().end, i.end);
        else
            out.push_back(i);
    }
    return out;
}

std::vector<Interval> intersect(const std::vector<Interval>& a_in, const std::vector<Interval>& b_in) {
    const auto a = normalize(a_in);
    const auto b = normalize(b_in);
    std::vector<Interval> out;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double lo = std::max(a[i].begin, b[j].begin);
        const double hi = std::min(a[i].end, b[j].end);
        if (hi > lo) out.push_back({lo, hi});
        if (a[i].end < b[j].end)
            ++i;
        else
            ++j;
    }
    return out;
}

double total_length(const std::vector<Interval>& intervals) {
    double sum = 0.0;
    for (const auto& i : intervals) sum += i.end - i.begin;
    return sum;
}

std::vector<Interval> daily_windows(double start_h, double end_h, double horizon_s) {
    if (!(end_h > start_h) || start_h < 0.0 || end_h > 24.0)
        throw ValidationError("autonomy window must satisfy 0 <= start < end <= 24 hours");
    std::vector<Interval> out;
    for (int d = 0; d * kDay < horizon_s; ++d) {
        const double b = d * kDay + start_h * 3600.0;
        const double e = std::min(horizon_s, d * kDay + end_h * 3600.0);
        if (e > b) out.push_back({b, e});
    }
    return out;
}

std::vector<Interval> active_intervals(const std::vector<EventRecord>& log, const ActivityOptions& options) {
    std::vector<Interval> out;
    std::map<std::string, double> open;
    for (const auto& r : log) {
        if (r.category == Category::RunMarker && r.payload.at("kind") == "end") {
            for (const auto& [id, t0] : open) out.push_back({t0, r.t});
            open.clear();
            continue;
        }
        if (r.category != Category::Task || r.payload.at("maintenance").get<bool>()) continue;
        const auto id = r.payload.at("task_id").get<std::string>();
        const auto state = r.payload.at("state").get<std::string>();
        auto close = [&] {
            auto it = open.find(id);
            if (it != open.end()) {
                out.push_back({it->second, r.t});
                open.erase(it);
            }
        };
        if (state == "dispatched") {
            if (options.count_travel) open[id] = r.t;
        } else if (state == "arrived") {
            close();
        } else if (state == "started") {
            close();
            open[id] = r.t;
        } else if (is_terminal_state(state)) {
            close();
        }
    }
    if (!log.empty())
        for (const auto& [id, t0] : open) out.push_back({t0, log.back().t});
    return normalize(out);
}

double a_percent(const std::vector<EventRecord>& log, const std::vector<Interval>& windows,
                 const ActivityOptions& options) {
    if (normalize(windows).empty()) throw ValidationError("a_percent: no autonomy windows");
    std::vector<Interval> runs;
    for (const auto& s : segment_runs(log)) runs.push_back({s.start, s.end});
    const auto allowed = intersect(windows, runs);
    const double denom = total_length(allowed);
    if (denom <= 0.0) return 0.0;
    const double num = total_length(intersect(active_intervals(log, options), allowed));
    return std::clamp(100.0 * num / denom, 0.0, 100.0);
}

double distance_m(const std::vector<EventRecord>& log) {
    double d = 0.0;
    for (const auto& r : log)
        if (r.category == Category::Traversal && r.payload.at("kind") == "segment")
            d += r.payload.at("distance").get<double>();
    return d;
}

int tasks_completed(const std::vector<EventRecord>& log) {
    int n = 0;
    for (const auto& r : log)
        if (r.category == Category::Task && r.payload.at("state") == "completed" &&
            !r.payload.at("maintenance").get<bool>())
            ++n;
    return n;
}

int navigation_failures(const std::vector<EventRecord>& log) {
    int n = 0;
    for (const auto& r : log)
        if (r.category == Category::Recovery && r.payload.at("kind") == "failure" &&
            !r.payload.at("from_recovery").get<bool>())
            ++n;
    return n;
}

LtaReport compute_report(const std::vector<EventRecord>& log, const std::vector<Interval>& windows,
                         const ActivityOptions& options) {
    LtaReport rep;
    for (const auto& s : segment_runs(log)) {
        rep.run_lengths.push_back(s.length());
        rep.cumulative_tsl += s.length();
        rep.max_tsl = std::max(rep.max_tsl, s.length());
    }
    rep.run_count = static_cast<int>(rep.run_lengths.size());
    rep.a_percent = a_percent(log, windows, options);
    rep.distance_km = distance_m(log) / 1000.0;
    rep.tasks_completed = tasks_completed(log);
    rep.navigation_failures = navigation_failures(log);
    for (const auto& r : log) {
        if (r.category != Category::Interaction) continue;
        ++rep.visits;
        if (r.payload.at("interacted").get<bool>()) ++rep.interactions;
    }
    return rep;
}

std::vector<recovery::NavStep> nav_steps(const std::vector<EventRecord>& log) {
    using recovery::StepKind;
    std::vector<recovery::NavStep> out;
    for (const auto& r : log) {
        const auto& p = r.payload;
        recovery::NavStep s;
        s.t = r.t;
        if (r.category == Category::Traversal && p.at("kind") == "segment") {
            s.kind = StepKind::Segment;
            s.edge = p.at("edge").get<std::string>();
            s.from_progress = p.at("from_progress").get<double>();
            s.to_progress = p.at("to_progress").get<double>();
            s.distance = p.at("distance").get<double>();
            s.duration = p.at("duration").get<double>();
            s.completed = p.at("completed").get<bool>();
        } else if (r.category == Category::Recovery) {
            s.edge = p.at("edge").get<std::string>();
            s.x = p.at("x").get<double>();
            s.y = p.at("y").get<double>();
            s.from_progress = p.at("progress").get<double>();
            s.failure = recovery::failure_class_from_string(p.at("failure_class").get<std::string>());
            if (p.at("kind") == "failure") {
                s.kind = StepKind::Failure;
                s.fatal = p.at("fatal").get<bool>();
                s.from_recovery = p.at("from_recovery").get<bool>();
            } else {
                s.kind = StepKind::Recovery;
                s.behavior = recovery::behavior_from_string(p.at("behavior").get<std::string>());
                s.immediate_success = p.at("immediate_success").get<bool>();
                s.duration = p.at("duration").get<double>();
            }
        } else {
            continue;
        }
        out.push_back(std::move(s));
    }
    return out;
}

recovery::RecoveryTable recovery_table(const std::vector<EventRecord>& log,
                                       const recovery::ClassifierOptions& options) {
    return recovery::classify_recoveries(nav_steps(log), options);
}

std::string format_duration(double seconds) {
    const auto total = static_cast<long long>(std::llround(seconds));
    const long long d = total / 86400, h = total % 86400 / 3600, m = total % 3600 / 60;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%lld d %02lld h %02lld m", d, h, m);
    return buf;
}

void write_summary(const LtaReport& r, std::ostream& out) {
    char buf[128];
    auto row = [&](const char* name, const std::string& value) {
        std::snprintf(buf, sizeof buf, "%-22s %s\n", name, value.c_str());
        out << buf;
    };
    auto num = [&](double v, int prec) {
        char b[64];
        std::snprintf(b, sizeof b, "%.*f", prec, v);
        return std::string(b);
    };
    row("Total distance (km)", num(r.distance_km, 3));
    row("Tasks completed", std::to_string(r.tasks_completed));
    row("Max TSL", format_duration(r.max_tsl) + " (" + num(r.max_tsl, 0) + " s)");
    row("Cumulative TSL", format_duration(r.cumulative_tsl) + " (" + num(r.cumulative_tsl, 0) + " s)");
    row("Runs", std::to_string(r.run_count));
    row("A%", num(r.a_percent, 2));
    row("Navigation failures", std::to_string(r.navigation_failures));
    row("Info visits", std::to_string(r.visits));
    row("Interactions", std::to_string(r.interactions));
}

void write_run_histogram_csv(const std::vector<RunSegment>& runs, std::ostream& out) {
    out << "run,start_s,end_s,length_s,length_days,termination\n";
    for (std::size_t i = 0; i < runs.size(); ++i)
        out << i + 1 << ',' << runs[i].start << ',' << runs[i].end << ',' << runs[i].length() << ','
            << runs[i].length() / kDay << ',' << to_string(runs[i].termination) << '\n';
}

void write_daily_a_percent_csv(const std::vector<EventRecord>& log, const std::vector<Interval>& windows,
                               std::ostream& out, const ActivityOptions& options) {
    std::vector<Interval> runs;
    for (const auto& s : segment_runs(log)) runs.push_back({s.start, s.end});
    const auto active = active_intervals(log, options);
    std::map<long, std::vector<Interval>> by_day;
    for (const auto& w : windows) by_day[static_cast<long>(std::floor(w.begin / kDay))].push_back(w);
    out << "day,allowed_s,active_s,a_percent\n";
    for (const auto& [day, ws] : by_day) {
        const auto allowed = intersect(normalize(ws), runs);
        const double denom = total_length(allowed);
        const double num = total_length(intersect(active, allowed));
        out << day << ',' << denom << ',' << num << ',' << (denom > 0.0 ? 100.0 * num / denom : 0.0) << '\n';
    }
}

void write_timeline_csv(const std::vector<EventRecord>& log, std::ostream& out) {
    out << "t_start,t_end,task_id,state\n";
    std::map<std::string, double> first_seen;
    for (const auto& r : log) {
        if (r.category != Category::Task) continue;
        const auto id = r.payload.at("task_id").get<std::string>();
        const auto state = r.payload.at("state").get<std::string>();
        if (state == "dispatched" || state == "started") {
            first_seen.emplace(id, r.t);
        } else if (is_terminal_state(state) || state == "dropped" || state == "deferred") {
            auto it = first_seen.find(id);
            const double t0 = it == first_seen.end() ? r.t : it->second;
            out << t0 << ',' << r.t << ',' << id << ',' << state << '\n';
            if (it != first_seen.end()) first_seen.erase(it);
        }
    }
}

void write_interactions_csv(const std::vector<EventRecord>& log, int days, std::ostream& out) {
    std::vector<int> visits(static_cast<std::size_t>(std::max(days, 0)), 0), hits(visits.size(), 0);
    for (const auto& r : log) {
        if (r.category != Category::Interaction) continue;
        const auto d = static_cast<std::size_t>(std::floor(r.t / kDay));
        if (d >= visits.size()) continue;
        ++visits[d];
        if (r.payload.at("interacted").get<bool>()) ++hits[d];
    }
    out << "day,visits,interactions\n";
    for (std::size_t d = 0; d < visits.size(); ++d) out << d << ',' << visits[d] << ',' << hits[d] << '\n';
}

}  // namespace lta::metrics
