#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "lta/error.hpp"
#include "lta/metrics.hpp"
#include "lta/rng.hpp"
#include "lta/runner.hpp"
#include "lta/scenario.hpp"

using namespace lta;
using namespace lta::metrics;
using store::Category;
using store::EventStore;

namespace {

constexpr double kH = 3600.0;
constexpr double kDay = 86400.0;

void start(EventStore& s, double t) { s.append(t, Category::RunMarker, {{"kind", "start"}}); }
void end(EventStore& s, double t, const std::string& why) {
    s.append(t, Category::RunMarker, {{"kind", "end"}, {"termination", why}});
}
void task(EventStore& s, double t, const std::string& id, const std::string& state, bool maintenance = false) {
    s.append(t, Category::Task,
             {{"task_id", id}, {"kind", "custom"}, {"state", state}, {"node", "A"}, {"maintenance", maintenance}});
}
void failure(EventStore& s, double t, bool fatal = false, bool from_recovery = false) {
    s.append(t, Category::Recovery,
             {{"kind", "failure"}, {"edge", "AB"}, {"x", 0.0}, {"y", 0.0}, {"progress", 0.5},
              {"failure_class", "BUMPER_PRESSED"}, {"fatal", fatal}, {"from_recovery", from_recovery}});
}
void recovered(EventStore& s, double t) {
    s.append(t, Category::Recovery,
             {{"kind", "recovery"}, {"edge", "AB"}, {"x", 0.0}, {"y", 0.0}, {"progress", 0.5},
              {"failure_class", "BUMPER_PRESSED"}, {"behavior", "ASK_HELP"}, {"immediate_success", true},
              {"duration", 10.0}});
}
void segment(EventStore& s, double t, double distance) {
    s.append(t, Category::Traversal,
             {{"kind", "segment"}, {"edge", "AB"}, {"from_progress", 0.0}, {"to_progress", 1.0},
              {"distance", distance}, {"duration", distance}, {"completed", true}});
}

// Total length of a union of intervals by sweeping sorted endpoints.
double oracle_union(std::vector<Interval> v) {
    std::sort(v.begin(), v.end(), [](auto& a, auto& b) { return a.begin < b.begin; });
    double total = 0, hi = -1e300;
    for (const auto& i : v) {
        if (i.end <= i.begin) continue;
        const double lo = std::max(i.begin, hi);
        if (i.end > lo) total += i.end - lo;
        hi = std::max(hi, i.end);
    }
    return total;
}

}  // namespace

TEST_CASE("runs of 3 d and 5 d") {
    EventStore s;
    start(s, 0);
    failure(s, kDay);
    recovered(s, kDay + 10);
    end(s, 3 * kDay, "unrecoverable_failure");
    start(s, 3 * kDay + kH);
    end(s, 8 * kDay + kH, "expert_intervention");
    const auto runs = segment_runs(s.records());
    REQUIRE(runs.size() == 2);
    CHECK(runs[0].length() == 3 * kDay);
    CHECK(runs[1].length() == 5 * kDay);
    CHECK(runs[0].termination == Termination::UnrecoverableFailure);
    CHECK(runs[1].termination == Termination::ExpertIntervention);
    const auto rep = compute_report(s.records(), daily_windows(0, 24, 9 * kDay));
    CHECK(rep.max_tsl == 5 * kDay);
    CHECK(rep.cumulative_tsl == 8 * kDay);
    CHECK(rep.run_count == 2);
    CHECK(format_duration(rep.max_tsl) == "5 d 00 h 00 m");
    CHECK(format_duration(3 * kDay + 4 * kH + 59 * 60) == "3 d 04 h 59 m");
}

TEST_CASE("recoverable failures do not split a run") {
    EventStore s;
    start(s, 0);
    for (int i = 1; i < 10; ++i) {
        failure(s, i * kH);
        recovered(s, i * kH + 20);
    }
    end(s, kDay, "horizon_end");
    const auto runs = segment_runs(s.records());
    REQUIRE(runs.size() == 1);
    CHECK(runs[0].length() == kDay);
    CHECK(navigation_failures(s.records()) == 9);
}

TEST_CASE("run markers out of order") {
    EventStore a;
    start(a, 0);
    start(a, 1);
    CHECK_THROWS_AS(segment_runs(a.records()), ValidationError);
    EventStore b;
    end(b, 0, "horizon_end");
    CHECK_THROWS_AS(segment_runs(b.records()), ValidationError);
}

TEST_CASE("10 h allowed with 4 h active is 40%") {
    EventStore s;
    start(s, 0);
    task(s, 9 * kH, "t", "started");
    task(s, 13 * kH, "t", "completed");
    end(s, kDay, "horizon_end");
    CHECK(a_percent(s.records(), daily_windows(8, 18, kDay)) == 40.0);

    EventStore idle;
    start(idle, 0);
    end(idle, kDay, "horizon_end");
    CHECK(a_percent(idle.records(), daily_windows(8, 18, kDay)) == 0.0);
    CHECK_THROWS_AS(a_percent(idle.records(), {}), ValidationError);
    CHECK_THROWS_AS(daily_windows(18, 8, kDay), ValidationError);
}

TEST_CASE("one working day with gaps, charging and a task past the window") {
    EventStore s;
    start(s, 0);
    task(s, 7 * kH, "early", "started");  // before the window
    task(s, 7.5 * kH, "early", "completed");
    task(s, 8 * kH + 25 * 60, "patrol", "dispatched");
    task(s, 8 * kH + 30 * 60, "patrol", "arrived");
    task(s, 8 * kH + 30 * 60, "patrol", "started");
    task(s, 9 * kH, "patrol", "completed");
    task(s, 12 * kH, "charge", "started", true);
    task(s, 13 * kH, "charge", "completed", true);
    task(s, 14 * kH, "info", "dispatched");
    task(s, 14 * kH + 5 * 60, "info", "arrived");
    task(s, 14 * kH + 10 * 60, "info", "started");  // waits 5 min at the node
    task(s, 14 * kH + 30 * 60, "info", "timeout");
    task(s, 17 * kH + 50 * 60, "late", "started");
    task(s, 18 * kH + 20 * 60, "late", "completed");
    end(s, kDay, "horizon_end");
    // 5 + 30 + 5 + 20 + 10 active minutes of 600 allowed.
    CHECK(a_percent(s.records(), daily_windows(8, 18, kDay)) == 100.0 * (70 * 60) / (600 * 60));
    // Without travel: 30 + 20 + 10.
    CHECK(a_percent(s.records(), daily_windows(8, 18, kDay), {false}) == 100.0 * (60 * 60) / (600 * 60));
    CHECK(tasks_completed(s.records()) == 3);

    std::ostringstream daily;
    write_daily_a_percent_csv(s.records(), daily_windows(8, 18, kDay), daily);
    CHECK(daily.str() == "day,allowed_s,active_s,a_percent\n0,36000,4200," + [] {
              std::ostringstream v;
              v << 100.0 * 4200 / 36000;
              return v.str();
          }() + "\n");
}

TEST_CASE("a run that ends mid-window shrinks the denominator") {
    EventStore s;
    start(s, 0);
    task(s, 9 * kH, "a", "started");
    task(s, 10 * kH, "a", "completed");
    task(s, 15 * kH, "b", "started");
    end(s, 16 * kH, "unrecoverable_failure");  // closes b
    start(s, 17 * kH);
    end(s, kDay, "horizon_end");
    // Active 1 h + 1 h; allowed 8..16 and 17..18.
    CHECK(a_percent(s.records(), daily_windows(8, 18, kDay)) == 100.0 * (2 * kH) / (9 * kH));
}

TEST_CASE("property: A% matches a sweep-line oracle on random task logs") {
    Rng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        EventStore s;
        start(s, 0);
        std::vector<Interval> active;
        double t = 0;
        int id = 0;
        while (true) {
            t += rng.uniform(0, 2 * kH);
            const double d = rng.uniform(60, 2 * kH);
            if (t + d >= kDay) break;
            const bool maint = rng.bernoulli(0.3);
            const auto name = "t" + std::to_string(id++);
            task(s, t, name, "started", maint);
            task(s, t + d, name, rng.bernoulli(0.5) ? "completed" : "failed", maint);
            if (!maint) active.push_back({t, t + d});
            t += d;
        }
        end(s, kDay, "horizon_end");
        const double ws = rng.uniform(0, 12), we = ws + rng.uniform(1, 12);
        const auto windows = daily_windows(ws, we, kDay);
        std::vector<Interval> clipped;
        for (const auto& a : active) clipped.push_back({std::max(a.begin, ws * kH), std::min(a.end, we * kH)});
        const double expected = 100.0 * oracle_union(clipped) / ((we - ws) * kH);
        const double got = a_percent(s.records(), windows);
        CHECK(got == doctest::Approx(expected).epsilon(1e-12));
        CHECK(got >= 0.0);
        CHECK(got <= 100.0);
        // Pure function of the log.
        CHECK(a_percent(s.records(), windows) == got);
    }
}

TEST_CASE("43 runs give a 43-row histogram") {
    EventStore s;
    std::vector<double> lengths;
    double t = 0;
    for (int i = 0; i < 43; ++i) {
        const double len = (i % 7 + 1) * kH * 3.5 + i;
        lengths.push_back(len);
        start(s, t);
        end(s, t + len, i == 42 ? "horizon_end" : "unrecoverable_failure");
        t += len + 600;
    }
    const auto runs = segment_runs(s.records());
    REQUIRE(runs.size() == 43);
    double sum = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        CHECK(runs[i].length() == lengths[i]);
        sum += lengths[i];
    }
    const auto rep = compute_report(s.records(), daily_windows(0, 24, t));
    CHECK(rep.cumulative_tsl == sum);
    CHECK(rep.max_tsl == *std::max_element(lengths.begin(), lengths.end()));

    std::ostringstream csv;
    write_run_histogram_csv(runs, csv);
    std::istringstream in(csv.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "run,start_s,end_s,length_s,length_days,termination");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 43);
}

TEST_CASE("recovery table from a crafted log") {
    EventStore s;
    start(s, 0);
    failure(s, 100);
    recovered(s, 110);
    segment(s, 400, 5.0);
    failure(s, 1000);
    recovered(s, 1010);
    segment(s, 1030, 2.0);
    failure(s, 1040, true);  // 30 s after the second recovery
    end(s, 2000, "unrecoverable_failure");

    const auto table = recovery_table(s.records());
    const auto& bumper = table.by_class.at(recovery::FailureClass::BumperPressed);
    CHECK(bumper.successful == 1);
    CHECK(bumper.unsuccessful == 1);
    CHECK(bumper.total == 2);
    CHECK(table.by_class.at(recovery::FailureClass::NavFail).total == 0);
    CHECK(navigation_failures(s.records()) == 3);
    CHECK(distance_m(s.records()) == 7.0);

    EventStore empty;
    const auto none = recovery_table(empty.records());
    CHECK(none.by_class.size() == 3);
    for (const auto& [c, row] : none.by_class) CHECK(row.total == 0);
}

TEST_CASE("report renders the Table 1 rows") {
    EventStore s;
    start(s, 0);
    segment(s, 10, 1500.0);
    task(s, 20, "a", "started");
    task(s, 30, "a", "completed");
    end(s, 2 * kDay + 3 * kH + 7 * 60, "horizon_end");
    const auto rep = compute_report(s.records(), daily_windows(0, 24, 3 * kDay));
    std::ostringstream out;
    write_summary(rep, out);
    const auto text = out.str();
    for (const char* row : {"Total distance (km)    1.500", "Tasks completed        1",
                            "Max TSL                2 d 03 h 07 m", "Cumulative TSL         2 d 03 h 07 m",
                            "Runs                   1", "A%"})
        CHECK(text.find(row) != std::string::npos);
}

TEST_CASE("property: simulated logs keep report invariants") {
    auto sc = scenario::load_scenario(std::filesystem::path(LTA_SCENARIO_DIR) / "day1.json");
    sc.horizon_days = 3;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        sc.seed = seed;
        EventStore s;
        run::simulate(sc, s);
        const auto windows = run::windows_from_log(s.records());
        const auto rep = compute_report(s.records(), windows);
        double sum = 0, mx = 0;
        for (double l : rep.run_lengths) {
            sum += l;
            mx = std::max(mx, l);
        }
        CHECK(rep.cumulative_tsl == sum);
        CHECK(rep.max_tsl == mx);
        CHECK(rep.a_percent >= 0.0);
        CHECK(rep.a_percent <= 100.0);
        const auto table = recovery_table(s.records());
        for (const auto& [k, row] : table.by_behavior) CHECK(row.total == row.successful + row.unsuccessful);
        CHECK(compute_report(s.records(), windows).a_percent == rep.a_percent);
    }
}

TEST_CASE("back-to-back daily windows stay separate rows") {
    EventStore s;
    start(s, 0);
    task(s, 20 * kH, "patrol", "started");
    task(s, 28 * kH, "patrol", "completed");
    end(s, 2 * kDay, "horizon_end");
    std::ostringstream daily;
    write_daily_a_percent_csv(s.records(), daily_windows(0, 24, 2 * kDay), daily);
    std::ostringstream expected;
    expected << "day,allowed_s,active_s,a_percent\n"
             << "0,86400,14400," << 100.0 * 4 / 24 << "\n"
             << "1,86400,14400," << 100.0 * 4 / 24 << "\n";
    CHECK(daily.str() == expected.str());
}
