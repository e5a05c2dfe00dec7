#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <climits>
#include <map>

#include "lta/executive.hpp"
#include "lta/rng.hpp"
#include "lta/topomap.hpp"

using namespace lta;
using namespace lta::exec;

namespace {

Task task(const std::string& id, const std::string& node, double start, double end, double dur, int prio = 0) {
    Task t;
    t.id = id;
    t.kind = TaskKind::PatrolCheck;
    t.node = node;
    t.window = {start, end};
    t.max_duration = dur;
    t.priority = prio;
    t.work_s = dur / 2;
    return t;
}

TravelTime constant_travel(double s) {
    return [s](const NodeId& a, const NodeId& b, double) { return a == b ? 0.0 : s; };
}

topo::TopoMap office() { return topo::load_map_file(std::string(LTA_SCENARIO_DIR) + "/maps/office.json"); }

TravelTime nominal(const topo::TopoMap& map) {
    return [&map](const NodeId& a, const NodeId& b, double) { return map.nominal_route(a, b).duration; };
}

// Earliest feasible slot for `t` anywhere in `s`, restated from the
// schedule contract: leave the previous stop at its planned end, start no
// earlier than the window opens, finish by its close, and still reach the
// following stop by its planned start.
bool fits_somewhere(const Schedule& s, const Task& t, double now, const NodeId& start,
                    const std::map<std::pair<NodeId, NodeId>, double>& travel) {
    auto tt = [&](const NodeId& a, const NodeId& b) { return a == b ? 0.0 : travel.at({a, b}); };
    for (std::size_t pos = 0; pos <= s.entries.size(); ++pos) {
        const double leave = pos == 0 ? now : s.entries[pos - 1].planned_end;
        const NodeId& from = pos == 0 ? start : s.entries[pos - 1].node;
        const double begin = std::max(leave + tt(from, t.node), t.window.earliest_start);
        const double end = begin + t.max_duration;
        if (end > t.window.latest_end) continue;
        if (pos < s.entries.size() && end + tt(t.node, s.entries[pos].node) > s.entries[pos].planned_start) continue;
        return true;
    }
    return false;
}

}  // namespace

TEST_CASE("task validation") {
    CHECK_NOTHROW(task("a", "n", 0, 100, 100).validate());
    CHECK_THROWS_AS(task("a", "n", 100, 100, 0).validate(), ValidationError);
    CHECK_THROWS_AS(task("a", "n", 0, 100, 101).validate(), ValidationError);
    CHECK(task_kind_from_string(to_string(TaskKind::ActivityBatchLearn)) == TaskKind::ActivityBatchLearn);
    CHECK_THROWS_AS(task_kind_from_string("nap"), ValidationError);
}

TEST_CASE("a lone task waits for its window") {
    const auto s = schedule(0, "A", {task("t", "B", 100, 1000, 60)}, constant_travel(50));
    REQUIRE(s.entries.size() == 1);
    CHECK(s.entries[0].arrive == 50);
    CHECK(s.entries[0].planned_start == 100);
    CHECK(s.entries[0].planned_end == 160);
    CHECK(s.dropped.empty());
    CHECK(schedule(0, "A", {}, constant_travel(1)).entries.empty());
}

TEST_CASE("two far-apart tasks with one window: priority wins, the other is dropped") {
    const auto map = office();
    const double lab_to_kitchen = map.nominal_route("lab", "kitchen").duration;
    const double kitchen_to_lab = map.nominal_route("kitchen", "lab").duration;
    const double dur = 300, open = 1000, close = 1400;
    // Neither order fits both: dur + travel + dur exceeds the window.
    REQUIRE(dur + std::min(lab_to_kitchen, kitchen_to_lab) + dur > close - open);
    for (int lab_prio : {1, 5}) {
        const std::vector<Task> tasks = {task("lab", "lab", open, close, dur, lab_prio),
                                         task("kitchen", "kitchen", open, close, dur, 3)};
        const auto s = schedule(0, "dock", tasks, nominal(map));
        REQUIRE(s.entries.size() == 1);
        const bool lab_wins = lab_prio > 3;
        CHECK(s.entries[0].task_id == (lab_wins ? "lab" : "kitchen"));
        CHECK(s.dropped == std::vector<std::size_t>{lab_wins ? 1u : 0u});
    }
}

TEST_CASE("battery guard arithmetic") {
    const double drain = 1.0 / (12 * 3600);
    const double charge = 1.0 / (3 * 3600);
    CHECK_FALSE(battery_guard(0.5, drain, 300, 0, "dock", charge).has_value());
    CHECK(0.5 - drain * 900 > 0.15);
    CHECK(0.17 - drain * 1200 <= 0.15);
    const auto t = battery_guard(0.17, drain, 600, 5000, "dock", charge);
    REQUIRE(t.has_value());
    CHECK(t->kind == TaskKind::Charge);
    CHECK(t->priority == INT_MAX);
    CHECK(t->maintenance);
    CHECK(t->node == "dock");
    CHECK(t->window.earliest_start == 5000);
    CHECK(t->max_duration == doctest::Approx(0.95 * 3 * 3600));
    CHECK(t->work_s == doctest::Approx((0.95 - 0.17) * 3 * 3600));
    CHECK_NOTHROW(t->validate());

    CHECK(charge_complete(0.95, true));
    CHECK_FALSE(charge_complete(0.95, false));
    CHECK_FALSE(charge_complete(0.94, true));
}

TEST_CASE("an emitted charge task is scheduled before competing work") {
    const auto map = office();
    const double drain = 1.0 / (12 * 3600);
    const double to_dock = map.nominal_route("lab", "dock").duration;
    const auto charge = battery_guard(0.16, drain, to_dock, 40000, "dock", 1.0 / (3 * 3600));
    REQUIRE(charge.has_value());
    const std::vector<Task> tasks = {task("patrol", "office", 40000, 47200, 600, 5), *charge};
    const auto s = schedule(40000, "lab", tasks, nominal(map));
    REQUIRE_FALSE(s.entries.empty());
    CHECK(s.entries[0].task_id == charge->id);
    CHECK(s.entries[0].arrive == doctest::Approx(40000 + to_dock));
    CHECK(s.dropped == std::vector<std::size_t>{0});
}

TEST_CASE("property: schedules are feasible, complete, and greedy-maximal") {
    Rng rng(67);
    const std::vector<NodeId> nodes = {"a", "b", "c", "d", "e"};
    for (int trial = 0; trial < 500; ++trial) {
        std::map<std::pair<NodeId, NodeId>, double> travel;
        for (const auto& a : nodes)
            for (const auto& b : nodes) travel[{a, b}] = a == b ? 0.0 : rng.uniform(10, 400);
        const TravelTime tt = [&](const NodeId& a, const NodeId& b, double) { return travel.at({a, b}); };
        std::vector<Task> tasks;
        const int n = static_cast<int>(rng.below(9));
        for (int i = 0; i < n; ++i) {
            const double open = rng.uniform(0, 5000);
            const double len = rng.uniform(100, 2000);
            tasks.push_back(task("t" + std::to_string(i), nodes[rng.below(nodes.size())], open, open + len,
                                 rng.uniform(0, len), static_cast<int>(rng.below(3))));
        }
        const double now = rng.uniform(0, 500);
        const auto s = schedule(now, "a", tasks, tt);

        std::vector<int> seen(tasks.size(), 0);
        for (auto i : s.dropped) ++seen[i];
        double clock = now;
        NodeId at = "a";
        for (const auto& e : s.entries) {
            ++seen[e.task];
            const auto& t = tasks[e.task];
            CHECK(e.task_id == t.id);
            CHECK(e.depart >= clock - 1e-9);
            CHECK(e.arrive == doctest::Approx(e.depart + (at == e.node ? 0.0 : travel.at({at, e.node}))));
            CHECK(e.planned_start >= e.arrive - 1e-9);
            CHECK(e.planned_start >= t.window.earliest_start);
            CHECK(e.planned_end == doctest::Approx(e.planned_start + t.max_duration));
            CHECK(e.planned_end <= t.window.latest_end + 1e-9);
            clock = e.planned_end;
            at = e.node;
        }
        for (int c : seen) CHECK(c == 1);
        for (auto i : s.dropped) CHECK_FALSE(fits_somewhere(s, tasks[i], now, "a", travel));
        // A dropped task never displaced a lower-priority one it could have replaced alone.
        for (auto i : s.dropped) {
            const auto solo = schedule(now, "a", {tasks[i]}, tt);
            if (!solo.entries.empty()) {
                bool blocked_by_peer_or_better = false;
                for (const auto& e : s.entries)
                    if (tasks[e.task].priority >= tasks[i].priority) blocked_by_peer_or_better = true;
                CHECK(blocked_by_peer_or_better);
            }
        }
    }
}

TEST_CASE("unreachable nodes are dropped") {
    const TravelTime tt = [](const NodeId&, const NodeId& b, double) {
        return b == "island" ? std::numeric_limits<double>::infinity() : 10.0;
    };
    const auto s = schedule(0, "a", {task("x", "island", 0, 100, 10), task("y", "b", 0, 100, 10)}, tt);
    CHECK(s.dropped == std::vector<std::size_t>{0});
    CHECK(s.entries.size() == 1);
}

TEST_CASE("watchdog restarts after the latency") {
    ComponentHealth h({{"db", 30.0}, {"tracker", 5.0}});
    auto r = h.tick(100, {{100, "db"}});
    CHECK(h.state("db") == ComponentState::Restarting);
    CHECK_FALSE(h.up("db"));
    CHECK(h.up("tracker"));
    CHECK(h.up("no_such_component"));
    REQUIRE(r.events.size() == 2);
    CHECK(r.events[0].state == ComponentState::Crashed);
    CHECK(r.events[1].state == ComponentState::Restarting);
    CHECK(h.next_restart() == std::optional<double>(130));
    r = h.tick(129.9, {});
    CHECK(r.events.empty());
    r = h.tick(200, {});
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].t == 130);
    CHECK(r.events[0].state == ComponentState::Up);
    CHECK(h.up("db"));
    CHECK_FALSE(h.next_restart().has_value());
    CHECK_THROWS_AS(h.tick(300, {{400, "db"}}), StateError);
    CHECK_THROWS_AS(h.tick(300, {{250, "nope"}}), NotFoundError);
}

TEST_CASE("eleven crashes in one day is unrecoverable, ten is not") {
    ComponentHealth h({{"db", 1.0}});
    std::vector<std::pair<double, std::string>> crashes;
    for (int i = 0; i < 10; ++i) crashes.emplace_back(1000.0 + i * 100, "db");
    CHECK_FALSE(h.tick(5000, crashes).unrecoverable.has_value());
    CHECK(h.crash_count("db") == 10);
    // The next day starts a fresh budget.
    CHECK_FALSE(h.tick(86400 + 10, {{86400 + 5, "db"}}).unrecoverable.has_value());
    ComponentHealth g({{"db", 1.0}});
    crashes.emplace_back(6000, "db");
    const auto r = g.tick(7000, crashes);
    CHECK(r.unrecoverable == std::optional<std::string>("db"));
}

TEST_CASE("watchdog events are time ordered") {
    Rng rng(71);
    for (int trial = 0; trial < 100; ++trial) {
        ComponentHealth h({{"a", rng.uniform(1, 100)}, {"b", rng.uniform(1, 100)}, {"c", rng.uniform(1, 100)}});
        std::vector<std::pair<double, std::string>> crashes;
        double t = 0;
        for (int i = 0; i < 8; ++i) {
            t += rng.uniform(0, 60);
            crashes.emplace_back(t, std::string(1, static_cast<char>('a' + rng.below(3))));
        }
        const auto r = h.tick(t + 500, crashes);
        for (std::size_t i = 1; i < r.events.size(); ++i) CHECK(r.events[i - 1].t <= r.events[i].t);
        CHECK(h.up("a"));
        CHECK(h.up("b"));
        CHECK(h.up("c"));
    }
}

TEST_CASE("component requirements") {
    CHECK(required_component(TaskKind::InfoTerminal) == std::optional<std::string>("info_terminal"));
    CHECK(required_component(TaskKind::ConfirmIdentity) == std::optional<std::string>("people_tracker"));
    CHECK(required_component(TaskKind::DbBackup) == std::optional<std::string>("database"));
    CHECK_FALSE(required_component(TaskKind::PatrolCheck).has_value());
}
