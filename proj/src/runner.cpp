#include "lta/runner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>

#include "lta/error.hpp"
#include "lta/executive.hpp"
#include "lta/monitored_nav.hpp"
#include "lta/world.hpp"

namespace lta::run {

namespace {

using exec::Task;
using exec::TaskKind;
using metrics::Termination;
using scenario::Variant;
using store::Category;
using topo::NodeId;

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class NavResult { Reached, Failed, Fatal };

class Sim {
public:
    Sim(const scenario::Scenario& sc, store::EventStore& store, const std::optional<std::string>& backup)
        : sc_(sc),
          store_(store),
          backup_(backup),
          world_(sc.map, sc.world, sc.seed),
          learner_(sc.map, learner_options(sc)),
          health_(component_specs(), sc.executive.max_crashes_per_day) {}

    RunOutput run() {
        const double horizon = sc_.horizon_days * sim::kDay;
        emit(Category::RunMarker, {{"kind", "session"},
                                   {"seed", sc_.seed},
                                   {"variant", scenario::to_string(sc_.variant)},
                                   {"horizon_s", horizon},
                                   {"autonomy_window_h", {sc_.world.autonomy_start_h, sc_.world.autonomy_end_h}}});
        emit(Category::RunMarker, {{"kind", "start"}});
        active_ = true;
        for (int d = 0; d < sc_.horizon_days; ++d) {
            begin_day(d);
            const double day_end = (d + 1) * sim::kDay;
            while (world_.now() < day_end) step(day_end);
        }
        for (const auto& p : pending_) emit_task(p.task, "deferred", {{"reason", "horizon"}});
        pending_.clear();
        if (active_) emit(Category::RunMarker, {{"kind", "end"}, {"termination", "horizon_end"}});
        result_.days = sc_.horizon_days;
        return {result_, learner_};
    }

private:
    struct Pending {
        Task task;
        bool postponed = false;
    };

    std::vector<exec::ComponentHealth::Spec> component_specs() const {
        std::vector<exec::ComponentHealth::Spec> specs;
        for (const auto& c : sc_.world.components) specs.push_back({c.name, c.restart_latency_s});
        return specs;
    }

    void emit(Category c, Json payload) {
        const auto before = learner_.rebuild_count();
        store_.append(world_.now(), c, std::move(payload));
        learner_.apply(store_.records().back());
        if (learner_.rebuild_count() != before) policy_cache_.clear();
    }

    Json task_payload(const Task& t, const std::string& state) const {
        return {{"task_id", t.id},
                {"kind", exec::to_string(t.kind)},
                {"state", state},
                {"node", t.node},
                {"maintenance", t.maintenance}};
    }

    void emit_task(const Task& t, const std::string& state, const Json& extra = Json::object()) {
        auto p = task_payload(t, state);
        for (auto it = extra.begin(); it != extra.end(); ++it) p[it.key()] = it.value();
        emit(Category::Task, std::move(p));
    }

    void add_task(Task t) {
        t.validate();
        emit_task(t, "created", {{"window", {t.window.earliest_start, t.window.latest_end}},
                                 {"max_duration_s", t.max_duration},
                                 {"priority", t.priority}});
        pending_.push_back({std::move(t)});
    }

    void remove_task(const std::string& id) {
        std::erase_if(pending_, [&](const Pending& p) { return p.task.id == id; });
    }

    void observe_battery() {
        result_.min_battery = std::min(result_.min_battery, world_.battery());
        if (world_.battery_depleted()) {
            result_.battery_depleted = true;
            if (active_) terminate(Termination::UnrecoverableFailure, "battery depleted");
        }
    }

    // --- navigation ---------------------------------------------------------

    bool adaptive_nav() const { return sc_.variant != Variant::StaticNav; }

    const nav::NavPolicy* policy(const NodeId& goal, double t) {
        const auto bucket = static_cast<long>(std::floor(t / sim::kHour));
        const auto key = std::make_pair(goal, bucket);
        auto it = policy_cache_.find(key);
        if (it == policy_cache_.end()) {
            std::optional<nav::NavPolicy> pol;
            try {
                const auto mdp = nav::build_mdp(sc_.map, learner_.navigation_snapshot(), (bucket + 0.5) * sim::kHour,
                                                sc_.navigation.fatal_cost);
                pol = nav::solve(mdp, goal, sc_.navigation.solve);
            } catch (const Error&) {
            }
            it = policy_cache_.emplace(key, std::move(pol)).first;
        }
        return it->second ? &*it->second : nullptr;
    }

    double nominal_travel(const NodeId& from, const NodeId& to) const {
        try {
            return sc_.map.nominal_route(from, to).duration;
        } catch (const NoRouteError&) {
            return kInf;
        }
    }

    double travel(const NodeId& from, const NodeId& to, double t) {
        if (from == to) return 0.0;
        if (adaptive_nav()) {
            if (const auto* p = policy(to, t)) {
                const double v = p->T(from);
                if (std::isfinite(v) && p->chosen(from)) return v;
            }
        }
        return nominal_travel(from, to);
    }

    const topo::TopoEdge* next_edge(const NodeId& goal) {
        const auto cur = world_.location().node;
        if (adaptive_nav()) {
            if (const auto* p = policy(goal, world_.now()))
                if (const auto& e = p->chosen(cur); e && std::isfinite(p->V(cur))) return &sc_.map.edge(*e);
        }
        try {
            const auto route = sc_.map.nominal_route(cur, goal);
            if (!route.edges.empty()) return &sc_.map.edge(route.edges.front());
        } catch (const NoRouteError&) {
        }
        return nullptr;
    }

    void emit_step(const recovery::NavStep& s) {
        using recovery::StepKind;
        if (s.kind == StepKind::Segment) {
            emit(Category::Traversal, {{"kind", "segment"},
                                       {"edge", s.edge},
                                       {"from_progress", s.from_progress},
                                       {"to_progress", s.to_progress},
                                       {"distance", s.distance},
                                       {"duration", s.duration},
                                       {"completed", s.completed}});
            return;
        }
        Json p = {{"kind", s.kind == StepKind::Failure ? "failure" : "recovery"},
                  {"edge", s.edge},
                  {"x", s.x},
                  {"y", s.y},
                  {"progress", s.from_progress},
                  {"failure_class", recovery::to_string(s.failure)}};
        if (s.kind == StepKind::Failure) {
            p["fatal"] = s.fatal;
            p["from_recovery"] = s.from_recovery;
        } else {
            p["behavior"] = recovery::to_string(s.behavior);
            p["immediate_success"] = s.immediate_success;
            p["duration"] = s.duration;
        }
        emit(Category::Recovery, std::move(p));
    }

    NavResult navigate(const NodeId& goal) {
        const std::size_t limit = 4 * sc_.map.nodes().size() + 8;
        for (std::size_t hops = 0;; ++hops) {
            if (world_.location().node == goal) return NavResult::Reached;
            if (hops >= limit) return NavResult::Failed;
            const auto* edge = next_edge(goal);
            if (!edge) return NavResult::Failed;
            const double t0 = world_.now();
            const auto report = recovery::traverse_monitored(*edge, sc_.navigation.recovery, world_,
                                                             [this](const recovery::NavStep& s) { emit_step(s); });
            double moving = 0.0;
            for (const auto& s : report.steps)
                if (s.kind == recovery::StepKind::Segment) moving += s.duration;
            nav::TraversalOutcome outcome = nav::TraversalOutcome::Success;
            if (report.result == recovery::TraversalResult::RecoveredThenSuccess)
                outcome = nav::TraversalOutcome::RecoveredFailure;
            else if (report.result == recovery::TraversalResult::FailedExhausted ||
                     report.result == recovery::TraversalResult::FailedFatal)
                outcome = nav::TraversalOutcome::FatalFailure;
            emit(Category::Traversal, {{"kind", "result"},
                                       {"edge", edge->id},
                                       {"outcome", nav::to_string(outcome)},
                                       {"result", recovery::to_string(report.result)},
                                       {"t_start", t0},
                                       {"duration", report.elapsed},
                                       {"recovery_time", std::max(0.0, report.elapsed - moving)}});
            if (report.result == recovery::TraversalResult::FailedFatal) return NavResult::Fatal;
            if (report.result == recovery::TraversalResult::FailedExhausted) return NavResult::Failed;
            observe_battery();
            if (!active_) return NavResult::Failed;
        }
    }

    // --- run lifecycle -------------------------------------------------------

    void terminate(Termination why, const std::string& reason) {
        emit(Category::RunMarker, {{"kind", "end"}, {"termination", metrics::to_string(why)}, {"reason", reason}});
        active_ = false;
        restart_at_ = world_.now() + sc_.executive.restart_delay_s;
        consecutive_nav_failures_ = 0;
        // The expert carries the robot back to its dock.
        world_.reset_to_dock();
    }

    void restart() {
        health_ = exec::ComponentHealth(component_specs(), sc_.executive.max_crashes_per_day);
        emit(Category::RunMarker, {{"kind", "start"}});
        active_ = true;
    }

    // --- external events -----------------------------------------------------

    double next_external() const {
        double t = kInf;
        if (!crashes_.empty()) t = std::min(t, crashes_.front().t);
        if (!walks_.empty()) t = std::min(t, walks_.front().poses().back().t);
        if (active_)
            if (auto r = health_.next_restart()) t = std::min(t, *r);
        return t;
    }

    void process_externals() {
        const double now = world_.now();
        std::vector<std::pair<double, std::string>> due;
        while (!crashes_.empty() && crashes_.front().t <= now) {
            if (active_) due.emplace_back(crashes_.front().t, crashes_.front().component);
            crashes_.pop_front();
        }
        if (active_) {
            const auto res = health_.tick(now, due);
            for (const auto& e : res.events)
                emit(Category::Component, {{"name", e.component}, {"state", exec::to_string(e.state)}, {"event_t", e.t}});
            if (res.unrecoverable)
                terminate(Termination::UnrecoverableFailure, "component " + *res.unrecoverable + " keeps crashing");
        }
        while (!walks_.empty() && walks_.front().poses().back().t <= now) {
            auto traj = std::move(walks_.front());
            walks_.pop_front();
            if (!active_ || !health_.up("people_tracker")) continue;
            emit(Category::Trajectory, learn::trajectory_payload(traj));
            check_novelty(traj);
        }
    }

    void check_novelty(const activity::Trajectory& traj) {
        const auto& ac = sc_.activity;
        if (ac.identity_node.empty() || identity_today_ >= ac.identity_per_day || !learner_.clusters()) return;
        activity::PartialClassification r;
        try {
            r = activity::classify_partial(*learner_.clusters(), traj, sc_.world.regions, ac.prefix_fraction, ac.encoder);
        } catch (const Error&) {
            return;
        }
        if (!r.novel) return;
        ++identity_today_;
        Task t;
        t.id = "identity-" + traj.id();
        t.kind = TaskKind::ConfirmIdentity;
        t.node = ac.identity_node;
        t.max_duration = ac.identity_max_duration_s;
        t.work_s = 0.5 * ac.identity_max_duration_s;
        t.window = {world_.now(), world_.now() + ac.identity_window_s};
        t.priority = ac.identity_priority;
        add_task(std::move(t));
    }

    // --- days ------------------------------------------------------------------

    void begin_day(int d) {
        auto ev = world_.sample_day_events(d);
        for (auto& c : ev.crashes) crashes_.push_back(c);
        std::sort(crashes_.begin(), crashes_.end(),
                  [](const sim::CrashEvent& a, const sim::CrashEvent& b) { return a.t < b.t; });
        for (auto& w : ev.trajectories) walks_.push_back(std::move(w));
        std::stable_sort(walks_.begin(), walks_.end(), [](const auto& a, const auto& b) {
            return a.poses().back().t < b.poses().back().t;
        });
        identity_today_ = 0;
        emit(Category::Battery, {{"level", world_.battery()}, {"docked", world_.docked()}, {"kind", "daily"}});

        const double day0 = d * sim::kDay;
        for (const auto& spec : sc_.tasks) {
            Task t = spec.task;
            if (spec.repeat == scenario::Repeat::Daily) {
                t.id += "@" + std::to_string(d);
                t.window.earliest_start += day0;
                t.window.latest_end += day0;
            } else if (std::floor(t.window.earliest_start / sim::kDay) != d) {
                continue;
            }
            if (t.window.latest_end - t.max_duration < world_.now()) continue;
            add_task(std::move(t));
        }
        plan_info_visits(d);
    }

    void plan_info_visits(int d) {
        const auto& ic = sc_.info;
        const auto& models = learner_.interaction_snapshot();
        if (!ic.enabled || ic.visits_per_day <= 0 || models.models().empty()) return;
        const info::PlanOptions window{sc_.world.autonomy_start_h, sc_.world.autonomy_end_h};
        std::size_t slots = 0;
        {
            std::vector<double> starts;
            for (const auto& s : info::candidate_slots(models, d, window)) starts.push_back(s.second);
            std::sort(starts.begin(), starts.end());
            slots = static_cast<std::size_t>(std::unique(starts.begin(), starts.end()) - starts.begin());
        }
        const int n = static_cast<int>(std::min<std::size_t>(slots, static_cast<std::size_t>(ic.visits_per_day)));
        auto plan = sc_.variant == Variant::UniformInfo ? info::uniform_plan(models, d, n, world_.rng(), window)
                                                        : info::sample_plan(models, d, n, ic.beta, world_.rng(), window);
        int k = 0;
        for (const auto& v : plan.visits) {
            Task t;
            t.id = "info@" + std::to_string(d) + "-" + std::to_string(k++);
            t.kind = TaskKind::InfoTerminal;
            t.node = v.node;
            t.max_duration = ic.max_duration_s;
            t.work_s = ic.max_duration_s;
            t.window = {v.slot_start, v.slot_start + ic.slot_s};
            t.priority = ic.priority;
            if (t.window.latest_end - t.max_duration < world_.now()) continue;
            add_task(std::move(t));
        }
        result_.plans.push_back(std::move(plan));
    }

    // --- the loop ----------------------------------------------------------------

    void idle_until(double t) {
        world_.advance_to(t);
        observe_battery();
    }

    void go_home(double limit) {
        const double t0 = world_.now();
        const auto r = navigate(sc_.map.dock());
        if (r == NavResult::Fatal) {
            terminate(Termination::UnrecoverableFailure, "fatal navigation failure");
            return;
        }
        observe_battery();
        if (r == NavResult::Failed && world_.now() == t0)
            idle_until(std::min({limit, next_external(), t0 + sc_.executive.idle_return_s}));
    }

    void expire_tasks() {
        const double now = world_.now();
        for (auto it = pending_.begin(); it != pending_.end();) {
            if (now > it->task.window.latest_end - it->task.max_duration) {
                emit_task(it->task, "dropped", {{"reason", it->postponed ? "component_down" : "infeasible"}});
                it = pending_.erase(it);
            } else {
                ++it;
            }
        }
    }

    void step(double limit) {
        process_externals();
        if (!active_) {
            if (world_.now() >= restart_at_) {
                restart();
            } else {
                world_.advance_to(std::min({restart_at_, limit, next_external()}));
            }
            return;
        }
        expire_tasks();

        std::vector<Task> cands;
        for (auto& p : pending_) {
            const auto comp = exec::required_component(p.task.kind);
            if (comp && !health_.up(*comp)) {
                if (!p.postponed) emit_task(p.task, "postponed", {{"component", *comp}});
                p.postponed = true;
                continue;
            }
            cands.push_back(p.task);
        }
        const NodeId here = world_.location().node;
        const auto tt = [this](const NodeId& a, const NodeId& b, double t) { return travel(a, b, t); };
        const auto sched = exec::schedule(world_.now(), here, cands, tt);

        const bool charging_planned =
            std::any_of(pending_.begin(), pending_.end(), [](const Pending& p) { return p.task.kind == TaskKind::Charge; });
        const bool full = world_.docked() && world_.battery() >= sc_.executive.battery.charge_complete;
        if (!charging_planned && !full) {
            // Time until the robot could next be docked; waiting on the dock does not drain.
            double to_dock = travel(here, sc_.map.dock(), world_.now());
            if (!sched.entries.empty()) {
                const auto& f = sched.entries.front();
                double leave = world_.now();
                if (world_.docked())
                    leave = std::max(leave, f.planned_start - (f.arrive - f.depart) - sc_.executive.dispatch_slack_s);
                to_dock = (f.planned_end - leave) + travel(f.node, sc_.map.dock(), f.planned_end);
            }
            if (std::isfinite(to_dock)) {
                auto charge = exec::battery_guard(world_.battery(), sc_.world.battery.drain_per_s(), to_dock,
                                                  world_.now(), sc_.map.dock(), sc_.world.battery.charge_per_s(),
                                                  sc_.executive.battery);
                if (charge) {
                    add_task(std::move(*charge));
                    return;
                }
            }
        }

        const bool at_dock = world_.docked();
        if (sched.entries.empty()) {
            const double next = std::min(limit, next_external());
            if (!at_dock && next - world_.now() > sc_.executive.idle_return_s)
                go_home(limit);
            else
                idle_until(next);
            return;
        }

        const auto& first = sched.entries.front();
        const double travel_est = first.arrive - first.depart;
        const double depart_at =
            std::max(world_.now(), first.planned_start - travel_est - sc_.executive.dispatch_slack_s);
        if (depart_at > world_.now()) {
            if (!at_dock && depart_at - world_.now() > sc_.executive.idle_return_s) {
                go_home(limit);
                return;
            }
            idle_until(std::min({depart_at, limit, next_external()}));
            return;
        }
        execute(cands[first.task]);
    }

    void execute(const Task& task) {
        emit_task(task, "dispatched");
        const auto r = navigate(task.node);
        if (!active_) {
            emit_task(task, "failed", {{"reason", "run_terminated"}});
            remove_task(task.id);
            return;
        }
        if (r != NavResult::Reached) {
            emit_task(task, "failed", {{"reason", r == NavResult::Fatal ? "navigation_fatal" : "navigation"}});
            remove_task(task.id);
            if (r == NavResult::Fatal) {
                terminate(Termination::UnrecoverableFailure, "fatal navigation failure");
                return;
            }
            ++consecutive_nav_failures_;
            const int limit = sc_.executive.expert_intervention_after;
            if (limit > 0 && consecutive_nav_failures_ >= limit)
                terminate(Termination::ExpertIntervention, "repeated navigation failures");
            return;
        }
        consecutive_nav_failures_ = 0;
        emit_task(task, "arrived");
        if (world_.now() < task.window.earliest_start) idle_until(task.window.earliest_start);
        if (!active_) {
            emit_task(task, "failed", {{"reason", "run_terminated"}});
            remove_task(task.id);
            return;
        }
        if (world_.now() >= task.window.latest_end) {
            emit_task(task, "failed", {{"reason", "window_missed"}});
            remove_task(task.id);
            return;
        }
        if (const auto comp = exec::required_component(task.kind); comp && !health_.up(*comp)) {
            for (auto& p : pending_)
                if (p.task.id == task.id) p.postponed = true;
            emit_task(task, "postponed", {{"component", *comp}});
            return;
        }

        emit_task(task, "started");
        const double start = world_.now();
        if (task.kind == TaskKind::Charge) {
            emit(Category::Battery, {{"level", world_.battery()}, {"docked", world_.docked()}, {"kind", "charge_start"}});
            const double need = std::max(0.0, sc_.executive.battery.charge_complete - world_.battery()) /
                                sc_.world.battery.charge_per_s();
            idle_until(start + std::min(need, task.max_duration));
            emit(Category::Battery, {{"level", world_.battery()}, {"docked", world_.docked()}, {"kind", "charge_end"}});
            const bool done = exec::charge_complete(world_.battery(), world_.docked(), sc_.executive.battery);
            emit_task(task, done ? "completed" : "timeout");
            remove_task(task.id);
            return;
        }

        const bool hang = !task.maintenance && world_.sample_task_hang();
        if (hang || task.work_s > task.max_duration) {
            if (task.kind == TaskKind::InfoTerminal) record_interaction(task);
            idle_until(start + task.max_duration);
            emit_task(task, "timeout");
            remove_task(task.id);
            return;
        }
        if (task.kind == TaskKind::InfoTerminal) record_interaction(task);
        idle_until(start + task.work_s);
        Json extra = Json::object();
        if (task.kind == TaskKind::ActivityBatchLearn)
            extra["cluster_seed"] = sc_.seed * 1000003ULL + static_cast<std::uint64_t>(start / sim::kDay);
        if (task.kind == TaskKind::DbBackup && backup_ && store_.path()) store_.snapshot(*backup_);
        emit_task(task, "completed", extra);
        remove_task(task.id);
    }

    void record_interaction(const Task& task) {
        emit(Category::Interaction, {{"node", task.node}, {"interacted", world_.sample_interaction(task.node)}});
    }

    const scenario::Scenario& sc_;
    store::EventStore& store_;
    std::optional<std::string> backup_;
    sim::SimWorld world_;
    learn::Learner learner_;
    exec::ComponentHealth health_;
    std::vector<Pending> pending_;
    std::deque<sim::CrashEvent> crashes_;
    std::deque<activity::Trajectory> walks_;
    std::map<std::pair<NodeId, long>, std::optional<nav::NavPolicy>> policy_cache_;
    bool active_ = false;
    double restart_at_ = 0.0;
    int consecutive_nav_failures_ = 0;
    int identity_today_ = 0;
    RunResult result_;
};

}  // namespace

learn::LearnerOptions learner_options(const scenario::Scenario& sc) {
    learn::LearnerOptions o;
    o.edges = sc.navigation.edges;
    o.interaction = fremen::FremenOptions::defaults();
    o.slot_duration_s = sc.info.slot_s;
    o.activity.enabled = sc.activity.enabled;
    o.activity.regions = sc.world.regions;
    o.activity.encoder = sc.activity.encoder;
    o.activity.cluster = sc.activity.cluster;
    o.activity.max_training = sc.activity.max_training;
    o.activity.prefix_fraction = sc.activity.prefix_fraction;
    return o;
}

RunOutput simulate(const scenario::Scenario& sc, store::EventStore& store, const std::optional<std::string>& backup_path) {
    Sim sim(sc, store, backup_path);
    return sim.run();
}

std::vector<metrics::Interval> windows_from_log(const std::vector<store::EventRecord>& log) {
    double start_h = 8.0, end_h = 18.0, horizon = log.empty() ? 0.0 : log.back().t;
    for (const auto& r : log) {
        if (!store::is_session_start(r)) continue;
        if (r.payload.contains("autonomy_window_h")) {
            start_h = r.payload["autonomy_window_h"].at(0).get<double>();
            end_h = r.payload["autonomy_window_h"].at(1).get<double>();
        }
        if (r.payload.contains("horizon_s")) horizon = std::max(horizon, r.payload["horizon_s"].get<double>());
        break;
    }
    return metrics::daily_windows(start_h, end_h, horizon);
}

void write_reports(const std::filesystem::path& dir, const std::vector<store::EventRecord>& log,
                   const std::vector<metrics::Interval>& windows, const metrics::ActivityOptions& options) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name);
        if (!f) throw Error("cannot write '" + (dir / name).string() + "'");
        return f;
    };
    const auto report = metrics::compute_report(log, windows, options);
    {
        auto f = open("summary.txt");
        metrics::write_summary(report, f);
    }
    {
        auto f = open("run_histogram.csv");
        metrics::write_run_histogram_csv(metrics::segment_runs(log), f);
    }
    {
        auto f = open("recovery_table.csv");
        recovery::write_recovery_table_csv(metrics::recovery_table(log), f);
    }
    {
        auto f = open("recovery_locations.csv");
        recovery::write_recovery_locations_csv(metrics::nav_steps(log), f);
    }
    {
        auto f = open("daily_a_percent.csv");
        metrics::write_daily_a_percent_csv(log, windows, f, options);
    }
    {
        auto f = open("timeline.csv");
        metrics::write_timeline_csv(log, f);
    }
    {
        int days = 0;
        for (const auto& w : windows) days = std::max(days, static_cast<int>(w.begin / sim::kDay) + 1);
        auto f = open("interactions.csv");
        metrics::write_interactions_csv(log, days, f);
    }
}

double VariantMetrics::interactions_per_day(int first, int last) const {
    first = std::max(first, 0);
    last = std::min(last, static_cast<int>(daily_interactions.size()));
    if (last <= first) return 0.0;
    double sum = 0.0;
    for (int d = first; d < last; ++d) sum += daily_interactions[static_cast<std::size_t>(d)];
    return sum / (last - first);
}

VariantMetrics run_variant(const scenario::Scenario& base, std::uint64_t seed, scenario::Variant variant) {
    auto sc = base;
    sc.seed = seed;
    sc.variant = variant;
    store::EventStore store;
    simulate(sc, store);
    const auto& log = store.records();
    metrics::ActivityOptions opts{sc.executive.count_travel_as_active};
    const auto report = metrics::compute_report(log, windows_from_log(log), opts);
    VariantMetrics m;
    m.seed = seed;
    m.variant = variant;
    m.navigation_failures = report.navigation_failures;
    m.visits = report.visits;
    m.interactions = report.interactions;
    m.a_percent = report.a_percent;
    m.tasks_completed = report.tasks_completed;
    m.distance_km = report.distance_km;
    m.runs = report.run_count;
    m.daily_interactions.assign(static_cast<std::size_t>(sc.horizon_days), 0);
    for (const auto& r : log) {
        if (r.category != store::Category::Interaction || !r.payload.at("interacted").get<bool>()) continue;
        const auto d = static_cast<std::size_t>(r.t / sim::kDay);
        if (d < m.daily_interactions.size()) ++m.daily_interactions[d];
    }
    return m;
}

void write_compare_csv(const std::vector<VariantMetrics>& rows, std::ostream& out) {
    out << "seed,variant,navigation_failures,visits,interactions,interactions_per_day,a_percent,tasks_completed,"
           "distance_km,runs\n";
    for (const auto& m : rows)
        out << m.seed << ',' << scenario::to_string(m.variant) << ',' << m.navigation_failures << ',' << m.visits << ','
            << m.interactions << ',' << m.interactions_per_day(0, static_cast<int>(m.daily_interactions.size())) << ','
            << m.a_percent << ',' << m.tasks_completed << ',' << m.distance_km << ',' << m.runs << '\n';
}

}  // namespace lta::run
