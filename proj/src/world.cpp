#include "lta/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lta/error.hpp"

namespace lta::sim {

double PeriodicProcess::value(double t) const {
    double u = std::fmod(t - phase_s, period_s);
    if (u < 0.0) u += period_s;
    double v = base;
    if (shape == Shape::Cosine)
        v += amplitude * std::cos(2.0 * std::numbers::pi * u / period_s);
    else if (u < width_s)
        v += amplitude;
    return std::clamp(v, 0.0, 1.0);
}

void PeriodicProcess::validate(const std::string& context) const {
    if (!(period_s > 0.0) || !std::isfinite(period_s)) throw ValidationError(context + ": period must be > 0");
    if (base < 0.0 || base > 1.0) throw ValidationError(context + ": base probability outside [0, 1]");
    if (shape == Shape::Window && (width_s < 0.0 || width_s > period_s))
        throw ValidationError(context + ": window width must lie in [0, period]");
    if (shape == Shape::Window && (base + amplitude < 0.0 || base + amplitude > 1.0))
        throw ValidationError(context + ": in-window probability outside [0, 1]");
}

void WorldConfig::validate(const topo::TopoMap& map) const {
    default_hazard.validate("world default_hazard");
    for (const auto& [id, h] : hazards) {
        if (!map.has_edge(id)) throw ValidationError("world hazards: unknown edge '" + id + "'");
        h.validate("world hazard for '" + id + "'");
    }
    for (const auto& [id, d] : doors) {
        if (!map.has_edge(id)) throw ValidationError("world doors: unknown edge '" + id + "'");
        if (map.edge(id).action != topo::EdgeAction::DoorPass)
            throw ValidationError("world doors: edge '" + id + "' is not a door_pass edge");
        d.validate("world door for '" + id + "'");
    }
    for (const auto& id : carpet_edges)
        if (!map.has_edge(id)) throw ValidationError("world carpet_edges: unknown edge '" + id + "'");
    for (const auto& [node, p] : interaction_propensity) {
        if (!map.has_node(node)) throw ValidationError("world interaction_propensity: unknown node '" + node + "'");
        p.validate("world interaction propensity for '" + node + "'");
    }
    auto prob = [](double p, const std::string& what) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("world " + what + " must lie in [0, 1]");
    };
    prob(bumper_fraction, "bumper_fraction");
    prob(help_availability, "help_availability");
    prob(carpet_escape_probability, "carpet_escape_probability");
    prob(task_hang_probability, "task_hang_probability");
    for (const auto& [c, f] : fatal_fraction) prob(f, "fatal_fraction");
    if (help_latency_s < 0.0) throw ValidationError("world help_latency_s must be >= 0");
    if (duration_noise_sd < 0.0) throw ValidationError("world duration_noise_sd must be >= 0");
    if (!(battery.active_hours > 0.0 && battery.charge_hours > 0.0))
        throw ValidationError("world battery hours must be > 0");
    prob(battery.initial_level, "battery initial_level");
    for (const auto& c : components)
        if (c.crash_rate_per_day < 0.0 || c.restart_latency_s < 0.0)
            throw ValidationError("world component '" + c.name + "': rates and latencies must be >= 0");
    for (const auto& t : trajectory_templates) {
        if (t.waypoints.size() < 2) throw ValidationError("trajectory template '" + t.name + "': needs 2 waypoints");
        if (!(t.speed > 0.0) || !(t.sample_dt > 0.0) || t.per_day < 0.0)
            throw ValidationError("trajectory template '" + t.name + "': speed, sample_dt must be > 0");
    }
    if (!(autonomy_start_h >= 0.0 && autonomy_end_h <= 24.0 && autonomy_start_h < autonomy_end_h))
        throw ValidationError("world autonomy window must satisfy 0 <= start < end <= 24");
}

namespace {

double seconds_field(StrictObject& o, const std::string& stem, double fallback) {
    const Json* s = o.optional(stem + "_s");
    const Json* h = o.optional(stem + "_h");
    if (s && h) throw ValidationError(o.context() + ": give either '" + stem + "_s' or '" + stem + "_h', not both");
    if (s) return s->get<double>();
    if (h) return h->get<double>() * kHour;
    return fallback;
}

}  // namespace

PeriodicProcess periodic_from_json(const Json& doc, const std::string& context) {
    if (doc.is_number()) return PeriodicProcess::constant(doc.get<double>());
    StrictObject o(doc, context);
    PeriodicProcess p;
    p.base = o.get_or<double>("base", 0.0);
    p.amplitude = o.get_or<double>("amplitude", 0.0);
    p.period_s = seconds_field(o, "period", kDay);
    p.phase_s = seconds_field(o, "phase", 0.0);
    p.width_s = seconds_field(o, "width", 0.0);
    const auto shape = o.get_or<std::string>("shape", "cosine");
    if (shape == "cosine")
        p.shape = PeriodicProcess::Shape::Cosine;
    else if (shape == "window")
        p.shape = PeriodicProcess::Shape::Window;
    else
        throw ValidationError(context + ": unknown shape '" + shape + "'");
    o.finish();
    p.validate(context);
    return p;
}

WorldConfig world_config_from_json(const Json& doc) {
    StrictObject o(doc, "world");
    WorldConfig w;
    if (const Json* v = o.optional("default_hazard")) w.default_hazard = periodic_from_json(*v, "world default_hazard");
    if (const Json* v = o.optional("hazards"))
        for (auto it = v->begin(); it != v->end(); ++it)
            w.hazards[it.key()] = periodic_from_json(it.value(), "world hazard '" + it.key() + "'");
    if (const Json* v = o.optional("doors"))
        for (auto it = v->begin(); it != v->end(); ++it)
            w.doors[it.key()] = periodic_from_json(it.value(), "world door '" + it.key() + "'");
    for (const auto& e : o.get_or<std::vector<std::string>>("carpet_edges", {})) w.carpet_edges.insert(e);
    w.bumper_fraction = o.get_or<double>("bumper_fraction", w.bumper_fraction);
    if (const Json* v = o.optional("fatal_fraction")) {
        StrictObject f(*v, "world fatal_fraction");
        for (auto c : recovery::kFailureClasses)
            w.fatal_fraction[c] = f.get_or<double>(recovery::to_string(c), w.fatal_fraction[c]);
        f.finish();
    }
    w.duration_noise_sd = o.get_or<double>("duration_noise_sd", w.duration_noise_sd);
    if (const Json* v = o.optional("interaction_propensity"))
        for (auto it = v->begin(); it != v->end(); ++it)
            w.interaction_propensity[it.key()] =
                periodic_from_json(it.value(), "world interaction propensity '" + it.key() + "'");
    w.help_availability = o.get_or<double>("help_availability", w.help_availability);
    w.help_latency_s = o.get_or<double>("help_latency_s", w.help_latency_s);
    w.carpet_escape_probability = o.get_or<double>("carpet_escape_probability", w.carpet_escape_probability);
    if (const Json* v = o.optional("components")) {
        for (const auto& item : *v) {
            StrictObject c(item, "world component");
            ComponentSpec spec;
            spec.name = c.get<std::string>("name");
            spec.crash_rate_per_day = c.get_or<double>("crash_rate_per_day", 0.0);
            spec.restart_latency_s = c.get_or<double>("restart_latency_s", 30.0);
            c.finish();
            w.components.push_back(spec);
        }
    }
    if (const Json* v = o.optional("battery")) {
        StrictObject b(*v, "world battery");
        w.battery.initial_level = b.get_or<double>("initial_level", w.battery.initial_level);
        w.battery.active_hours = b.get_or<double>("active_hours", w.battery.active_hours);
        w.battery.charge_hours = b.get_or<double>("charge_hours", w.battery.charge_hours);
        b.finish();
    }
    if (const Json* v = o.optional("trajectory_templates")) {
        for (const auto& item : *v) {
            StrictObject t(item, "trajectory template");
            TrajectoryTemplate tt;
            tt.name = t.get<std::string>("name");
            for (const auto& p : t.get<std::vector<std::vector<double>>>("waypoints")) {
                if (p.size() != 2) throw ValidationError("trajectory template '" + tt.name + "': waypoints are [x, y]");
                tt.waypoints.push_back({p[0], p[1]});
            }
            tt.speed = t.get_or<double>("speed", tt.speed);
            tt.speed_sd = t.get_or<double>("speed_sd", tt.speed_sd);
            tt.pose_noise = t.get_or<double>("pose_noise", tt.pose_noise);
            tt.waypoint_jitter = t.get_or<double>("waypoint_jitter", tt.waypoint_jitter);
            tt.per_day = t.get_or<double>("per_day", tt.per_day);
            tt.sample_dt = t.get_or<double>("sample_dt", tt.sample_dt);
            t.finish();
            w.trajectory_templates.push_back(std::move(tt));
        }
    }
    if (const Json* v = o.optional("regions")) w.regions = activity::regions_from_json(*v);
    if (const Json* v = o.optional("autonomy_window_h")) {
        auto win = v->get<std::vector<double>>();
        if (win.size() != 2) throw ValidationError("world autonomy_window_h must be [start, end]");
        w.autonomy_start_h = win[0];
        w.autonomy_end_h = win[1];
    }
    w.task_hang_probability = o.get_or<double>("task_hang_probability", w.task_hang_probability);
    o.finish();
    return w;
}

SimWorld::SimWorld(topo::TopoMap map, WorldConfig config, std::uint64_t seed)
    : map_(std::move(map)), config_(std::move(config)), rng_(seed) {
    config_.validate(map_);
    location_.node = map_.dock();
    battery_ = config_.battery.initial_level;
}

void SimWorld::move_clock(double dt, bool docked_during) {
    if (!(dt >= 0.0)) throw StateError("world: the clock cannot move backwards");
    clock_ += dt;
    if (docked_during) {
        battery_ = std::min(1.0, battery_ + config_.battery.charge_per_s() * dt);
    } else {
        battery_ -= config_.battery.drain_per_s() * dt;
        if (battery_ <= 0.0) {
            battery_ = 0.0;
            depleted_ = true;
        }
    }
}

void SimWorld::advance_to(double t) {
    if (t <= clock_) return;
    move_clock(t - clock_, docked());
}

double SimWorld::noise_factor() {
    return std::clamp(1.0 + config_.duration_noise_sd * rng_.normal(), 0.5, 1.5);
}

double SimWorld::hazard(const EdgeId& edge, double t) const {
    auto it = config_.hazards.find(edge);
    return (it != config_.hazards.end() ? it->second : config_.default_hazard).value(t);
}

double SimWorld::door_open_probability(const EdgeId& edge, double t) const {
    auto it = config_.doors.find(edge);
    return it != config_.doors.end() ? it->second.value(t) : 1.0;
}

double SimWorld::interaction_propensity(const NodeId& node, double t) const {
    auto it = config_.interaction_propensity.find(node);
    return it != config_.interaction_propensity.end() ? it->second.value(t) : 0.0;
}

recovery::EdgeAttempt SimWorld::attempt_edge(const topo::TopoEdge& edge, double from_progress) {
    const bool at_source = !location_.edge && location_.node == edge.source && from_progress == 0.0;
    const bool on_edge = location_.edge && *location_.edge == edge.id && location_.progress == from_progress;
    if (!at_source && !on_edge)
        throw StateError("world: robot is not at the start of edge '" + edge.id + "'");
    if (!edge.enabled) throw StateError("world: edge '" + edge.id + "' is disabled");

    const double remaining = 1.0 - from_progress;
    const double nominal = edge.nominal_duration();
    const double t = clock_;
    recovery::EdgeAttempt out;

    bool blocked_by_door = false;
    if (config_.doors.count(edge.id)) blocked_by_door = !rng_.bernoulli(door_open_probability(edge.id, t));

    const bool failed = blocked_by_door || rng_.bernoulli(hazard(edge.id, t) * remaining);
    if (!failed) {
        out.success = true;
        out.progress = 1.0;
        out.duration = remaining * nominal * noise_factor();
        move_clock(out.duration, false);
        location_ = {edge.target, std::nullopt, 0.0};
        pending_failure_ = false;
        return out;
    }

    if (blocked_by_door) {
        out.failure = FailureClass::NavFail;
        out.progress = from_progress + 0.5 * remaining;
    } else {
        if (config_.carpet_edges.count(edge.id))
            out.failure = FailureClass::CarpetStuck;
        else
            out.failure = rng_.bernoulli(config_.bumper_fraction) ? FailureClass::BumperPressed : FailureClass::NavFail;
        out.progress = from_progress + remaining * rng_.uniform();
    }
    out.fatal = rng_.bernoulli(config_.fatal_fraction.at(out.failure));
    out.duration = (out.progress - from_progress) * nominal * noise_factor();
    move_clock(out.duration, false);
    location_ = {edge.source, edge.id, out.progress};
    pending_failure_ = true;
    return out;
}

recovery::RecoveryAttempt SimWorld::attempt_recovery(const recovery::RecoveryBehavior& behavior,
                                                     const recovery::RecoveryContext& context) {
    using recovery::Behavior;
    if (!pending_failure_ || context.edge == nullptr)
        throw StateError("world: no pending failure to recover from");
    const auto& edge = *context.edge;
    recovery::RecoveryAttempt out;
    switch (behavior.kind) {
        case Behavior::AskHelp:
            out.duration = config_.help_latency_s;
            move_clock(out.duration, false);
            out.recovered = rng_.bernoulli(config_.help_availability);
            break;
        case Behavior::SleepRetry:
            out.duration = behavior.duration_s;
            move_clock(out.duration, false);
            if (context.failure == FailureClass::CarpetStuck)
                out.recovered = rng_.bernoulli(config_.carpet_escape_probability);
            else if (config_.doors.count(edge.id))
                out.recovered = rng_.bernoulli(door_open_probability(edge.id, clock_));
            else
                out.recovered = rng_.bernoulli(1.0 - hazard(edge.id, clock_));
            break;
        case Behavior::Backtrack:
            out.duration = context.progress * edge.nominal_duration();
            move_clock(out.duration, false);
            location_ = {edge.source, std::nullopt, 0.0};
            out.recovered = true;
            break;
        case Behavior::BoostVelocity:
            out.duration = behavior.duration_s;
            move_clock(out.duration, false);
            if (context.failure == FailureClass::CarpetStuck)
                out.recovered = rng_.bernoulli(config_.carpet_escape_probability);
            else
                out.recovered = rng_.bernoulli(1.0 - hazard(edge.id, clock_));
            break;
    }
    if (out.recovered) pending_failure_ = false;
    return out;
}

double SimWorld::abandon_edge(const topo::TopoEdge& edge, double progress) {
    const double dt = std::clamp(progress, 0.0, 1.0) * edge.nominal_duration();
    move_clock(dt, false);
    location_ = {edge.source, std::nullopt, 0.0};
    pending_failure_ = false;
    return dt;
}

bool SimWorld::sample_interaction(const NodeId& node) {
    return rng_.bernoulli(interaction_propensity(node, clock_));
}

bool SimWorld::sample_task_hang() { return rng_.bernoulli(config_.task_hang_probability); }

void SimWorld::reset_to_dock() {
    location_ = {map_.dock(), std::nullopt, 0.0};
    pending_failure_ = false;
    depleted_ = false;
}

DayEvents SimWorld::sample_day_events(int day) {
    DayEvents events;
    const double day_start = day * kDay;
    for (const auto& c : config_.components) {
        if (c.crash_rate_per_day <= 0.0) continue;
        const double rate = c.crash_rate_per_day / kDay;
        for (double t = day_start + rng_.exponential(rate); t < day_start + kDay; t += rng_.exponential(rate))
            events.crashes.push_back({t, c.name});
    }
    std::stable_sort(events.crashes.begin(), events.crashes.end(),
                     [](const CrashEvent& a, const CrashEvent& b) { return a.t < b.t; });

    const double w0 = day_start + config_.autonomy_start_h * kHour;
    const double w1 = day_start + config_.autonomy_end_h * kHour;
    std::vector<std::pair<double, activity::Trajectory>> walks;
    for (const auto& tpl : config_.trajectory_templates) {
        if (tpl.per_day <= 0.0) continue;
        const double rate = tpl.per_day / (w1 - w0);
        for (double start = w0 + rng_.exponential(rate); start < w1; start += rng_.exponential(rate)) {
            std::vector<activity::Point2> path;
            for (const auto& p : tpl.waypoints)
                path.push_back({p.x + tpl.waypoint_jitter * rng_.normal(), p.y + tpl.waypoint_jitter * rng_.normal()});
            const double speed = std::max(0.2, tpl.speed + tpl.speed_sd * rng_.normal());
            std::vector<activity::TimedPoint> poses;
            double t = start;
            const double step = speed * tpl.sample_dt;
            std::size_t seg = 0;
            activity::Point2 pos = path[0];
            poses.push_back({t, pos.x + tpl.pose_noise * rng_.normal(), pos.y + tpl.pose_noise * rng_.normal()});
            while (seg + 1 < path.size()) {
                double left = step;
                while (seg + 1 < path.size()) {
                    const auto& nxt = path[seg + 1];
                    const double d = std::hypot(nxt.x - pos.x, nxt.y - pos.y);
                    if (d > left) {
                        pos.x += (nxt.x - pos.x) * left / d;
                        pos.y += (nxt.y - pos.y) * left / d;
                        left = 0.0;
                        break;
                    }
                    left -= d;
                    pos = nxt;
                    ++seg;
                }
                t += tpl.sample_dt;
                poses.push_back({t, pos.x + tpl.pose_noise * rng_.normal(), pos.y + tpl.pose_noise * rng_.normal()});
            }
            const std::string id = "traj-" + std::to_string(trajectory_counter_++);
            try {
                walks.emplace_back(start, activity::Trajectory(id, std::move(poses), tpl.name));
            } catch (const ValidationError&) {
                // A walk collapsed to zero length by jitter is not observable.
            }
        }
    }
    std::stable_sort(walks.begin(), walks.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& w : walks) events.trajectories.push_back(std::move(w.second));
    return events;
}

}  // namespace lta::sim
