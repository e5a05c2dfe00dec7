#include "lta/scenario.hpp"

#include <fstream>

#include "lta/error.hpp"

namespace lta::scenario {

namespace {

TaskSpec task_from_json(const Json& doc) {
    StrictObject o(doc, "task");
    TaskSpec spec;
    auto& t = spec.task;
    t.id = o.get<std::string>("id");
    t.kind = exec::task_kind_from_string(o.get<std::string>("kind"));
    t.node = o.get<std::string>("node");
    t.max_duration = o.get<double>("max_duration_s");
    const auto window = o.get<std::vector<double>>("window");
    if (window.size() != 2) throw ValidationError("task '" + t.id + "': window must be [start, end]");
    t.window = {window[0], window[1]};
    t.priority = o.get_or<int>("priority", 0);
    const bool maintenance_kind = t.kind == exec::TaskKind::ActivityBatchLearn || t.kind == exec::TaskKind::DbBackup ||
                                  t.kind == exec::TaskKind::Charge;
    t.maintenance = o.get_or<bool>("maintenance", maintenance_kind);
    t.work_s = o.get_or<double>("work_s", 0.5 * t.max_duration);
    const auto repeat = o.get_or<std::string>("repeat", "daily");
    if (repeat == "daily")
        spec.repeat = Repeat::Daily;
    else if (repeat == "once")
        spec.repeat = Repeat::Once;
    else
        throw ValidationError("task '" + t.id + "': repeat must be daily or once");
    o.finish();
    t.validate();
    if (spec.repeat == Repeat::Daily && (t.window.earliest_start < 0.0 || t.window.latest_end > sim::kDay))
        throw ValidationError("task '" + t.id + "': a daily window must lie within one day");
    return spec;
}

void parse_fremen(StrictObject& o, fremen::FremenOptions& f) {
    f.order = o.get_or<int>("fremen_order", f.order);
    f.epsilon = o.get_or<double>("fremen_epsilon", f.epsilon);
    if (const Json* v = o.optional("fremen_periods_h")) {
        f.periods_s.clear();
        for (double h : v->get<std::vector<double>>()) f.periods_s.push_back(h * 3600.0);
    }
}

recovery::ClassPlan class_plan_from_json(const Json& doc, const std::string& context) {
    StrictObject o(doc, context);
    recovery::ClassPlan plan;
    for (const auto& item : o.require("sequence")) {
        StrictObject b(item, context + " behavior");
        recovery::RecoveryBehavior rb;
        rb.kind = recovery::behavior_from_string(b.get<std::string>("behavior"));
        rb.duration_s = b.get_or<double>("duration_s", 0.0);
        rb.max_requests = b.get_or<int>("max_requests", 0);
        b.finish();
        plan.sequence.push_back(rb);
    }
    plan.repeat_last = o.get_or<bool>("repeat_last", false);
    o.finish();
    return plan;
}

}  // namespace

std::string to_string(Variant v) {
    switch (v) {
        case Variant::Adaptive: return "adaptive";
        case Variant::StaticNav: return "static_nav";
        case Variant::UniformInfo: return "uniform_info";
    }
    return "adaptive";
}

Variant variant_from_string(const std::string& s) {
    if (s == "adaptive") return Variant::Adaptive;
    if (s == "static_nav") return Variant::StaticNav;
    if (s == "uniform_info") return Variant::UniformInfo;
    throw ValidationError("unknown variant '" + s + "' (expected adaptive, static_nav or uniform_info)");
}

Scenario scenario_from_json(const Json& doc, const std::filesystem::path& base_dir) {
    StrictObject o(doc, "scenario");
    const auto seed = o.get<std::uint64_t>("seed");
    const auto horizon = o.get<int>("horizon_days");
    if (horizon < 1) throw ValidationError("scenario: horizon_days must be >= 1");

    const Json& map_doc = o.require("map");
    std::optional<topo::TopoMap> map;
    if (map_doc.is_string()) {
        auto p = std::filesystem::path(map_doc.get<std::string>());
        if (p.is_relative()) p = base_dir / p;
        map = topo::load_map_file(p.string());
    } else {
        map = topo::map_from_json(map_doc);
    }

    Scenario sc{seed, horizon, *map, {}, {}, {}, {}, {}, {}, Variant::Adaptive};
    if (const Json* v = o.optional("world")) sc.world = sim::world_config_from_json(*v);
    sc.world.validate(sc.map);

    if (const Json* v = o.optional("tasks"))
        for (const auto& item : *v) {
            auto spec = task_from_json(item);
            if (!sc.map.has_node(spec.task.node))
                throw ValidationError("task '" + spec.task.id + "': unknown node '" + spec.task.node + "'");
            for (const auto& other : sc.tasks)
                if (other.task.id == spec.task.id) throw ValidationError("duplicate task id '" + spec.task.id + "'");
            sc.tasks.push_back(std::move(spec));
        }

    if (const Json* v = o.optional("info_terminal")) {
        StrictObject i(*v, "info_terminal");
        auto& c = sc.info;
        c.enabled = i.get_or<bool>("enabled", true);
        c.visits_per_day = i.get_or<int>("visits_per_day", c.visits_per_day);
        c.beta = i.get_or<double>("beta", c.beta);
        c.slot_s = i.get_or<double>("slot_s", c.slot_s);
        c.max_duration_s = i.get_or<double>("max_duration_s", c.max_duration_s);
        c.priority = i.get_or<int>("priority", c.priority);
        i.finish();
        if (!(c.beta >= 0.0 && c.beta <= 1.0)) throw ValidationError("info_terminal: beta must lie in [0, 1]");
        if (!(c.slot_s > 0.0) || c.max_duration_s > c.slot_s || c.max_duration_s < 0.0)
            throw ValidationError("info_terminal: need 0 <= max_duration_s <= slot_s");
        if (c.visits_per_day < 0) throw ValidationError("info_terminal: visits_per_day must be >= 0");
    }

    if (const Json* v = o.optional("activity")) {
        StrictObject a(*v, "activity");
        auto& c = sc.activity;
        c.enabled = a.get_or<bool>("enabled", true);
        c.max_training = a.get_or<std::size_t>("max_training", c.max_training);
        c.encoder.displacement_threshold = a.get_or<double>("displacement_threshold", c.encoder.displacement_threshold);
        c.encoder.near_threshold_m = a.get_or<double>("near_threshold_m", c.encoder.near_threshold_m);
        c.encoder.radial_speed_threshold = a.get_or<double>("radial_speed_threshold", c.encoder.radial_speed_threshold);
        c.cluster.k_min = a.get_or<int>("k_min", c.cluster.k_min);
        c.cluster.k_max = a.get_or<int>("k_max", c.cluster.k_max);
        c.cluster.restarts = a.get_or<int>("restarts", c.cluster.restarts);
        c.cluster.max_iterations = a.get_or<int>("max_iterations", c.cluster.max_iterations);
        c.cluster.novelty_percentile = a.get_or<double>("novelty_percentile", c.cluster.novelty_percentile);
        c.prefix_fraction = a.get_or<double>("prefix_fraction", c.prefix_fraction);
        c.identity_node = a.get_or<std::string>("identity_node", c.identity_node);
        c.identity_per_day = a.get_or<int>("identity_per_day", c.identity_per_day);
        c.identity_window_s = a.get_or<double>("identity_window_s", c.identity_window_s);
        c.identity_max_duration_s = a.get_or<double>("identity_max_duration_s", c.identity_max_duration_s);
        c.identity_priority = a.get_or<int>("identity_priority", c.identity_priority);
        a.finish();
        if (!c.identity_node.empty() && !sc.map.has_node(c.identity_node))
            throw ValidationError("activity: unknown identity_node '" + c.identity_node + "'");
        if (c.cluster.k_min < 1 || c.cluster.k_max < c.cluster.k_min)
            throw ValidationError("activity: need 1 <= k_min <= k_max");
        if (!(c.prefix_fraction > 0.0 && c.prefix_fraction <= 1.0))
            throw ValidationError("activity: prefix_fraction must lie in (0, 1]");
        if (c.identity_max_duration_s > c.identity_window_s)
            throw ValidationError("activity: identity_max_duration_s exceeds identity_window_s");
    }

    if (const Json* v = o.optional("executive")) {
        StrictObject e(*v, "executive");
        auto& c = sc.executive;
        c.battery.reserve = e.get_or<double>("battery_reserve", c.battery.reserve);
        c.battery.safety_margin_s = e.get_or<double>("safety_margin_s", c.battery.safety_margin_s);
        c.battery.charge_complete = e.get_or<double>("charge_complete", c.battery.charge_complete);
        c.max_crashes_per_day = e.get_or<int>("max_crashes_per_day", c.max_crashes_per_day);
        c.restart_delay_s = e.get_or<double>("restart_delay_s", c.restart_delay_s);
        c.idle_return_s = e.get_or<double>("idle_return_s", c.idle_return_s);
        c.dispatch_slack_s = e.get_or<double>("dispatch_slack_s", c.dispatch_slack_s);
        c.expert_intervention_after = e.get_or<int>("expert_intervention_after", c.expert_intervention_after);
        c.count_travel_as_active = e.get_or<bool>("count_travel_as_active", c.count_travel_as_active);
        e.finish();
        if (!(c.battery.reserve >= 0.0 && c.battery.reserve < c.battery.charge_complete &&
              c.battery.charge_complete <= 1.0))
            throw ValidationError("executive: need 0 <= battery_reserve < charge_complete <= 1");
        if (c.restart_delay_s < 0.0 || c.idle_return_s < 0.0 || c.dispatch_slack_s < 0.0)
            throw ValidationError("executive: delays must be >= 0");
    }

    if (const Json* v = o.optional("navigation")) {
        StrictObject n(*v, "navigation");
        auto& c = sc.navigation;
        parse_fremen(n, c.edges.fremen);
        c.edges.recovery_prior_s = n.get_or<double>("recovery_prior_s", c.edges.recovery_prior_s);
        c.edges.fatal_prior = n.get_or<double>("fatal_prior", c.edges.fatal_prior);
        c.edges.fatal_pseudo_count = n.get_or<double>("fatal_pseudo_count", c.edges.fatal_pseudo_count);
        if (const Json* f = n.optional("fatal_cost")) c.fatal_cost = f->get<double>();
        c.solve.tolerance_s = n.get_or<double>("tolerance_s", c.solve.tolerance_s);
        c.solve.max_sweeps = n.get_or<int>("max_sweeps", c.solve.max_sweeps);
        if (const Json* r = n.optional("recovery")) {
            StrictObject rp(*r, "navigation recovery");
            for (auto cls : recovery::kFailureClasses)
                if (const Json* p = rp.optional(recovery::to_string(cls)))
                    c.recovery.plans[cls] = class_plan_from_json(*p, "recovery list " + recovery::to_string(cls));
            c.recovery.carpet_exhaustion_to_nav_fail =
                rp.get_or<bool>("carpet_exhaustion_to_nav_fail", c.recovery.carpet_exhaustion_to_nav_fail);
            rp.finish();
        }
        n.finish();
        c.recovery.validate();
        fremen::FremenModel probe(c.edges.fremen);
    }

    if (const Json* v = o.optional("variant")) sc.variant = variant_from_string(v->get<std::string>());
    o.finish();
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open scenario '" + path.string() + "'");
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("scenario '" + path.string() + "': " + e.what());
    }
    return scenario_from_json(doc, path.parent_path());
}

}  // namespace lta::scenario
