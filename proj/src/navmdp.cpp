#include "lta/navmdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "lta/absorbing_chain.hpp"
#include "lta/error.hpp"

namespace lta::nav {

namespace {
constexpr double kMinCost = 1e-3;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

std::string to_string(TraversalOutcome o) {
    switch (o) {
        case TraversalOutcome::Success: return "success";
        case TraversalOutcome::RecoveredFailure: return "recovered_failure";
        case TraversalOutcome::FatalFailure: return "fatal_failure";
    }
    return "success";
}

TraversalOutcome traversal_outcome_from_string(const std::string& s) {
    if (s == "success") return TraversalOutcome::Success;
    if (s == "recovered_failure") return TraversalOutcome::RecoveredFailure;
    if (s == "fatal_failure") return TraversalOutcome::FatalFailure;
    throw ValidationError("unknown traversal outcome '" + s + "'");
}

EdgeStats::EdgeStats(const topo::TopoMap& map, EdgeStatsOptions options) : options_(std::move(options)) {
    for (const auto& e : map.edges()) stats_.emplace(e.id, EdgeStat{fremen::FremenModel(options_.fremen)});
}

const EdgeStat& EdgeStats::at(const EdgeId& edge) const {
    auto it = stats_.find(edge);
    if (it == stats_.end()) throw NotFoundError("edge stats: unknown edge '" + edge + "'");
    return it->second;
}

double EdgeStats::recovery_cost(const EdgeId& edge) const {
    const auto& s = at(edge);
    return s.recovery_count > 0 ? s.recovery_mean : options_.recovery_prior_s;
}

double EdgeStats::fatal_fraction(const EdgeId& edge) const {
    const auto& s = at(edge);
    return (static_cast<double>(s.fatal_count) + options_.fatal_prior * options_.fatal_pseudo_count) /
           (static_cast<double>(s.failure_count) + options_.fatal_pseudo_count);
}

void EdgeStats::record_traversal(const EdgeId& edge, double t, TraversalOutcome outcome, double duration) {
    auto it = stats_.find(edge);
    if (it == stats_.end()) throw NotFoundError("edge stats: unknown edge '" + edge + "'");
    if (!(duration >= 0.0)) throw ValidationError("edge stats: duration must be >= 0");
    auto& s = it->second;
    s.success_model.add_observation(t, outcome == TraversalOutcome::Success);
    switch (outcome) {
        case TraversalOutcome::Success:
            ++s.duration_count;
            s.duration_mean += (duration - s.duration_mean) / static_cast<double>(s.duration_count);
            break;
        case TraversalOutcome::RecoveredFailure:
            ++s.failure_count;
            ++s.recovery_count;
            s.recovery_mean += (duration - s.recovery_mean) / static_cast<double>(s.recovery_count);
            break;
        case TraversalOutcome::FatalFailure:
            ++s.failure_count;
            ++s.fatal_count;
            break;
    }
}

void EdgeStats::rebuild() {
    for (auto& [id, s] : stats_)
        if (!s.success_model.empty()) s.success_model.rebuild();
}

bool EdgeStats::any_stale() const {
    return std::any_of(stats_.begin(), stats_.end(), [](const auto& kv) { return kv.second.success_model.stale(); });
}

Json to_json(const EdgeStats& stats) {
    Json out = Json::object();
    for (const auto& [id, s] : stats.entries()) {
        out[id] = {{"success_model", fremen::to_json(s.success_model)},
                   {"duration_mean", s.duration_mean},
                   {"duration_count", s.duration_count},
                   {"recovery_mean", s.recovery_mean},
                   {"recovery_count", s.recovery_count},
                   {"recovery_cost", stats.recovery_cost(id)},
                   {"failure_count", s.failure_count},
                   {"fatal_count", s.fatal_count},
                   {"fatal_fraction", stats.fatal_fraction(id)}};
    }
    return out;
}

std::size_t NavMdp::index(const NodeId& id) const {
    auto it = std::find(nodes.begin(), nodes.end(), id);
    if (it == nodes.end()) throw NotFoundError("mdp: unknown node '" + id + "'");
    return static_cast<std::size_t>(it - nodes.begin());
}

std::size_t NavPolicy::index(const NodeId& id) const {
    auto it = std::find(nodes.begin(), nodes.end(), id);
    if (it == nodes.end()) throw NotFoundError("policy: unknown node '" + id + "'");
    return static_cast<std::size_t>(it - nodes.begin());
}

double default_fatal_cost(const topo::TopoMap& map) {
    return std::max(1.0, 100.0 * map.total_nominal_duration());
}

NavMdp build_mdp(const topo::TopoMap& map, const EdgeStats& stats, double t, std::optional<double> fatal_cost) {
    NavMdp mdp;
    mdp.query_time = t;
    mdp.fatal_cost = fatal_cost.value_or(default_fatal_cost(map));
    if (!(mdp.fatal_cost > 0.0) || !std::isfinite(mdp.fatal_cost))
        throw ValidationError("mdp: fatal cost must be positive and finite");
    for (const auto& n : map.nodes()) mdp.nodes.push_back(n.id);
    mdp.actions.resize(mdp.nodes.size());

    for (std::size_t u = 0; u < mdp.nodes.size(); ++u) {
        for (const auto* e : map.neighbors(mdp.nodes[u])) {
            const auto& s = stats.at(e->id);
            NavAction a;
            a.edge = e->id;
            a.from = u;
            a.to = map.node_index(e->target);
            if (s.success_model.empty()) {
                const double eps = s.success_model.options().epsilon;
                a.p_success = std::clamp(0.5, eps, 1.0 - eps);
            } else {
                a.p_success = s.success_model.predict(t).p;  // throws when stale
            }
            a.duration = std::max(kMinCost, s.duration_count > 0 ? s.duration_mean : e->nominal_duration());
            a.recovery_cost = std::max(kMinCost, stats.recovery_cost(e->id));
            a.fatal_fraction = std::clamp(stats.fatal_fraction(e->id), 0.0, 1.0);
            mdp.actions[u].push_back(std::move(a));
        }
    }
    return mdp;
}

PolicyEvaluation evaluate_policy(const NavMdp& mdp, std::size_t goal, const std::vector<int>& choice) {
    // Transient block over the map nodes. The goal leaks out with certainty
    // (zero row, unit exit reward); FATAL is the remaining leaked mass; a
    // non-goal node without an action is a trap (unit self-loop).
    const auto n = static_cast<Eigen::Index>(mdp.nodes.size());
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd time = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd exit_to_goal = Eigen::VectorXd::Zero(n);
    for (Eigen::Index u = 0; u < n; ++u) {
        const auto uu = static_cast<std::size_t>(u);
        if (uu == goal) {
            exit_to_goal[u] = 1.0;
            continue;
        }
        if (choice[uu] < 0) {
            Q(u, u) = 1.0;
            continue;
        }
        const auto& a = mdp.actions[uu][static_cast<std::size_t>(choice[uu])];
        cost[u] = mdp.expected_step_cost(a);
        time[u] = a.p_target() * a.duration + a.p_stay() * a.recovery_cost;
        Q(u, u) += a.p_stay();
        Q(u, static_cast<Eigen::Index>(a.to)) += a.p_target();
    }
    PolicyEvaluation ev;
    ev.value = expected_absorption_cost<double>(Q, cost);
    ev.expected_time = expected_absorption_cost<double>(Q, time);
    ev.success = absorption_probability<double>(Q, exit_to_goal);
    return ev;
}

NavPolicy solve(const NavMdp& mdp, const NodeId& goal_id, const SolveOptions& options) {
    const std::size_t n = mdp.nodes.size();
    const std::size_t goal = mdp.index(goal_id);

    // Nodes from which the goal is reachable over MDP actions.
    std::vector<bool> reaches(n, false);
    reaches[goal] = true;
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t u = 0; u < n; ++u) {
            if (reaches[u]) continue;
            for (const auto& a : mdp.actions[u])
                if (reaches[a.to]) {
                    reaches[u] = changed = true;
                    break;
                }
        }
    }

    // Gauss-Seidel value iteration with each action's self-loop solved in closed form:
    // V(u) = min_e (c_e + p_e V(v)) / (1 - q_e).
    std::vector<double> V(n, 0.0);
    auto q_value = [&](const NavAction& a) {
        return (mdp.expected_step_cost(a) + a.p_target() * V[a.to]) / (1.0 - a.p_stay());
    };
    double residual = kInf;
    int sweeps = 0;
    while (sweeps < options.max_sweeps) {
        ++sweeps;
        residual = 0.0;
        for (std::size_t u = 0; u < n; ++u) {
            if (u == goal || !reaches[u]) continue;
            double best = kInf;
            for (const auto& a : mdp.actions[u])
                if (reaches[a.to]) best = std::min(best, q_value(a));
            residual = std::max(residual, std::abs(best - V[u]));
            V[u] = best;
        }
        if (residual < options.tolerance_s) break;
    }
    if (!(residual < options.tolerance_s))
        throw ConvergenceError("value iteration did not converge within " + std::to_string(options.max_sweeps) +
                                   " sweeps (residual " + std::to_string(residual) + " s)",
                               residual);

    NavPolicy policy;
    policy.goal = goal_id;
    policy.nodes = mdp.nodes;
    policy.choice.assign(n, std::nullopt);
    policy.sweeps = sweeps;
    policy.residual = residual;
    std::vector<int> choice(n, -1);
    for (std::size_t u = 0; u < n; ++u) {
        if (u == goal || !reaches[u]) continue;
        double best = kInf;
        for (std::size_t k = 0; k < mdp.actions[u].size(); ++k) {
            const auto& a = mdp.actions[u][k];
            if (!reaches[a.to]) continue;
            const double q = q_value(a);
            // Actions are ordered by edge id, so strict improvement keeps the smaller id on ties.
            if (choice[u] < 0 || q < best - 1e-12 * std::max(1.0, std::abs(best))) {
                best = q;
                choice[u] = static_cast<int>(k);
            }
        }
        if (choice[u] >= 0) policy.choice[u] = mdp.actions[u][static_cast<std::size_t>(choice[u])].edge;
    }

    auto ev = evaluate_policy(mdp, goal, choice);
    policy.value = std::move(ev.value);
    policy.success = std::move(ev.success);
    policy.expected_time = std::move(ev.expected_time);
    return policy;
}

void write_policy_csv(const NavPolicy& policy, std::ostream& out) {
    out << "node,chosen_edge,V_seconds,S\n";
    out.precision(17);
    for (std::size_t u = 0; u < policy.nodes.size(); ++u) {
        const auto i = static_cast<Eigen::Index>(u);
        out << policy.nodes[u] << ',' << policy.choice[u].value_or("") << ',';
        if (std::isfinite(policy.value[i]))
            out << policy.value[i];
        else
            out << "inf";
        out << ',' << policy.success[i] << '\n';
    }
}

}  // namespace lta::nav
