#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lta/fremen.hpp"
#include "lta/topomap.hpp"

namespace lta::nav {

using topo::EdgeId;
using topo::NodeId;

enum class TraversalOutcome { Success, RecoveredFailure, FatalFailure };

std::string to_string(TraversalOutcome o);
TraversalOutcome traversal_outcome_from_string(const std::string& s);

struct EdgeStatsOptions {
    fremen::FremenOptions fremen = fremen::FremenOptions::defaults();
    double recovery_prior_s = 30.0;
    double fatal_prior = 0.05;
    double fatal_pseudo_count = 5.0;
};

/// Learned statistics for one edge.
struct EdgeStat {
    fremen::FremenModel success_model;
    double duration_mean = 0.0;  // successful traversals only
    std::size_t duration_count = 0;
    double recovery_mean = 0.0;  // time lost to recovered failures
    std::size_t recovery_count = 0;
    std::size_t failure_count = 0;
    std::size_t fatal_count = 0;
};

class EdgeStats {
public:
    EdgeStats() = default;
    EdgeStats(const topo::TopoMap& map, EdgeStatsOptions options = {});

    const EdgeStatsOptions& options() const { return options_; }
    const std::map<EdgeId, EdgeStat>& entries() const { return stats_; }
    const EdgeStat& at(const EdgeId& edge) const;
    bool contains(const EdgeId& edge) const { return stats_.count(edge) != 0; }

    /// r_e: mean recovery time, or the prior before any recovered failure.
    double recovery_cost(const EdgeId& edge) const;
    /// kappa_e = (fatal + prior * pseudo) / (failures + pseudo).
    double fatal_fraction(const EdgeId& edge) const;

    /// Success model gains (t, outcome == Success). `duration` is the traversal
    /// time for a success and the time lost recovering for a recovered failure.
    void record_traversal(const EdgeId& edge, double t, TraversalOutcome outcome, double duration);

    /// Rebuilds every success model that has observations.
    void rebuild();
    bool any_stale() const;

private:
    EdgeStatsOptions options_;
    std::map<EdgeId, EdgeStat> stats_;
};

Json to_json(const EdgeStats& stats);

struct NavAction {
    EdgeId edge;
    std::size_t from = 0;
    std::size_t to = 0;
    double p_success = 0.0;
    double duration = 0.0;
    double recovery_cost = 0.0;
    double fatal_fraction = 0.0;

    double p_target() const { return p_success; }
    double p_stay() const { return (1.0 - p_success) * (1.0 - fatal_fraction); }
    double p_fatal() const { return (1.0 - p_success) * fatal_fraction; }
};

/// Stationary snapshot of the navigation MDP at one query time. State
/// `nodes.size()` is the absorbing FATAL state.
struct NavMdp {
    std::vector<NodeId> nodes;
    std::vector<std::vector<NavAction>> actions;  // per node, ordered by edge id
    double fatal_cost = 0.0;
    double query_time = 0.0;

    std::size_t fatal_state() const { return nodes.size(); }
    std::size_t index(const NodeId& id) const;
    double expected_step_cost(const NavAction& a) const {
        return a.p_target() * a.duration + a.p_stay() * a.recovery_cost + a.p_fatal() * fatal_cost;
    }
};

/// Default scalarisation of a fatal failure: 100x the summed nominal durations.
double default_fatal_cost(const topo::TopoMap& map);

NavMdp build_mdp(const topo::TopoMap& map, const EdgeStats& stats, double t,
                 std::optional<double> fatal_cost = std::nullopt);

struct SolveOptions {
    double tolerance_s = 1e-6;
    int max_sweeps = 10000;
};

struct NavPolicy {
    NodeId goal;
    std::vector<NodeId> nodes;
    std::vector<std::optional<EdgeId>> choice;
    Eigen::VectorXd value;          // V: expected cost-to-go, +inf when unreachable
    Eigen::VectorXd success;        // S: probability of reaching the goal before FATAL
    Eigen::VectorXd expected_time;  // expected seconds to stop, ignoring the fatal penalty
    int sweeps = 0;
    double residual = 0.0;

    std::size_t index(const NodeId& id) const;
    const std::optional<EdgeId>& chosen(const NodeId& id) const { return choice[index(id)]; }
    double V(const NodeId& id) const { return value[static_cast<Eigen::Index>(index(id))]; }
    double S(const NodeId& id) const { return success[static_cast<Eigen::Index>(index(id))]; }
    double T(const NodeId& id) const { return expected_time[static_cast<Eigen::Index>(index(id))]; }
};

NavPolicy solve(const NavMdp& mdp, const NodeId& goal, const SolveOptions& options = {});

/// Exact (V, S, T) of a fixed choice of action per node (index into
/// mdp.actions[u], or -1 for none) via absorbing-chain algebra.
struct PolicyEvaluation {
    Eigen::VectorXd value;
    Eigen::VectorXd success;
    Eigen::VectorXd expected_time;
};
PolicyEvaluation evaluate_policy(const NavMdp& mdp, std::size_t goal, const std::vector<int>& choice);

void write_policy_csv(const NavPolicy& policy, std::ostream& out);

}  // namespace lta::nav
