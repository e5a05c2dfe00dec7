#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lta/json_util.hpp"

namespace lta::topo {

using NodeId = std::string;
using EdgeId = std::string;

/// Pose in the fixed metric frame. theta is kept in (-pi, pi].
struct MetricPose {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    MetricPose() = default;
    MetricPose(double x_, double y_, double theta_);

    friend bool operator==(const MetricPose&, const MetricPose&) = default;
};

double normalize_angle(double theta);

enum class NodeTag { Dock, DoorSide, Desk, TerminalSpot, Plain };
enum class EdgeAction { MoveBase, DoorPass, Dock, Undock, HumanAware };

std::string to_string(NodeTag tag);
std::string to_string(EdgeAction action);
NodeTag node_tag_from_string(const std::string& s);
EdgeAction edge_action_from_string(const std::string& s);

struct TopoNode {
    NodeId id;
    std::string label;
    MetricPose pose;
    double influence_radius = 1.0;
    std::set<NodeTag> tags;

    bool has_tag(NodeTag t) const { return tags.count(t) != 0; }
    friend bool operator==(const TopoNode&, const TopoNode&) = default;
};

struct TopoEdge {
    EdgeId id;
    NodeId source;
    NodeId target;
    EdgeAction action = EdgeAction::MoveBase;
    double nominal_length = 0.0;
    double nominal_speed = 1.0;
    bool enabled = true;

    double nominal_duration() const { return nominal_length / nominal_speed; }
    friend bool operator==(const TopoEdge&, const TopoEdge&) = default;
};

struct Route {
    std::vector<EdgeId> edges;
    double duration = 0.0;
};

/// Directed topological map. Immutable once constructed; the gating helpers
/// return modified copies.
class TopoMap {
public:
    /// Validates and takes ownership. Throws ValidationError naming the offending element.
    TopoMap(std::vector<TopoNode> nodes, std::vector<TopoEdge> edges);

    const std::vector<TopoNode>& nodes() const { return nodes_; }
    const std::vector<TopoEdge>& edges() const { return edges_; }

    bool has_node(const NodeId& id) const { return node_index_.count(id) != 0; }
    bool has_edge(const EdgeId& id) const { return edge_index_.count(id) != 0; }
    const TopoNode& node(const NodeId& id) const;
    const TopoEdge& edge(const EdgeId& id) const;
    std::size_t node_index(const NodeId& id) const;

    const NodeId& dock() const { return dock_; }

    /// Enabled out-edges of `node`, ordered by edge id.
    std::vector<const TopoEdge*> neighbors(const NodeId& node) const;

    /// Shortest route over enabled edges weighted by nominal duration.
    Route nominal_route(const NodeId& from, const NodeId& to) const;

    /// Sum of nominal durations of every edge (enabled or not).
    double total_nominal_duration() const;

    TopoMap with_edge_enabled(const EdgeId& id, bool enabled) const;
    /// Gates every edge touching `node`.
    TopoMap with_node_enabled(const NodeId& node, bool enabled) const;

    /// Metric position at `progress` in [0,1] along the straight segment of an edge.
    MetricPose interpolate(const TopoEdge& edge, double progress) const;

    friend bool operator==(const TopoMap& a, const TopoMap& b) {
        return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
    }

private:
    struct SkipConnectivity {};
    TopoMap(std::vector<TopoNode> nodes, std::vector<TopoEdge> edges, SkipConnectivity);
    void index_and_check_references();
    void check_connectivity() const;

    std::vector<TopoNode> nodes_;
    std::vector<TopoEdge> edges_;
    std::map<NodeId, std::size_t> node_index_;
    std::map<EdgeId, std::size_t> edge_index_;
    NodeId dock_;
};

TopoMap map_from_json(const Json& doc);
Json map_to_json(const TopoMap& map);

TopoMap load_map(std::istream& in);
TopoMap load_map_file(const std::string& path);
void save_map(const TopoMap& map, std::ostream& out);

}  // namespace lta::topo
