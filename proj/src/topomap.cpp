#include "lta/topomap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

#include "lta/error.hpp"

namespace lta::topo {

double normalize_angle(double theta) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double t = std::fmod(theta, two_pi);
    if (t <= -std::numbers::pi) t += two_pi;
    if (t > std::numbers::pi) t -= two_pi;
    return t;
}

MetricPose::MetricPose(double x_, double y_, double theta_)
    : x(x_), y(y_), theta(normalize_angle(theta_)) {
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(theta_))
        throw ValidationError("pose coordinates must be finite");
}

std::string to_string(NodeTag tag) {
    switch (tag) {
        case NodeTag::Dock: return "dock";
        case NodeTag::DoorSide: return "door_side";
        case NodeTag::Desk: return "desk";
        case NodeTag::TerminalSpot: return "terminal_spot";
        case NodeTag::Plain: return "plain";
    }
    return "plain";
}

std::string to_string(EdgeAction action) {
    switch (action) {
        case EdgeAction::MoveBase: return "move_base";
        case EdgeAction::DoorPass: return "door_pass";
        case EdgeAction::Dock: return "dock";
        case EdgeAction::Undock: return "undock";
        case EdgeAction::HumanAware: return "human_aware";
    }
    return "move_base";
}

NodeTag node_tag_from_string(const std::string& s) {
    if (s == "dock") return NodeTag::Dock;
    if (s == "door_side") return NodeTag::DoorSide;
    if (s == "desk") return NodeTag::Desk;
    if (s == "terminal_spot") return NodeTag::TerminalSpot;
    if (s == "plain") return NodeTag::Plain;
    throw ValidationError("unknown node tag '" + s + "'");
}

EdgeAction edge_action_from_string(const std::string& s) {
    if (s == "move_base") return EdgeAction::MoveBase;
    if (s == "door_pass") return EdgeAction::DoorPass;
    if (s == "dock") return EdgeAction::Dock;
    if (s == "undock") return EdgeAction::Undock;
    if (s == "human_aware") return EdgeAction::HumanAware;
    throw ValidationError("unknown edge action '" + s + "'");
}

TopoMap::TopoMap(std::vector<TopoNode> nodes, std::vector<TopoEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    index_and_check_references();
    check_connectivity();
}

TopoMap::TopoMap(std::vector<TopoNode> nodes, std::vector<TopoEdge> edges, SkipConnectivity)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    index_and_check_references();
}

void TopoMap::index_and_check_references() {
    std::vector<NodeId> docks;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        if (n.id.empty()) throw ValidationError("node with empty id");
        if (!node_index_.emplace(n.id, i).second)
            throw ValidationError("duplicate node id '" + n.id + "'");
        if (!(n.influence_radius > 0.0) || !std::isfinite(n.influence_radius))
            throw ValidationError("node '" + n.id + "': influence_radius must be > 0");
        if (n.has_tag(NodeTag::Dock)) docks.push_back(n.id);
    }
    if (docks.empty()) throw ValidationError("map has no node tagged dock");
    if (docks.size() > 1)
        throw ValidationError("map has more than one dock node: '" + docks[0] + "', '" + docks[1] + "'");
    dock_ = docks.front();

    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const auto& e = edges_[i];
        if (e.id.empty()) throw ValidationError("edge with empty id");
        if (!edge_index_.emplace(e.id, i).second)
            throw ValidationError("duplicate edge id '" + e.id + "'");
        if (!node_index_.count(e.source))
            throw ValidationError("edge '" + e.id + "' references missing node '" + e.source + "'");
        if (!node_index_.count(e.target))
            throw ValidationError("edge '" + e.id + "' references missing node '" + e.target + "'");
        if (e.source == e.target)
            throw ValidationError("edge '" + e.id + "' is a self-loop on '" + e.source + "'");
        if (!(e.nominal_length >= 0.0) || !std::isfinite(e.nominal_length))
            throw ValidationError("edge '" + e.id + "': nominal_length must be >= 0");
        if (!(e.nominal_speed > 0.0) || !std::isfinite(e.nominal_speed))
            throw ValidationError("edge '" + e.id + "': nominal_speed must be > 0");
        if ((e.action == EdgeAction::Dock || e.action == EdgeAction::Undock) &&
            e.source != dock_ && e.target != dock_)
            throw ValidationError("edge '" + e.id + "': " + to_string(e.action) +
                                  " edge does not touch the dock node '" + dock_ + "'");
    }
}

// Every node carrying an enabled edge must be mutually reachable with the dock.
void TopoMap::check_connectivity() const {
    const std::size_t n = nodes_.size();
    std::vector<std::vector<std::size_t>> fwd(n), bwd(n);
    std::vector<bool> touched(n, false);
    for (const auto& e : edges_) {
        if (!e.enabled) continue;
        const auto s = node_index_.at(e.source), t = node_index_.at(e.target);
        fwd[s].push_back(t);
        bwd[t].push_back(s);
        touched[s] = touched[t] = true;
    }
    auto reach = [&](const std::vector<std::vector<std::size_t>>& adj) {
        std::vector<bool> seen(n, false);
        std::vector<std::size_t> stack{node_index_.at(dock_)};
        seen[stack.back()] = true;
        while (!stack.empty()) {
            auto u = stack.back();
            stack.pop_back();
            for (auto v : adj[u])
                if (!seen[v]) {
                    seen[v] = true;
                    stack.push_back(v);
                }
        }
        return seen;
    };
    const auto from_dock = reach(fwd);
    const auto to_dock = reach(bwd);
    for (std::size_t i = 0; i < n; ++i) {
        if (!touched[i]) continue;
        if (!from_dock[i] || !to_dock[i])
            throw ValidationError("enabled subgraph is not strongly connected: node '" +
                                  nodes_[i].id + "' is disconnected from dock '" + dock_ + "'");
    }
}

const TopoNode& TopoMap::node(const NodeId& id) const {
    auto it = node_index_.find(id);
    if (it == node_index_.end()) throw NotFoundError("unknown node id '" + id + "'");
    return nodes_[it->second];
}

const TopoEdge& TopoMap::edge(const EdgeId& id) const {
    auto it = edge_index_.find(id);
    if (it == edge_index_.end()) throw NotFoundError("unknown edge id '" + id + "'");
    return edges_[it->second];
}

std::size_t TopoMap::node_index(const NodeId& id) const {
    auto it = node_index_.find(id);
    if (it == node_index_.end()) throw NotFoundError("unknown node id '" + id + "'");
    return it->second;
}

std::vector<const TopoEdge*> TopoMap::neighbors(const NodeId& node) const {
    if (!has_node(node)) throw NotFoundError("unknown node id '" + node + "'");
    std::vector<const TopoEdge*> out;
    for (const auto& e : edges_)
        if (e.enabled && e.source == node) out.push_back(&e);
    std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->id < b->id; });
    return out;
}

Route TopoMap::nominal_route(const NodeId& from, const NodeId& to) const {
    const auto src = node_index(from);
    const auto dst = node_index(to);
    if (src == dst) return {};

    const std::size_t n = nodes_.size();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<const TopoEdge*> via(n, nullptr);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist[src] = 0.0;
    queue.emplace(0.0, src);
    while (!queue.empty()) {
        auto [d, u] = queue.top();
        queue.pop();
        if (d > dist[u]) continue;
        for (const auto* e : neighbors(nodes_[u].id)) {
            const auto v = node_index_.at(e->target);
            const double nd = d + e->nominal_duration();
            // Ties prefer the smaller edge id for a stable answer.
            if (nd < dist[v] || (nd == dist[v] && via[v] != nullptr && e->id < via[v]->id)) {
                dist[v] = nd;
                via[v] = e;
                queue.emplace(nd, v);
            }
        }
    }
    if (!std::isfinite(dist[dst]))
        throw NoRouteError("no route from '" + from + "' to '" + to + "' over enabled edges");

    Route route;
    route.duration = dist[dst];
    for (auto v = dst; v != src;) {
        route.edges.push_back(via[v]->id);
        v = node_index_.at(via[v]->source);
    }
    std::reverse(route.edges.begin(), route.edges.end());
    return route;
}

double TopoMap::total_nominal_duration() const {
    double total = 0.0;
    for (const auto& e : edges_) total += e.nominal_duration();
    return total;
}

TopoMap TopoMap::with_edge_enabled(const EdgeId& id, bool enabled) const {
    auto it = edge_index_.find(id);
    if (it == edge_index_.end()) throw NotFoundError("unknown edge id '" + id + "'");
    auto edges = edges_;
    edges[it->second].enabled = enabled;
    return TopoMap(nodes_, std::move(edges), SkipConnectivity{});
}

TopoMap TopoMap::with_node_enabled(const NodeId& node, bool enabled) const {
    if (!has_node(node)) throw NotFoundError("unknown node id '" + node + "'");
    auto edges = edges_;
    for (auto& e : edges)
        if (e.source == node || e.target == node) e.enabled = enabled;
    return TopoMap(nodes_, std::move(edges), SkipConnectivity{});
}

MetricPose TopoMap::interpolate(const TopoEdge& edge, double progress) const {
    const auto& a = node(edge.source).pose;
    const auto& b = node(edge.target).pose;
    const double f = std::clamp(progress, 0.0, 1.0);
    return MetricPose(a.x + f * (b.x - a.x), a.y + f * (b.y - a.y),
                      std::atan2(b.y - a.y, b.x - a.x));
}

TopoMap map_from_json(const Json& doc) {
    StrictObject top(doc, "map");
    const Json& jn = top.require("nodes");
    const Json& je = top.require("edges");
    top.finish();
    if (!jn.is_array() || !je.is_array()) throw ValidationError("map: 'nodes' and 'edges' must be arrays");

    std::vector<TopoNode> nodes;
    for (const auto& item : jn) {
        StrictObject o(item, "map node");
        TopoNode n;
        n.id = o.get<std::string>("id");
        n.label = o.get_or<std::string>("label", n.id);
        n.pose = MetricPose(o.get<double>("x"), o.get<double>("y"), o.get_or<double>("theta", 0.0));
        n.influence_radius = o.get_or<double>("influence_radius", 1.0);
        for (const auto& t : o.get_or<std::vector<std::string>>("tags", {}))
            n.tags.insert(node_tag_from_string(t));
        o.finish();
        nodes.push_back(std::move(n));
    }
    std::vector<TopoEdge> edges;
    for (const auto& item : je) {
        StrictObject o(item, "map edge");
        TopoEdge e;
        e.id = o.get<std::string>("id");
        e.source = o.get<std::string>("source");
        e.target = o.get<std::string>("target");
        e.action = edge_action_from_string(o.get_or<std::string>("action", "move_base"));
        e.nominal_length = o.get<double>("nominal_length");
        e.nominal_speed = o.get_or<double>("nominal_speed", 1.0);
        e.enabled = o.get_or<bool>("enabled", true);
        o.finish();
        edges.push_back(std::move(e));
    }
    return TopoMap(std::move(nodes), std::move(edges));
}

Json map_to_json(const TopoMap& map) {
    Json nodes = Json::array();
    for (const auto& n : map.nodes()) {
        Json tags = Json::array();
        for (auto t : n.tags) tags.push_back(to_string(t));
        nodes.push_back({{"id", n.id},
                         {"label", n.label},
                         {"x", n.pose.x},
                         {"y", n.pose.y},
                         {"theta", n.pose.theta},
                         {"influence_radius", n.influence_radius},
                         {"tags", tags}});
    }
    Json edges = Json::array();
    for (const auto& e : map.edges()) {
        edges.push_back({{"id", e.id},
                         {"source", e.source},
                         {"target", e.target},
                         {"action", to_string(e.action)},
                         {"nominal_length", e.nominal_length},
                         {"nominal_speed", e.nominal_speed},
                         {"enabled", e.enabled}});
    }
    return {{"nodes", nodes}, {"edges", edges}};
}

TopoMap load_map(std::istream& in) {
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("map document: ") + e.what());
    }
    return map_from_json(doc);
}

TopoMap load_map_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open map file '" + path + "'");
    return load_map(in);
}

void save_map(const TopoMap& map, std::ostream& out) { out << map_to_json(map).dump(2) << '\n'; }

}  // namespace lta::topo
