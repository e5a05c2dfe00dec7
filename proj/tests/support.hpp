#pragma once

#include <set>
#include <string>
#include <vector>

#include "lta/topomap.hpp"

namespace testing {

using lta::topo::EdgeAction;
using lta::topo::NodeTag;
using lta::topo::TopoEdge;
using lta::topo::TopoMap;
using lta::topo::TopoNode;

inline TopoNode node(const std::string& id, double x, double y, std::set<NodeTag> tags = {NodeTag::Plain}) {
    TopoNode n;
    n.id = id;
    n.label = id;
    n.pose = lta::topo::MetricPose(x, y, 0.0);
    n.tags = std::move(tags);
    return n;
}

inline TopoEdge edge(const std::string& s, const std::string& t, double length, double speed = 1.0) {
    TopoEdge e;
    e.id = s + t;
    e.source = s;
    e.target = t;
    e.nominal_length = length;
    e.nominal_speed = speed;
    return e;
}

// A<->B<->C<->A with A the dock. A-B 10 m, B-C 20 m, C-A 10 m at 1 m/s.
inline TopoMap triangle() {
    return TopoMap({node("A", 0, 0, {NodeTag::Dock}), node("B", 10, 0), node("C", 5, 8)},
                   {edge("A", "B", 10), edge("B", "A", 10), edge("B", "C", 20), edge("C", "B", 20),
                    edge("C", "A", 10), edge("A", "C", 10)});
}

}  // namespace testing
