#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lta/topomap.hpp"

namespace lta::recovery {

using topo::EdgeId;
using topo::NodeId;
using topo::TopoEdge;

enum class FailureClass { BumperPressed, NavFail, CarpetStuck };
enum class Behavior { AskHelp, SleepRetry, Backtrack, BoostVelocity };

inline constexpr std::array<FailureClass, 3> kFailureClasses = {
    FailureClass::BumperPressed, FailureClass::NavFail, FailureClass::CarpetStuck};
inline constexpr std::array<Behavior, 4> kBehaviors = {Behavior::AskHelp, Behavior::SleepRetry,
                                                       Behavior::Backtrack, Behavior::BoostVelocity};

std::string to_string(FailureClass c);
std::string to_string(Behavior b);
FailureClass failure_class_from_string(const std::string& s);
Behavior behavior_from_string(const std::string& s);

struct RecoveryBehavior {
    Behavior kind = Behavior::AskHelp;
    double duration_s = 0.0;  // sleep for SLEEP_RETRY, motor boost for BOOST_VELOCITY
    int max_requests = 0;     // ASK_HELP when repeated: total uses allowed, 0 = unbounded
};

struct ClassPlan {
    std::vector<RecoveryBehavior> sequence;
    bool repeat_last = false;
};

/// Ordered recoveries per failure class.
struct RecoveryPolicy {
    std::map<FailureClass, ClassPlan> plans;
    /// Once the carpet list is used up, continue with the NAV_FAIL list.
    bool carpet_exhaustion_to_nav_fail = true;

    /// Bumper: help, repeated until recovered. Navigation failure: sleep and
    /// retry, backtrack, then help (at most 5 requests). Carpet: boost once.
    static RecoveryPolicy defaults();
    void validate() const;

    /// Behaviour for the (k+1)-th consecutive failure of class c, or none once exhausted.
    std::optional<RecoveryBehavior> behavior_for(FailureClass c, int k) const;
};

/// Robot position on the map: at a node, or part-way along an edge.
struct Location {
    NodeId node;                 // the node, or the edge's source while on an edge
    std::optional<EdgeId> edge;  // set while on an edge
    double progress = 0.0;       // fraction of the edge covered
};

struct EdgeAttempt {
    bool success = false;
    double duration = 0.0;
    double progress = 1.0;  // fraction of the edge reached when the attempt ended
    FailureClass failure = FailureClass::NavFail;
    bool fatal = false;
};

struct RecoveryContext {
    const TopoEdge* edge = nullptr;
    FailureClass failure = FailureClass::NavFail;
    double progress = 0.0;
};

struct RecoveryAttempt {
    bool recovered = false;
    double duration = 0.0;
};

/// What monitored navigation needs from a world, real or scripted.
class NavWorld {
public:
    virtual ~NavWorld() = default;
    virtual double now() const = 0;
    virtual const topo::TopoMap& map() const = 0;
    virtual Location location() const = 0;
    /// Drive along `edge` starting from `from_progress`. The robot must be at
    /// the edge source (from_progress = 0) or stopped on this edge.
    virtual EdgeAttempt attempt_edge(const TopoEdge& edge, double from_progress) = 0;
    virtual RecoveryAttempt attempt_recovery(const RecoveryBehavior& behavior, const RecoveryContext& context) = 0;
    /// Give up on the edge: the robot is returned to its source.
    virtual double abandon_edge(const TopoEdge& edge, double progress) = 0;
};

enum class StepKind { Segment, Failure, Recovery };

/// One observable moment of a monitored traversal. `t` is when it ended.
struct NavStep {
    StepKind kind = StepKind::Segment;
    double t = 0.0;
    EdgeId edge;
    double x = 0.0;
    double y = 0.0;
    // Segment
    double from_progress = 0.0;
    double to_progress = 0.0;
    double distance = 0.0;
    double duration = 0.0;
    bool completed = false;
    // Failure / Recovery
    FailureClass failure = FailureClass::NavFail;
    bool fatal = false;
    bool from_recovery = false;  // failure raised by a recovery that did not work
    Behavior behavior = Behavior::AskHelp;
    bool immediate_success = false;
};

enum class TraversalResult { Success, RecoveredThenSuccess, FailedExhausted, FailedFatal };
std::string to_string(TraversalResult r);

struct RecoveryRecord {
    double t = 0.0;
    EdgeId edge;
    double progress = 0.0;
    double x = 0.0;
    double y = 0.0;
    FailureClass failure = FailureClass::NavFail;
    Behavior behavior = Behavior::AskHelp;
    bool immediate_success = false;
};

struct TraversalReport {
    TraversalResult result = TraversalResult::Success;
    double elapsed = 0.0;
    double final_segment_duration = 0.0;
    std::vector<RecoveryRecord> recoveries;
    std::vector<NavStep> steps;
};

using StepObserver = std::function<void(const NavStep&)>;

/// Traverses one edge; on every failure applies the next behaviour for its
/// class until the edge completes or the list runs out.
TraversalReport traverse_monitored(const TopoEdge& edge, const RecoveryPolicy& policy, NavWorld& world,
                                   const StepObserver& observer = {});

struct RecoveryCounts {
    int successful = 0;
    int unsuccessful = 0;
    int total = 0;
};

struct ClassifierOptions {
    double time_window_s = 60.0;
    double distance_window_m = 1.0;
};

using RecoveryKey = std::pair<FailureClass, Behavior>;

struct RecoveryTable {
    std::map<RecoveryKey, RecoveryCounts> by_behavior;
    std::map<FailureClass, RecoveryCounts> by_class;  // always holds all three classes
};

/// A recovery counts as successful when it unblocked the robot and no further
/// failure follows within the time window or within the distance window of travel.
/// Throws ValidationError if `steps` is not time-ordered.
RecoveryTable classify_recoveries(const std::vector<NavStep>& steps, const ClassifierOptions& options = {});

/// Per-recovery success flags in the order recoveries appear in `steps`.
std::vector<bool> recovery_success_flags(const std::vector<NavStep>& steps, const ClassifierOptions& options = {});

void write_recovery_table_csv(const RecoveryTable& table, std::ostream& out);
void write_recovery_locations_csv(const std::vector<NavStep>& steps, std::ostream& out,
                                  const ClassifierOptions& options = {});

}  // namespace lta::recovery
