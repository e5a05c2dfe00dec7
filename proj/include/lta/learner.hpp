#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "lta/activity.hpp"
#include "lta/event_store.hpp"
#include "lta/info_terminal.hpp"
#include "lta/navmdp.hpp"

namespace lta::learn {

struct ActivityLearningOptions {
    bool enabled = true;
    std::vector<activity::SemanticRegion> regions;
    activity::EncoderOptions encoder;
    activity::ClusterOptions cluster;
    std::size_t max_training = 300;  // most recent features kept for nightly clustering
    double prefix_fraction = 0.2;
};

struct LearnerOptions {
    nav::EdgeStatsOptions edges;
    fremen::FremenOptions interaction = fremen::FremenOptions::defaults();
    double slot_duration_s = 1800.0;
    ActivityLearningOptions activity;
};

/// Everything the robot learns, built only from event records. The online
/// run and a replay of its log feed the same records through apply().
///
/// Observations go into the live models straight away; the nightly learning
/// job (a completed activity_batch_learn task record) rebuilds them and
/// publishes the snapshots that navigation and planning read.
class Learner {
public:
    Learner(const topo::TopoMap& map, LearnerOptions options = {});

    void apply(const store::EventRecord& record);
    void apply_all(const std::vector<store::EventRecord>& records);

    const nav::EdgeStats& edge_stats() const { return edges_; }
    const nav::EdgeStats& navigation_snapshot() const { return edges_snapshot_; }
    const info::InteractionModelSet& interactions() const { return interactions_; }
    const info::InteractionModelSet& interaction_snapshot() const { return interactions_snapshot_; }
    const std::optional<activity::ActivityClusters>& clusters() const { return clusters_; }
    std::size_t training_size() const { return features_.size(); }
    int rebuild_count() const { return rebuilds_; }
    const LearnerOptions& options() const { return options_; }

    Json state_json() const;

private:
    void nightly(const Json& payload);

    LearnerOptions options_;
    nav::EdgeStats edges_;
    nav::EdgeStats edges_snapshot_;
    info::InteractionModelSet interactions_;
    info::InteractionModelSet interactions_snapshot_;
    struct TrainingSample {
        Eigen::VectorXd full;
        Eigen::VectorXd prefix;
    };
    std::deque<TrainingSample> features_;
    std::optional<activity::ActivityClusters> clusters_;
    int rebuilds_ = 0;
};

/// Trajectory encoded in a trajectory record payload.
activity::Trajectory trajectory_from_payload(const Json& payload);
Json trajectory_payload(const activity::Trajectory& traj);

}  // namespace lta::learn
