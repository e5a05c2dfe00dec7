#include "lta/learner.hpp"

namespace lta::learn {

Learner::Learner(const topo::TopoMap& map, LearnerOptions options)
    : options_(std::move(options)),
      edges_(map, options_.edges),
      edges_snapshot_(edges_),
      interactions_(map, options_.interaction, options_.slot_duration_s),
      interactions_snapshot_(interactions_) {}

void Learner::apply(const store::EventRecord& r) {
    using store::Category;
    const auto& p = r.payload;
    switch (r.category) {
        case Category::Traversal:
            if (p.at("kind") == "result") {
                const auto outcome = nav::traversal_outcome_from_string(p.at("outcome").get<std::string>());
                const double cost = outcome == nav::TraversalOutcome::Success ? p.at("duration").get<double>()
                                                                               : p.at("recovery_time").get<double>();
                edges_.record_traversal(p.at("edge").get<std::string>(), p.at("t_start").get<double>(), outcome,
                                        cost);
            }
            break;
        case Category::Interaction:
            interactions_.record_outcome(p.at("node").get<std::string>(), r.t, p.at("interacted").get<bool>());
            break;
        case Category::Trajectory:
            if (options_.activity.enabled && !options_.activity.regions.empty()) {
                try {
                    const auto& a = options_.activity;
                    const auto traj = trajectory_from_payload(p);
                    auto full = activity::encode(traj, a.regions, a.encoder).histogram;
                    auto prefix =
                        activity::encode_unfiltered(traj.prefix(a.prefix_fraction), a.regions, a.encoder).histogram;
                    features_.push_back({std::move(full), std::move(prefix)});
                    while (features_.size() > options_.activity.max_training) features_.pop_front();
                } catch (const activity::FilteredOut&) {
                } catch (const activity::DegenerateTrajectory&) {
                }
            }
            break;
        case Category::Task:
            if (p.at("kind") == "activity_batch_learn" && p.at("state") == "completed") nightly(p);
            break;
        default:
            break;
    }
}

void Learner::apply_all(const std::vector<store::EventRecord>& records) {
    for (const auto& r : records) apply(r);
}

void Learner::nightly(const Json& payload) {
    edges_.rebuild();
    edges_snapshot_ = edges_;
    interactions_.rebuild();
    interactions_snapshot_ = interactions_;
    ++rebuilds_;
    const auto& opts = options_.activity;
    if (!opts.enabled || features_.size() < 2 * static_cast<std::size_t>(opts.cluster.k_min)) return;
    auto cluster = opts.cluster;
    cluster.seed = payload.value("cluster_seed", cluster.seed);
    std::vector<Eigen::VectorXd> training, prefixes;
    for (const auto& f : features_) {
        training.push_back(f.full);
        prefixes.push_back(f.prefix);
    }
    clusters_ = activity::cluster_nightly(training, cluster);
    activity::fit_prefix_model(*clusters_, prefixes, cluster.novelty_percentile);
}

Json Learner::state_json() const {
    return {{"edge_stats", nav::to_json(edges_)},
            {"navigation_snapshot", nav::to_json(edges_snapshot_)},
            {"interaction_models", info::to_json(interactions_)},
            {"interaction_snapshot", info::to_json(interactions_snapshot_)},
            {"activity_clusters", clusters_ ? activity::to_json(*clusters_) : Json(nullptr)},
            {"training_features", features_.size()},
            {"rebuilds", rebuilds_}};
}

activity::Trajectory trajectory_from_payload(const Json& payload) {
    std::vector<activity::TimedPoint> poses;
    for (const auto& p : payload.at("poses")) poses.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
    return activity::Trajectory(payload.at("traj_id").get<std::string>(), std::move(poses),
                                payload.at("label").get<std::string>());
}

Json trajectory_payload(const activity::Trajectory& traj) {
    Json poses = Json::array();
    for (const auto& p : traj.poses()) poses.push_back({p.t, p.x, p.y});
    return {{"traj_id", traj.id()}, {"poses", poses}, {"label", traj.label()}};
}

}  // namespace lta::learn
