#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lta/json_util.hpp"

namespace lta::activity {

struct TimedPoint {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
};

/// Observed walk of one person. Timestamps strictly increase; path length > 0.
class Trajectory {
public:
    Trajectory(std::string id, std::vector<TimedPoint> poses, std::string label = {});

    const std::string& id() const { return id_; }
    const std::vector<TimedPoint>& poses() const { return poses_; }
    /// Ground-truth label when known (synthetic corpora); empty otherwise.
    const std::string& label() const { return label_; }
    double path_length() const { return path_length_; }
    /// |last - first| / path length, in [0, 1].
    double displacement_ratio() const;

    /// First `fraction` of the poses, at least two.
    Trajectory prefix(double fraction) const;
    Trajectory translated(double dx, double dy) const;

private:
    std::string id_;
    std::vector<TimedPoint> poses_;
    std::string label_;
    double path_length_ = 0.0;
};

enum class RegionKind { Room, Landmark };

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct SemanticRegion {
    std::string name;
    std::vector<Point2> polygon;
    RegionKind kind = RegionKind::Landmark;

    /// Area centroid; landmarks are reduced to this point.
    Point2 centroid() const;
    void validate() const;
    SemanticRegion translated(double dx, double dy) const;
};

struct EncoderOptions {
    double displacement_threshold = 0.5;  // theta
    double near_threshold_m = 2.0;
    double radial_speed_threshold = 0.05;  // m/s
};

enum class QDistance { Near, Far };
enum class QMotion { Approaching, Receding, Static };

struct Episode {
    std::size_t landmark = 0;
    QDistance distance = QDistance::Far;
    QMotion motion = QMotion::Static;
    std::size_t order = 0;  // position within this landmark's episode sequence
    double duration = 0.0;
};

/// Episode-histogram feature: for each landmark, the time spent in each of the
/// six (distance, motion) states and, per successive-episode bigram, the
/// shorter of the two episode durations; normalised to sum to one.
struct QstagFeature {
    Eigen::VectorXd histogram;
    std::vector<Episode> episodes;
};

constexpr std::size_t kStatesPerLandmark = 6;
constexpr std::size_t kCodesPerLandmark = kStatesPerLandmark + kStatesPerLandmark * kStatesPerLandmark;

std::size_t feature_dimension(std::size_t landmark_count);
std::vector<Point2> landmark_points(const std::vector<SemanticRegion>& regions);

bool passes_filter(const Trajectory& traj, const EncoderOptions& options = {});

/// Maximal runs of constant (distance, motion) per landmark, in time order.
std::vector<Episode> episodes(const Trajectory& traj, const std::vector<Point2>& landmarks,
                              const EncoderOptions& options = {});

/// Throws FilteredOut when the displacement ratio is below threshold, and
/// DegenerateTrajectory when every landmark sees a single static episode.
QstagFeature encode(const Trajectory& traj, const std::vector<SemanticRegion>& regions,
                    const EncoderOptions& options = {});

/// Same as encode without the displacement filter (used for prefixes).
QstagFeature encode_unfiltered(const Trajectory& traj, const std::vector<SemanticRegion>& regions,
                               const EncoderOptions& options = {});

class FilteredOut : public Error {
public:
    using Error::Error;
};

class DegenerateTrajectory : public Error {
public:
    using Error::Error;
};

struct ClusterOptions {
    int k_min = 2;
    int k_max = 20;
    int restarts = 50;
    int max_iterations = 100;
    double novelty_percentile = 95.0;
    std::uint64_t seed = 1;
};

struct ActivityClusters {
    Eigen::MatrixXd centroids;  // K x dim
    std::vector<double> training_distances;
    std::vector<int> assignments;  // training sample -> cluster
    double tau = 0.0;
    double silhouette = 0.0;
    // Prefix model: per cluster, the mean encoding of its members' prefixes.
    Eigen::MatrixXd prefix_centroids;  // K x dim, empty until fitted
    std::vector<double> prefix_distances;
    double prefix_tau = 0.0;

    int k() const { return static_cast<int>(centroids.rows()); }
    bool has_prefix_model() const { return prefix_centroids.rows() > 0; }
};

class TooFewFeatures : public Error {
public:
    using Error::Error;
};

/// k-means with seeded k-means++ restarts for every K in range; K chosen by
/// the largest mean silhouette.
ActivityClusters cluster_nightly(const std::vector<Eigen::VectorXd>& features, const ClusterOptions& options = {});

struct PartialClassification {
    int cluster = -1;
    double distance = 0.0;
    bool novel = false;
};

PartialClassification classify_feature(const ActivityClusters& clusters, const Eigen::VectorXd& feature);

/// Fits the prefix model from the prefix encodings of the training samples, in
/// the same order as `clusters.assignments`. The novelty threshold is the given
/// percentile of member distances to their own prefix centroid.
void fit_prefix_model(ActivityClusters& clusters, const std::vector<Eigen::VectorXd>& prefix_features,
                      double novelty_percentile = 95.0);

/// Nearest prefix centroid and prefix novelty threshold.
PartialClassification classify_prefix_feature(const ActivityClusters& clusters, const Eigen::VectorXd& feature);

/// Encodes the first `prefix_fraction` of the poses and assigns the nearest
/// centroid: of the prefix model when fitted, else of the full trajectories.
PartialClassification classify_partial(const ActivityClusters& clusters, const Trajectory& traj,
                                       const std::vector<SemanticRegion>& regions, double prefix_fraction = 0.2,
                                       const EncoderOptions& options = {});

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);
double mean_silhouette(const std::vector<Eigen::VectorXd>& features, const std::vector<int>& labels, int k);

struct ScoreSummary {
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
};

/// Macro-averaged precision/recall/F1 of predicted against true labels.
ScoreSummary macro_scores(const std::vector<std::string>& truth, const std::vector<std::string>& predicted);

Json to_json(const ActivityClusters& clusters);

std::vector<Trajectory> read_trajectories_csv(std::istream& in);
std::vector<SemanticRegion> regions_from_json(const Json& doc);

}  // namespace lta::activity
