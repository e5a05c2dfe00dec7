#include "lta/activity.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "lta/error.hpp"
#include "lta/rng.hpp"

namespace lta::activity {

Trajectory::Trajectory(std::string id, std::vector<TimedPoint> poses, std::string label)
    : id_(std::move(id)), poses_(std::move(poses)), label_(std::move(label)) {
    if (poses_.size() < 2) throw ValidationError("trajectory '" + id_ + "': needs at least two poses");
    for (std::size_t i = 1; i < poses_.size(); ++i) {
        if (!(poses_[i].t > poses_[i - 1].t))
            throw ValidationError("trajectory '" + id_ + "': timestamps must strictly increase");
        path_length_ += std::hypot(poses_[i].x - poses_[i - 1].x, poses_[i].y - poses_[i - 1].y);
    }
    if (!(path_length_ > 0.0)) throw ValidationError("trajectory '" + id_ + "': path length is zero");
}

double Trajectory::displacement_ratio() const {
    const auto& a = poses_.front();
    const auto& b = poses_.back();
    return std::min(1.0, std::hypot(b.x - a.x, b.y - a.y) / path_length_);
}

Trajectory Trajectory::prefix(double fraction) const {
    const auto n = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(poses_.size())));
    const std::size_t keep = std::clamp<std::size_t>(n, 2, poses_.size());
    return Trajectory(id_, std::vector<TimedPoint>(poses_.begin(), poses_.begin() + static_cast<long>(keep)), label_);
}

Trajectory Trajectory::translated(double dx, double dy) const {
    auto moved = poses_;
    for (auto& p : moved) {
        p.x += dx;
        p.y += dy;
    }
    return Trajectory(id_, std::move(moved), label_);
}

Point2 SemanticRegion::centroid() const {
    double area2 = 0.0, cx = 0.0, cy = 0.0;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = polygon[i];
        const auto& q = polygon[(i + 1) % n];
        const double cross = p.x * q.y - q.x * p.y;
        area2 += cross;
        cx += (p.x + q.x) * cross;
        cy += (p.y + q.y) * cross;
    }
    if (std::abs(area2) < 1e-12) {
        Point2 mean;
        for (const auto& p : polygon) {
            mean.x += p.x / static_cast<double>(n);
            mean.y += p.y / static_cast<double>(n);
        }
        return mean;
    }
    return {cx / (3.0 * area2), cy / (3.0 * area2)};
}

namespace {

double orient(const Point2& a, const Point2& b, const Point2& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

bool segments_cross(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    const double o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
    return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

}  // namespace

void SemanticRegion::validate() const {
    if (polygon.size() < 3) throw ValidationError("region '" + name + "': polygon needs at least 3 vertices");
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;  // adjacent through the closing edge
            if (segments_cross(polygon[i], polygon[(i + 1) % n], polygon[j], polygon[(j + 1) % n]))
                throw ValidationError("region '" + name + "': polygon is self-intersecting");
        }
}

SemanticRegion SemanticRegion::translated(double dx, double dy) const {
    auto r = *this;
    for (auto& p : r.polygon) {
        p.x += dx;
        p.y += dy;
    }
    return r;
}

std::size_t feature_dimension(std::size_t landmark_count) { return landmark_count * kCodesPerLandmark; }

std::vector<Point2> landmark_points(const std::vector<SemanticRegion>& regions) {
    std::vector<Point2> out;
    for (const auto& r : regions)
        if (r.kind == RegionKind::Landmark) out.push_back(r.centroid());
    return out;
}

bool passes_filter(const Trajectory& traj, const EncoderOptions& options) {
    return traj.displacement_ratio() >= options.displacement_threshold;
}

std::vector<Episode> episodes(const Trajectory& traj, const std::vector<Point2>& landmarks,
                              const EncoderOptions& options) {
    struct Run {
        QDistance distance;
        QMotion motion;
        double duration;
    };
    std::vector<Episode> out;
    const auto& poses = traj.poses();
    for (std::size_t l = 0; l < landmarks.size(); ++l) {
        const auto& m = landmarks[l];
        std::vector<Run> runs;
        double prev_d = std::hypot(poses[0].x - m.x, poses[0].y - m.y);
        for (std::size_t i = 1; i < poses.size(); ++i) {
            const double d = std::hypot(poses[i].x - m.x, poses[i].y - m.y);
            const double dt = poses[i].t - poses[i - 1].t;
            const double radial = (d - prev_d) / dt;
            const double mid = 0.5 * (d + prev_d);
            prev_d = d;
            const QDistance qd = mid < options.near_threshold_m ? QDistance::Near : QDistance::Far;
            QMotion qm = QMotion::Static;
            if (radial < -options.radial_speed_threshold) qm = QMotion::Approaching;
            if (radial > options.radial_speed_threshold) qm = QMotion::Receding;
            if (!runs.empty() && runs.back().distance == qd && runs.back().motion == qm)
                runs.back().duration += dt;
            else
                runs.push_back({qd, qm, dt});
        }
        for (std::size_t i = 0; i < runs.size(); ++i)
            out.push_back({l, runs[i].distance, runs[i].motion, i, runs[i].duration});
    }
    // Interleave landmarks stably by order index so the list reads in time order per landmark.
    std::stable_sort(out.begin(), out.end(), [](const Episode& a, const Episode& b) {
        return a.landmark < b.landmark || (a.landmark == b.landmark && a.order < b.order);
    });
    return out;
}

namespace {

std::size_t state_code(const Episode& e) {
    return static_cast<std::size_t>(e.distance) * 3 + static_cast<std::size_t>(e.motion);
}

}  // namespace

QstagFeature encode_unfiltered(const Trajectory& traj, const std::vector<SemanticRegion>& regions,
                               const EncoderOptions& options) {
    const auto landmarks = landmark_points(regions);
    if (landmarks.empty()) throw DegenerateTrajectory("trajectory '" + traj.id() + "': no landmarks to relate to");
    QstagFeature f;
    f.episodes = episodes(traj, landmarks, options);

    bool degenerate = true;
    for (std::size_t l = 0; l < landmarks.size() && degenerate; ++l) {
        std::size_t count = 0;
        bool moving = false;
        for (const auto& e : f.episodes)
            if (e.landmark == l) {
                ++count;
                moving = moving || e.motion != QMotion::Static;
            }
        if (count != 1 || moving) degenerate = false;
    }
    if (degenerate)
        throw DegenerateTrajectory("trajectory '" + traj.id() +
                                   "': single static episode for every landmark (no qualitative motion)");

    f.histogram = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(feature_dimension(landmarks.size())));
    const Episode* prev = nullptr;
    for (const auto& e : f.episodes) {
        const std::size_t base = e.landmark * kCodesPerLandmark;
        f.histogram[static_cast<Eigen::Index>(base + state_code(e))] += e.duration;
        if (prev != nullptr && prev->landmark == e.landmark)
            f.histogram[static_cast<Eigen::Index>(base + kStatesPerLandmark + state_code(*prev) * kStatesPerLandmark +
                                                  state_code(e))] += std::min(prev->duration, e.duration);
        prev = &e;
    }
    f.histogram /= f.histogram.sum();
    return f;
}

QstagFeature encode(const Trajectory& traj, const std::vector<SemanticRegion>& regions,
                    const EncoderOptions& options) {
    if (!passes_filter(traj, options)) {
        std::ostringstream msg;
        msg << "trajectory '" << traj.id() << "': displacement ratio " << traj.displacement_ratio()
            << " below threshold " << options.displacement_threshold;
        throw FilteredOut(msg.str());
    }
    return encode_unfiltered(traj, regions, options);
}

namespace {

struct KMeansResult {
    Eigen::MatrixXd centroids;
    std::vector<int> labels;
    double inertia = std::numeric_limits<double>::infinity();
};

KMeansResult kmeans_once(const Eigen::MatrixXd& X, int k, Rng& rng, int max_iterations) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd C(k, X.cols());
    // k-means++ seeding
    C.row(0) = X.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
    Eigen::VectorXd d2(n);
    for (Eigen::Index i = 0; i < n; ++i) d2[i] = (X.row(i) - C.row(0)).squaredNorm();
    for (int c = 1; c < k; ++c) {
        const double total = d2.sum();
        Eigen::Index pick = 0;
        if (total <= 0.0) {
            pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
        } else {
            double u = rng.uniform() * total;
            for (pick = 0; pick < n - 1; ++pick) {
                u -= d2[pick];
                if (u < 0.0) break;
            }
        }
        C.row(c) = X.row(pick);
        for (Eigen::Index i = 0; i < n; ++i) d2[i] = std::min(d2[i], (X.row(i) - C.row(c)).squaredNorm());
    }

    KMeansResult r;
    r.labels.assign(static_cast<std::size_t>(n), -1);
    for (int iter = 0; iter < max_iterations; ++iter) {
        bool changed = false;
        double inertia = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = (X.row(i) - C.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            inertia += best_d;
            if (r.labels[static_cast<std::size_t>(i)] != best) {
                r.labels[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }
        r.inertia = inertia;
        if (!changed && iter > 0) break;
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, X.cols());
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(r.labels[static_cast<std::size_t>(i)]) += X.row(i);
            ++counts[static_cast<std::size_t>(r.labels[static_cast<std::size_t>(i)])];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                C.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
            } else {
                // Empty cluster: move it onto the point farthest from its centroid.
                Eigen::Index far = 0;
                double far_d = -1.0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double d = (X.row(i) - C.row(r.labels[static_cast<std::size_t>(i)])).squaredNorm();
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                C.row(c) = X.row(far);
            }
        }
    }
    r.centroids = std::move(C);
    return r;
}

double percentile(std::vector<double> values, double pct) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const double pos = pct / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(values.size() - 1, lo + 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace

double mean_silhouette(const std::vector<Eigen::VectorXd>& features, const std::vector<int>& labels, int k) {
    const std::size_t n = features.size();
    if (n < 2 || k < 2) return 0.0;
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    double total = 0.0;
    std::vector<double> sum_to(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(sum_to.begin(), sum_to.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) sum_to[static_cast<std::size_t>(labels[j])] += (features[i] - features[j]).norm();
        const auto own = static_cast<std::size_t>(labels[i]);
        if (sizes[own] <= 1) continue;  // singleton clusters score 0
        const double a = sum_to[own] / (sizes[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < sum_to.size(); ++c)
            if (c != own && sizes[c] > 0) b = std::min(b, sum_to[c] / sizes[c]);
        const double denom = std::max(a, b);
        if (denom > 0.0 && std::isfinite(b)) total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

ActivityClusters cluster_nightly(const std::vector<Eigen::VectorXd>& features, const ClusterOptions& options) {
    if (options.k_min < 1 || options.k_max < options.k_min)
        throw ValidationError("clustering: invalid k range");
    const auto n = static_cast<int>(features.size());
    if (n < 2 * options.k_min)
        throw TooFewFeatures("clustering: " + std::to_string(n) + " features, need at least " +
                             std::to_string(2 * options.k_min));
    const auto dim = features.front().size();
    Eigen::MatrixXd X(n, dim);
    for (int i = 0; i < n; ++i) {
        if (features[static_cast<std::size_t>(i)].size() != dim)
            throw ValidationError("clustering: features differ in dimension");
        X.row(i) = features[static_cast<std::size_t>(i)].transpose();
    }

    const int k_hi = std::min(options.k_max, n - 1);
    KMeansResult chosen;
    double chosen_score = -std::numeric_limits<double>::infinity();
    for (int k = options.k_min; k <= std::max(k_hi, options.k_min); ++k) {
        Rng rng(options.seed * 1000003ULL + static_cast<std::uint64_t>(k));
        KMeansResult best;
        for (int r = 0; r < options.restarts; ++r) {
            auto res = kmeans_once(X, k, rng, options.max_iterations);
            if (res.inertia < best.inertia) best = std::move(res);
        }
        const double score = mean_silhouette(features, best.labels, k);
        if (score > chosen_score + 1e-12) {
            chosen_score = score;
            chosen = std::move(best);
        }
    }

    ActivityClusters out;
    out.centroids = chosen.centroids;
    out.assignments = chosen.labels;
    out.silhouette = chosen_score;
    for (int i = 0; i < n; ++i)
        out.training_distances.push_back((X.row(i) - out.centroids.row(chosen.labels[static_cast<std::size_t>(i)])).norm());
    out.tau = std::max(1e-6, percentile(out.training_distances, options.novelty_percentile));
    return out;
}

PartialClassification classify_feature(const ActivityClusters& clusters, const Eigen::VectorXd& feature) {
    if (feature.size() != clusters.centroids.cols())
        throw ValidationError("classification: feature dimension does not match the clusters");
    PartialClassification out;
    out.distance = std::numeric_limits<double>::infinity();
    for (int c = 0; c < clusters.k(); ++c) {
        const double d = (clusters.centroids.row(c).transpose() - feature).norm();
        if (d < out.distance) {
            out.distance = d;
            out.cluster = c;
        }
    }
    out.novel = out.distance > clusters.tau;
    return out;
}

void fit_prefix_model(ActivityClusters& clusters, const std::vector<Eigen::VectorXd>& prefix_features,
                      double novelty_percentile) {
    if (prefix_features.size() != clusters.assignments.size())
        throw ValidationError("prefix model: " + std::to_string(prefix_features.size()) + " prefixes for " +
                              std::to_string(clusters.assignments.size()) + " training samples");
    const auto dim = clusters.centroids.cols();
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(clusters.k(), dim);
    std::vector<int> counts(static_cast<std::size_t>(clusters.k()), 0);
    for (std::size_t i = 0; i < prefix_features.size(); ++i) {
        if (prefix_features[i].size() != dim) throw ValidationError("prefix model: feature dimension mismatch");
        C.row(clusters.assignments[i]) += prefix_features[i].transpose();
        ++counts[static_cast<std::size_t>(clusters.assignments[i])];
    }
    for (int c = 0; c < clusters.k(); ++c)
        if (counts[static_cast<std::size_t>(c)] > 0) C.row(c) /= counts[static_cast<std::size_t>(c)];
    clusters.prefix_distances.clear();
    for (std::size_t i = 0; i < prefix_features.size(); ++i)
        clusters.prefix_distances.push_back((prefix_features[i].transpose() - C.row(clusters.assignments[i])).norm());
    clusters.prefix_centroids = std::move(C);
    clusters.prefix_tau = std::max(1e-6, percentile(clusters.prefix_distances, novelty_percentile));
}

PartialClassification classify_prefix_feature(const ActivityClusters& clusters, const Eigen::VectorXd& feature) {
    if (!clusters.has_prefix_model()) throw StateError("classification: no prefix model fitted");
    if (feature.size() != clusters.prefix_centroids.cols())
        throw ValidationError("classification: feature dimension does not match the clusters");
    PartialClassification out;
    out.distance = std::numeric_limits<double>::infinity();
    for (int c = 0; c < clusters.k(); ++c) {
        const double d = (clusters.prefix_centroids.row(c).transpose() - feature).norm();
        if (d < out.distance) {
            out.distance = d;
            out.cluster = c;
        }
    }
    out.novel = out.distance > clusters.prefix_tau;
    return out;
}

PartialClassification classify_partial(const ActivityClusters& clusters, const Trajectory& traj,
                                       const std::vector<SemanticRegion>& regions, double prefix_fraction,
                                       const EncoderOptions& options) {
    const auto feature = encode_unfiltered(traj.prefix(prefix_fraction), regions, options).histogram;
    return clusters.has_prefix_model() ? classify_prefix_feature(clusters, feature) : classify_feature(clusters, feature);
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw ValidationError("ARI: label vectors differ in length");
    std::map<std::pair<int, int>, double> table;
    std::map<int, double> ra, rb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        table[{a[i], b[i]}] += 1;
        ra[a[i]] += 1;
        rb[b[i]] += 1;
    }
    auto c2 = [](double x) { return x * (x - 1) / 2.0; };
    double index = 0, sa = 0, sb = 0;
    for (const auto& [k, v] : table) index += c2(v);
    for (const auto& [k, v] : ra) sa += c2(v);
    for (const auto& [k, v] : rb) sb += c2(v);
    const double total = c2(static_cast<double>(a.size()));
    const double expected = total > 0 ? sa * sb / total : 0.0;
    const double max_index = 0.5 * (sa + sb);
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

ScoreSummary macro_scores(const std::vector<std::string>& truth, const std::vector<std::string>& predicted) {
    if (truth.size() != predicted.size()) throw ValidationError("scores: label vectors differ in length");
    std::map<std::string, double> tp, truth_n, pred_n;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        truth_n[truth[i]] += 1;
        pred_n[predicted[i]] += 1;
        if (truth[i] == predicted[i]) tp[truth[i]] += 1;
    }
    ScoreSummary s;
    if (truth_n.empty()) return s;
    for (const auto& [label, count] : truth_n) {
        const double r = tp[label] / count;
        const double p = pred_n[label] > 0 ? tp[label] / pred_n[label] : 0.0;
        s.recall += r;
        s.precision += p;
        s.f1 += (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
    }
    const auto k = static_cast<double>(truth_n.size());
    s.recall /= k;
    s.precision /= k;
    s.f1 /= k;
    return s;
}

Json to_json(const ActivityClusters& clusters) {
    auto rows = [](const Eigen::MatrixXd& m) {
        Json out = Json::array();
        for (Eigen::Index c = 0; c < m.rows(); ++c) {
            Eigen::RowVectorXd r = m.row(c);
            out.push_back(std::vector<double>(r.data(), r.data() + r.size()));
        }
        return out;
    };
    Json doc = {{"k", clusters.k()},
                {"tau", clusters.tau},
                {"silhouette", clusters.silhouette},
                {"centroids", rows(clusters.centroids)},
                {"assignments", clusters.assignments}};
    if (clusters.has_prefix_model()) {
        doc["prefix_tau"] = clusters.prefix_tau;
        doc["prefix_centroids"] = rows(clusters.prefix_centroids);
    }
    return doc;
}

std::vector<Trajectory> read_trajectories_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) return {};
    std::vector<std::string> order;
    std::map<std::string, std::vector<TimedPoint>> poses;
    std::map<std::string, std::string> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string id, t, x, y, label;
        if (!std::getline(ss, id, ',') || !std::getline(ss, t, ',') || !std::getline(ss, x, ',') ||
            !std::getline(ss, y, ','))
            throw ParseError("trajectory csv: malformed line " + std::to_string(line_no));
        std::getline(ss, label, ',');
        if (!poses.count(id)) order.push_back(id);
        try {
            poses[id].push_back({std::stod(t), std::stod(x), std::stod(y)});
        } catch (const std::exception&) {
            throw ParseError("trajectory csv: bad number on line " + std::to_string(line_no));
        }
        if (!label.empty()) labels[id] = label;
    }
    std::vector<Trajectory> out;
    for (const auto& id : order) out.emplace_back(id, poses[id], labels[id]);
    return out;
}

std::vector<SemanticRegion> regions_from_json(const Json& doc) {
    if (!doc.is_array()) throw ValidationError("regions: expected an array");
    std::vector<SemanticRegion> out;
    for (const auto& item : doc) {
        StrictObject o(item, "region");
        SemanticRegion r;
        r.name = o.get<std::string>("name");
        const auto kind = o.get_or<std::string>("kind", "landmark");
        if (kind == "landmark")
            r.kind = RegionKind::Landmark;
        else if (kind == "room")
            r.kind = RegionKind::Room;
        else
            throw ValidationError("region '" + r.name + "': unknown kind '" + kind + "'");
        for (const auto& v : o.get<std::vector<std::vector<double>>>("polygon")) {
            if (v.size() != 2) throw ValidationError("region '" + r.name + "': vertices must be [x, y]");
            r.polygon.push_back({v[0], v[1]});
        }
        o.finish();
        r.validate();
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace lta::activity
