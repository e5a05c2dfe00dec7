#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "corpus.hpp"
#include "lta/activity.hpp"

using namespace lta;
using namespace lta::activity;
using namespace testing;

namespace {

// Straight walk along y = 0 from x0 to x1 sampling every `step` metres.
Trajectory straight(double x0, double x1, double step, double speed, const std::string& id = "w") {
    std::vector<TimedPoint> poses;
    const int n = static_cast<int>(std::round((x1 - x0) / step));
    for (int i = 0; i <= n; ++i) poses.push_back({i * step / speed, x0 + i * step, 0.0});
    return Trajectory(id, poses);
}

std::vector<Eigen::VectorXd> features(const std::vector<Trajectory>& corpus,
                                      const std::vector<SemanticRegion>& regions, std::vector<std::string>* labels) {
    std::vector<Eigen::VectorXd> out;
    for (const auto& t : corpus) {
        try {
            out.push_back(encode(t, regions).histogram);
            if (labels) labels->push_back(t.label());
        } catch (const FilteredOut&) {
        } catch (const DegenerateTrajectory&) {
        }
    }
    return out;
}

std::vector<int> label_ids(const std::vector<std::string>& labels) {
    std::map<std::string, int> ids;
    std::vector<int> out;
    for (const auto& l : labels) out.push_back(ids.emplace(l, static_cast<int>(ids.size())).first->second);
    return out;
}

// Pair-counting ARI written out from the contingency table definition.
double oracle_ari(const std::vector<int>& a, const std::vector<int>& b) {
    std::map<std::pair<int, int>, double> nij;
    std::map<int, double> ai, bj;
    for (std::size_t i = 0; i < a.size(); ++i) {
        nij[{a[i], b[i]}] += 1;
        ai[a[i]] += 1;
        bj[b[i]] += 1;
    }
    auto c2 = [](double x) { return x * (x - 1) / 2; };
    double index = 0, sa = 0, sb = 0;
    for (auto& [k, v] : nij) index += c2(v);
    for (auto& [k, v] : ai) sa += c2(v);
    for (auto& [k, v] : bj) sb += c2(v);
    const double expected = sa * sb / c2(static_cast<double>(a.size()));
    const double max = (sa + sb) / 2;
    return (index - expected) / (max - expected);
}

}  // namespace

TEST_CASE("straight corridor walk past one landmark") {
    const auto t = straight(-2.5, 2.5, 0.25, 1.0);
    CHECK(t.displacement_ratio() == doctest::Approx(1.0));
    CHECK(t.path_length() == doctest::Approx(5.0));
    const auto eps = episodes(t, {{0.0, 1.0}});
    REQUIRE(eps.size() == 4);
    CHECK(eps[0].distance == QDistance::Far);
    CHECK(eps[0].motion == QMotion::Approaching);
    CHECK(eps[1].distance == QDistance::Near);
    CHECK(eps[1].motion == QMotion::Approaching);
    CHECK(eps[2].distance == QDistance::Near);
    CHECK(eps[2].motion == QMotion::Receding);
    CHECK(eps[3].distance == QDistance::Far);
    CHECK(eps[3].motion == QMotion::Receding);
    const auto f = encode(t, {landmark("lm", 0.0, 1.0)});
    CHECK(f.histogram.size() == static_cast<Eigen::Index>(kCodesPerLandmark));
    CHECK(f.histogram.sum() == doctest::Approx(1.0));
    // Near for |x| < sqrt(3): 0.75 s far and 1.75 s near on each side.
    CHECK(eps[0].duration == doctest::Approx(0.75));
    CHECK(eps[1].duration == doctest::Approx(1.75));
    // States total 5 s, bigrams min(0.75, 1.75) + 1.75 + 0.75 = 3.25 s.
    std::vector<double> nonzero;
    for (double v : f.histogram) if (v > 0) nonzero.push_back(v * 8.25);
    std::sort(nonzero.begin(), nonzero.end());
    const std::vector<double> expected = {0.75, 0.75, 0.75, 0.75, 1.75, 1.75, 1.75};
    REQUIRE(nonzero.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(nonzero[i] == doctest::Approx(expected[i]));
}

TEST_CASE("closed loop is filtered out") {
    std::vector<TimedPoint> poses;
    for (int i = 0; i <= 40; ++i) {
        const double a = 2 * std::numbers::pi * i / 40;
        poses.push_back({i * 0.5, 3 * std::cos(a), 3 * std::sin(a)});
    }
    const Trajectory loop("loop", poses);
    CHECK(loop.displacement_ratio() < 1e-9);
    CHECK_FALSE(passes_filter(loop));
    CHECK_THROWS_AS(encode(loop, office_regions()), FilteredOut);
}

TEST_CASE("walks that never change qualitative state are degenerate") {
    // Far from every landmark and moving tangentially around one of them.
    std::vector<TimedPoint> poses;
    for (int i = 0; i <= 10; ++i) {
        const double a = 0.02 * i;
        poses.push_back({i * 1.0, 100 + 50 * std::cos(a), 50 * std::sin(a)});
    }
    const Trajectory arc("arc", poses);
    CHECK_THROWS_AS(encode(arc, {landmark("lm", 100, 0)}), DegenerateTrajectory);
    CHECK_THROWS_AS(Trajectory("bad", {{0, 0, 0}}), ValidationError);
    CHECK_THROWS_AS(Trajectory("bad", {{0, 0, 0}, {0, 1, 0}}), ValidationError);
}

TEST_CASE("speed does not change the histogram") {
    const std::vector<SemanticRegion> regions = {landmark("a", 0.0, 1.0), landmark("b", 1.125, -1.5),
                                                 landmark("c", -3.125, 2.5)};
    std::vector<Point2> points;
    for (const auto& r : regions) points.push_back(r.centroid());
    const auto slow = straight(-6, 6, 0.25, 0.8), fast = straight(-6, 6, 0.25, 1.3);
    // Closest approaches fall on sample midpoints, so every radial speed clears the static band at both speeds.
    const auto es = episodes(slow, points), ef = episodes(fast, points);
    REQUIRE(es.size() == ef.size());
    for (std::size_t i = 0; i < es.size(); ++i) {
        REQUIRE(es[i].distance == ef[i].distance);
        REQUIRE(es[i].motion == ef[i].motion);
        CHECK(es[i].duration * 0.8 == doctest::Approx(ef[i].duration * 1.3));
    }
    const auto a = encode(slow, regions).histogram, b = encode(fast, regions).histogram;
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("property: translating trajectory and regions together leaves the histogram unchanged") {
    const auto corpus = labelled_corpus({desk_approach(), desk_leave(), kitchen_visit()}, 20, 3);
    Rng rng(79);
    for (const auto& t : corpus) {
        const double dx = rng.uniform(-100, 100), dy = rng.uniform(-100, 100);
        std::vector<SemanticRegion> moved;
        for (const auto& r : office_regions()) moved.push_back(r.translated(dx, dy));
        Eigen::VectorXd a, b;
        try {
            a = encode(t, office_regions()).histogram;
        } catch (const Error&) {
            continue;
        }
        b = encode(t.translated(dx, dy), moved).histogram;
        CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("two templates cluster into K=2 with high ARI") {
    const auto corpus = labelled_corpus({desk_approach(), desk_leave()}, 60, 5);
    std::vector<std::string> labels;
    const auto X = features(corpus, office_regions(), &labels);
    REQUIRE(X.size() >= 100);
    ClusterOptions opts;
    opts.k_max = 8;
    opts.restarts = 20;
    const auto c = cluster_nightly(X, opts);
    CHECK(c.k() == 2);
    const auto truth = label_ids(labels);
    const double ari = adjusted_rand_index(truth, c.assignments);
    CHECK(ari == doctest::Approx(oracle_ari(truth, c.assignments)));
    CHECK(ari >= 0.9);
    CHECK(c.tau > 0);
}

TEST_CASE("three templates give K=3") {
    const auto corpus = labelled_corpus({desk_approach(), desk_leave(), kitchen_visit()}, 40, 7);
    std::vector<std::string> labels;
    const auto X = features(corpus, office_regions(), &labels);
    ClusterOptions opts;
    opts.k_max = 8;
    opts.restarts = 20;
    const auto c = cluster_nightly(X, opts);
    CHECK(c.k() == 3);
    CHECK(adjusted_rand_index(label_ids(labels), c.assignments) >= 0.9);
}

TEST_CASE("identical features pin K to k_min with a guarded tau") {
    std::vector<Eigen::VectorXd> X(10, Eigen::VectorXd::Constant(4, 0.25));
    const auto c = cluster_nightly(X, {});
    CHECK(c.k() == 2);
    CHECK(c.tau == 1e-6);
    CHECK_THROWS_AS(cluster_nightly(std::vector<Eigen::VectorXd>(3, Eigen::VectorXd::Ones(4)), {}), TooFewFeatures);
}

TEST_CASE("partial classification, novelty and exact matches") {
    const auto regions = office_regions();
    const auto corpus = labelled_corpus({desk_approach(), desk_leave()}, 60, 9);
    std::vector<std::string> labels;
    const auto X = features(corpus, regions, &labels);
    ClusterOptions opts;
    opts.k_max = 6;
    opts.restarts = 20;
    const auto c = cluster_nightly(X, opts);

    std::map<int, std::map<std::string, int>> votes;
    for (std::size_t i = 0; i < labels.size(); ++i) ++votes[c.assignments[i]][labels[i]];
    std::map<int, std::string> name;
    for (auto& [k, v] : votes)
        name[k] = std::max_element(v.begin(), v.end(), [](auto& a, auto& b) { return a.second < b.second; })->first;

    const auto held_out = labelled_corpus({desk_approach()}, 20, 1234, 100);
    int right = 0;
    for (const auto& t : held_out) right += name[classify_partial(c, t, regions, 0.2).cluster] == "desk_approach";
    CHECK(right >= 18);

    const auto zigzag = labelled_corpus({walk("zigzag", {{25, 9}, {35, 11}, {25, 13}, {35, 15}, {25, 17}})}, 10, 11);
    int novel = 0;
    for (const auto& t : zigzag) novel += classify_partial(c, t, regions, 0.2).novel;
    CHECK(novel >= 9);

    // Centroids built from exact copies reproduce their source.
    const auto a = encode(corpus[0], regions).histogram;
    const auto b = encode(straight(15, 25, 0.5, 1.0), regions).histogram;
    const auto pure = cluster_nightly({a, a, a, b, b, b}, {});
    const auto hit = classify_feature(pure, a);
    CHECK(hit.distance <= 1e-12);
    CHECK_FALSE(hit.novel);
}

TEST_CASE("property: clustering and classification are deterministic for a seed") {
    const auto corpus = labelled_corpus({desk_approach(), desk_leave(), kitchen_visit()}, 15, 13);
    const auto X = features(corpus, office_regions(), nullptr);
    ClusterOptions opts;
    opts.k_max = 5;
    opts.restarts = 5;
    const auto a = cluster_nightly(X, opts);
    const auto b = cluster_nightly(X, opts);
    CHECK(a.centroids == b.centroids);
    CHECK(a.tau == b.tau);
    CHECK(a.assignments == b.assignments);
    CHECK(to_json(a).dump() == to_json(b).dump());
}

TEST_CASE("scores and ARI edge cases") {
    CHECK(adjusted_rand_index({0, 0, 1, 1}, {1, 1, 0, 0}) == doctest::Approx(1.0));
    const std::vector<int> a = {0, 0, 0, 1, 1, 2, 2, 2}, b = {0, 1, 0, 1, 2, 2, 0, 2};
    CHECK(adjusted_rand_index(a, b) == doctest::Approx(oracle_ari(a, b)));
    const auto s = macro_scores({"x", "x", "y", "y"}, {"x", "y", "y", "y"});
    // x: precision 1, recall 0.5. y: precision 2/3, recall 1.
    CHECK(s.precision == doctest::Approx((1 + 2.0 / 3) / 2));
    CHECK(s.recall == doctest::Approx(0.75));
}

TEST_CASE("trajectory CSV and regions JSON") {
    std::istringstream csv("traj_id,t,x,y\na,0,0,0\na,1,1,0\nb,0,5,5\nb,2,6,6\n");
    const auto ts = read_trajectories_csv(csv);
    REQUIRE(ts.size() == 2);
    CHECK(ts[0].id() == "a");
    CHECK(ts[1].poses().size() == 2);
    const auto regions = regions_from_json(
        Json::parse(R"([{"name": "desk", "kind": "landmark", "polygon": [[0,0],[1,0],[1,1],[0,1]]}])"));
    CHECK(regions.at(0).centroid().x == doctest::Approx(0.5));
    // A bow-tie polygon self-intersects.
    CHECK_THROWS_AS(regions_from_json(Json::parse(
                        R"([{"name": "x", "kind": "room", "polygon": [[0,0],[1,1],[1,0],[0,1]]}])")),
                    ValidationError);
}

TEST_CASE("prefix model: member means, threshold and partial classification") {
    const auto regions = office_regions();
    const auto corpus = labelled_corpus({desk_approach(), desk_leave()}, 40, 21);
    std::vector<Eigen::VectorXd> full, prefix;
    std::vector<std::string> labels;
    for (const auto& t : corpus) {
        try {
            const auto f = encode(t, regions).histogram;
            const auto p = encode_unfiltered(t.prefix(0.2), regions).histogram;
            full.push_back(f);
            prefix.push_back(p);
            labels.push_back(t.label());
        } catch (const Error&) {
        }
    }
    ClusterOptions opts;
    opts.k_max = 5;
    opts.restarts = 10;
    auto c = cluster_nightly(full, opts);
    CHECK_FALSE(c.has_prefix_model());
    CHECK_THROWS_AS(classify_prefix_feature(c, prefix[0]), StateError);
    CHECK_THROWS_AS(fit_prefix_model(c, {prefix[0]}), ValidationError);
    fit_prefix_model(c, prefix);
    REQUIRE(c.has_prefix_model());

    // Oracle: per-cluster arithmetic mean of the member prefixes.
    for (int k = 0; k < c.k(); ++k) {
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(prefix[0].size());
        int n = 0;
        for (std::size_t i = 0; i < prefix.size(); ++i)
            if (c.assignments[i] == k) {
                sum += prefix[i];
                ++n;
            }
        REQUIRE(n > 0);
        CHECK((c.prefix_centroids.row(k).transpose() - sum / n).cwiseAbs().maxCoeff() <= 1e-12);
    }
    std::vector<double> d = c.prefix_distances;
    std::sort(d.begin(), d.end());
    CHECK(c.prefix_tau >= d.front());
    CHECK(c.prefix_tau <= d.back());
    const auto below = std::count_if(d.begin(), d.end(), [&](double x) { return x <= c.prefix_tau; });
    CHECK(static_cast<double>(below) >= 0.95 * static_cast<double>(d.size()));

    std::map<int, std::map<std::string, int>> votes;
    for (std::size_t i = 0; i < labels.size(); ++i) ++votes[c.assignments[i]][labels[i]];
    std::map<int, std::string> name;
    for (auto& [k, v] : votes)
        name[k] = std::max_element(v.begin(), v.end(), [](auto& a, auto& b) { return a.second < b.second; })->first;
    int right = 0, novel = 0;
    for (const auto& t : labelled_corpus({desk_leave()}, 20, 4321, 100)) {
        const auto r = classify_partial(c, t, regions, 0.2);
        right += name[r.cluster] == "desk_leave";
        novel += r.novel;
    }
    CHECK(right >= 18);
    CHECK(novel <= 5);
    CHECK(to_json(c).contains("prefix_centroids"));
}
