#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "lta/fremen.hpp"
#include "lta/rng.hpp"
#include "lta/topomap.hpp"

namespace lta::info {

using topo::NodeId;

/// One FreMEn model of screen interactions per terminal_spot node.
class InteractionModelSet {
public:
    InteractionModelSet() = default;
    explicit InteractionModelSet(const topo::TopoMap& map,
                                 fremen::FremenOptions options = fremen::FremenOptions::defaults(),
                                 double slot_duration_s = 1800.0);

    /// Every visit is recorded, with or without an interaction.
    void record_outcome(const NodeId& node, double t, bool interacted);
    void rebuild();

    /// Prediction at t; a node never visited predicts p = 0.5.
    fremen::Prediction predict(const NodeId& node, double t) const;

    const std::map<NodeId, fremen::FremenModel>& models() const { return models_; }
    std::vector<NodeId> nodes() const;
    double slot_duration() const { return slot_duration_; }

private:
    std::map<NodeId, fremen::FremenModel> models_;
    double slot_duration_ = 1800.0;
};

Json to_json(const InteractionModelSet& models);

struct PlannedVisit {
    NodeId node;
    double slot_start = 0.0;
    double weight = 0.0;
    double p_hat = 0.0;
    double entropy = 0.0;
};

struct VisitPlan {
    int day = 0;
    std::vector<PlannedVisit> visits;  // ordered by slot start
    bool uniform_fallback = false;     // every weight was zero
};

struct PlanOptions {
    double window_start_h = 8.0;
    double window_end_h = 18.0;
};

/// w = beta * p + (1 - beta) * h(p).
double visit_weight(double p, double beta);

/// Candidate (node, slot start) pairs for `day`, slots inside the window.
std::vector<std::pair<NodeId, double>> candidate_slots(const InteractionModelSet& models, int day,
                                                       const PlanOptions& options = {});

/// Draws n_visits pairs without replacement, proportional to their weights;
/// at most one node per slot.
VisitPlan sample_plan(const InteractionModelSet& models, int day, int n_visits, double beta, Rng& rng,
                      const PlanOptions& options = {});

/// Same draw with equal weights.
VisitPlan uniform_plan(const InteractionModelSet& models, int day, int n_visits, Rng& rng,
                       const PlanOptions& options = {});

void write_plan_csv(const std::vector<VisitPlan>& plans, std::ostream& out);

}  // namespace lta::info
