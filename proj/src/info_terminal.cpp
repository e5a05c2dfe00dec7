#include "lta/info_terminal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <set>

#include "lta/error.hpp"

namespace lta::info {

namespace {

constexpr double kDay = 86400.0;

VisitPlan draw(const InteractionModelSet& models, int day, int n_visits, const PlanOptions& options, Rng& rng,
               const std::function<double(const fremen::Prediction&)>& weight_of) {
    const auto slots = candidate_slots(models, day, options);
    std::set<double> distinct;
    for (const auto& s : slots) distinct.insert(s.second);
    if (n_visits < 0 || static_cast<std::size_t>(n_visits) > distinct.size())
        throw ValidationError("visit plan: " + std::to_string(n_visits) + " visits requested but only " +
                              std::to_string(distinct.size()) + " slots are available");

    struct Candidate {
        PlannedVisit visit;
        bool taken = false;
    };
    std::vector<Candidate> cands;
    for (const auto& [node, start] : slots) {
        const auto pred = models.predict(node, start + 0.5 * models.slot_duration());
        cands.push_back({{node, start, weight_of(pred), pred.p, pred.h}});
    }

    VisitPlan plan;
    plan.day = day;
    for (int k = 0; k < n_visits; ++k) {
        double total = 0.0;
        std::size_t open = 0;
        for (const auto& c : cands)
            if (!c.taken) {
                total += c.visit.weight;
                ++open;
            }
        std::size_t pick = cands.size();
        if (total > 0.0) {
            double u = rng.uniform() * total;
            for (std::size_t i = 0; i < cands.size(); ++i) {
                if (cands[i].taken || cands[i].visit.weight <= 0.0) continue;
                pick = i;
                u -= cands[i].visit.weight;
                if (u < 0.0) break;
            }
        } else {
            plan.uniform_fallback = true;
            auto r = rng.below(open);
            for (std::size_t i = 0; i < cands.size(); ++i) {
                if (cands[i].taken) continue;
                if (r-- == 0) {
                    pick = i;
                    break;
                }
            }
        }
        plan.visits.push_back(cands[pick].visit);
        // One robot: a slot is used by at most one node.
        for (auto& c : cands)
            if (c.visit.slot_start == cands[pick].visit.slot_start) c.taken = true;
    }
    std::stable_sort(plan.visits.begin(), plan.visits.end(), [](const PlannedVisit& a, const PlannedVisit& b) {
        return a.slot_start < b.slot_start;
    });
    return plan;
}

}  // namespace

InteractionModelSet::InteractionModelSet(const topo::TopoMap& map, fremen::FremenOptions options,
                                         double slot_duration_s)
    : slot_duration_(slot_duration_s) {
    if (!(slot_duration_s > 0.0)) throw ValidationError("interaction models: slot duration must be > 0");
    for (const auto& n : map.nodes())
        if (n.has_tag(topo::NodeTag::TerminalSpot)) models_.emplace(n.id, fremen::FremenModel(options));
}

void InteractionModelSet::record_outcome(const NodeId& node, double t, bool interacted) {
    auto it = models_.find(node);
    if (it == models_.end()) throw NotFoundError("interaction models: '" + node + "' is not a terminal_spot node");
    it->second.add_observation(t, interacted);
}

void InteractionModelSet::rebuild() {
    for (auto& [node, m] : models_)
        if (!m.empty()) m.rebuild();
}

fremen::Prediction InteractionModelSet::predict(const NodeId& node, double t) const {
    auto it = models_.find(node);
    if (it == models_.end()) throw NotFoundError("interaction models: '" + node + "' is not a terminal_spot node");
    if (it->second.empty()) return {0.5, 1.0};
    return it->second.predict(t);
}

std::vector<NodeId> InteractionModelSet::nodes() const {
    std::vector<NodeId> out;
    for (const auto& [node, m] : models_) out.push_back(node);
    return out;
}

Json to_json(const InteractionModelSet& models) {
    Json out = Json::object();
    for (const auto& [node, m] : models.models()) out[node] = fremen::to_json(m);
    return {{"slot_duration_s", models.slot_duration()}, {"models", out}};
}

double visit_weight(double p, double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw ValidationError("visit weight: beta must lie in [0, 1]");
    return beta * p + (1.0 - beta) * fremen::binary_entropy(p);
}

std::vector<std::pair<NodeId, double>> candidate_slots(const InteractionModelSet& models, int day,
                                                       const PlanOptions& options) {
    if (!(options.window_end_h > options.window_start_h))
        throw ValidationError("visit plan: autonomy window is empty");
    std::vector<std::pair<NodeId, double>> out;
    const double begin = day * kDay + options.window_start_h * 3600.0;
    const double end = day * kDay + options.window_end_h * 3600.0;
    const double slot = models.slot_duration();
    for (const auto& node : models.nodes())
        for (int k = 0; begin + (k + 1) * slot <= end; ++k) out.emplace_back(node, begin + k * slot);
    return out;
}

VisitPlan sample_plan(const InteractionModelSet& models, int day, int n_visits, double beta, Rng& rng,
                      const PlanOptions& options) {
    visit_weight(0.5, beta);
    return draw(models, day, n_visits, options, rng,
                [beta](const fremen::Prediction& p) { return visit_weight(p.p, beta); });
}

VisitPlan uniform_plan(const InteractionModelSet& models, int day, int n_visits, Rng& rng,
                       const PlanOptions& options) {
    return draw(models, day, n_visits, options, rng, [](const fremen::Prediction&) { return 1.0; });
}

void write_plan_csv(const std::vector<VisitPlan>& plans, std::ostream& out) {
    out << "day,slot_start,node,weight,p_hat,entropy\n";
    for (const auto& plan : plans)
        for (const auto& v : plan.visits)
            out << plan.day << ',' << v.slot_start << ',' << v.node << ',' << v.weight << ',' << v.p_hat << ','
                << v.entropy << '\n';
}

}  // namespace lta::info
