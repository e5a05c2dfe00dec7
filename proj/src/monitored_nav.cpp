#include "lta/monitored_nav.hpp"

#include <ostream>

#include "lta/error.hpp"

namespace lta::recovery {

std::string to_string(FailureClass c) {
    switch (c) {
        case FailureClass::BumperPressed: return "BUMPER_PRESSED";
        case FailureClass::NavFail: return "NAV_FAIL";
        case FailureClass::CarpetStuck: return "CARPET_STUCK";
    }
    return "NAV_FAIL";
}

std::string to_string(Behavior b) {
    switch (b) {
        case Behavior::AskHelp: return "ASK_HELP";
        case Behavior::SleepRetry: return "SLEEP_RETRY";
        case Behavior::Backtrack: return "BACKTRACK";
        case Behavior::BoostVelocity: return "BOOST_VELOCITY";
    }
    return "ASK_HELP";
}

FailureClass failure_class_from_string(const std::string& s) {
    for (auto c : kFailureClasses)
        if (to_string(c) == s) return c;
    throw ValidationError("unknown failure class '" + s + "'");
}

Behavior behavior_from_string(const std::string& s) {
    for (auto b : kBehaviors)
        if (to_string(b) == s) return b;
    throw ValidationError("unknown recovery behavior '" + s + "'");
}

std::string to_string(TraversalResult r) {
    switch (r) {
        case TraversalResult::Success: return "success";
        case TraversalResult::RecoveredThenSuccess: return "recovered_then_success";
        case TraversalResult::FailedExhausted: return "failed_exhausted";
        case TraversalResult::FailedFatal: return "failed_fatal";
    }
    return "success";
}

RecoveryPolicy RecoveryPolicy::defaults() {
    RecoveryPolicy p;
    p.plans[FailureClass::BumperPressed] = {{{Behavior::AskHelp, 0.0, 0}}, true};
    p.plans[FailureClass::NavFail] = {{{Behavior::SleepRetry, 10.0, 0},
                                       {Behavior::Backtrack, 0.0, 0},
                                       {Behavior::AskHelp, 0.0, 5}},
                                      true};
    p.plans[FailureClass::CarpetStuck] = {{{Behavior::BoostVelocity, 5.0, 0}}, false};
    return p;
}

void RecoveryPolicy::validate() const {
    for (auto c : kFailureClasses) {
        auto it = plans.find(c);
        if (it == plans.end() || it->second.sequence.empty())
            throw ValidationError("recovery policy: failure class " + to_string(c) + " has no recovery list");
        for (const auto& b : it->second.sequence) {
            if (b.duration_s < 0.0 || b.max_requests < 0)
                throw ValidationError("recovery policy: negative parameter for " + to_string(b.kind));
            if ((b.kind == Behavior::SleepRetry || b.kind == Behavior::BoostVelocity) && !(b.duration_s > 0.0))
                throw ValidationError("recovery policy: " + to_string(b.kind) + " needs a positive duration");
        }
    }
}

std::optional<RecoveryBehavior> RecoveryPolicy::behavior_for(FailureClass c, int k) const {
    const auto& plan = plans.at(c);
    const auto n = static_cast<int>(plan.sequence.size());
    if (k < n) return plan.sequence[static_cast<std::size_t>(k)];
    if (!plan.repeat_last) return std::nullopt;
    const auto& last = plan.sequence.back();
    // Uses of the last element so far, counting its first appearance.
    const int uses_of_last = k - n + 1;
    if (last.max_requests > 0 && uses_of_last >= last.max_requests) return std::nullopt;
    return last;
}

TraversalReport traverse_monitored(const TopoEdge& edge, const RecoveryPolicy& policy, NavWorld& world,
                                   const StepObserver& observer) {
    const auto loc = world.location();
    if (loc.edge || loc.node != edge.source)
        throw StateError("monitored traversal of '" + edge.id + "': robot is not at source '" + edge.source + "'");

    TraversalReport report;
    const double t0 = world.now();
    const auto& map = world.map();
    auto emit = [&](NavStep step) {
        const auto pose = map.interpolate(edge, step.kind == StepKind::Segment ? step.to_progress : step.from_progress);
        step.edge = edge.id;
        step.x = pose.x;
        step.y = pose.y;
        if (observer) observer(step);
        report.steps.push_back(std::move(step));
    };

    std::map<FailureClass, int> used;
    double progress = 0.0;
    bool had_failure = false;
    while (true) {
        const double seg_start = world.now();
        const auto attempt = world.attempt_edge(edge, progress);
        NavStep seg;
        seg.kind = StepKind::Segment;
        seg.t = world.now();
        seg.from_progress = progress;
        seg.to_progress = attempt.success ? 1.0 : attempt.progress;
        seg.distance = std::max(0.0, seg.to_progress - progress) * edge.nominal_length;
        seg.duration = world.now() - seg_start;
        seg.completed = attempt.success;
        emit(seg);
        if (attempt.success) {
            report.result = had_failure ? TraversalResult::RecoveredThenSuccess : TraversalResult::Success;
            report.final_segment_duration = seg.duration;
            break;
        }

        had_failure = true;
        progress = attempt.progress;
        FailureClass cls = attempt.failure;
        NavStep fail;
        fail.kind = StepKind::Failure;
        fail.t = world.now();
        fail.from_progress = progress;
        fail.failure = cls;
        fail.fatal = attempt.fatal;
        emit(fail);
        if (attempt.fatal) {
            report.result = TraversalResult::FailedFatal;
            break;
        }

        bool resumed = false;
        while (!resumed) {
            auto behavior = policy.behavior_for(cls, used[cls]);
            if (!behavior && cls == FailureClass::CarpetStuck && policy.carpet_exhaustion_to_nav_fail) {
                cls = FailureClass::NavFail;
                behavior = policy.behavior_for(cls, used[cls]);
            }
            if (!behavior) {
                world.abandon_edge(edge, progress);
                report.result = TraversalResult::FailedExhausted;
                report.elapsed = world.now() - t0;
                return report;
            }
            ++used[cls];
            const auto outcome = world.attempt_recovery(*behavior, {&edge, cls, progress});
            RecoveryRecord rec;
            rec.t = world.now();
            rec.edge = edge.id;
            rec.progress = progress;
            const auto pose = map.interpolate(edge, progress);
            rec.x = pose.x;
            rec.y = pose.y;
            rec.failure = cls;
            rec.behavior = behavior->kind;
            rec.immediate_success = outcome.recovered;
            report.recoveries.push_back(rec);

            NavStep step;
            step.kind = StepKind::Recovery;
            step.t = world.now();
            step.from_progress = progress;
            step.failure = cls;
            step.behavior = behavior->kind;
            step.immediate_success = outcome.recovered;
            step.duration = outcome.duration;
            emit(step);

            if (outcome.recovered) {
                if (behavior->kind == Behavior::Backtrack) progress = 0.0;
                resumed = true;
            } else {
                NavStep again;
                again.kind = StepKind::Failure;
                again.t = world.now();
                again.from_progress = progress;
                again.failure = cls;
                again.from_recovery = true;
                emit(again);
            }
        }
    }
    report.elapsed = world.now() - t0;
    return report;
}

std::vector<bool> recovery_success_flags(const std::vector<NavStep>& steps, const ClassifierOptions& options) {
    for (std::size_t i = 1; i < steps.size(); ++i)
        if (steps[i].t < steps[i - 1].t)
            throw ValidationError("recovery classification: events out of time order at index " + std::to_string(i));

    std::vector<bool> flags;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (steps[i].kind != StepKind::Recovery) continue;
        if (!steps[i].immediate_success) {
            flags.push_back(false);
            continue;
        }
        bool ok = true;
        double travelled = 0.0;
        for (std::size_t j = i + 1; j < steps.size(); ++j) {
            if (steps[j].kind == StepKind::Segment) travelled += steps[j].distance;
            if (steps[j].kind != StepKind::Failure) continue;
            const double dt = steps[j].t - steps[i].t;
            ok = !(dt <= options.time_window_s || travelled <= options.distance_window_m);
            break;
        }
        flags.push_back(ok);
    }
    return flags;
}

RecoveryTable classify_recoveries(const std::vector<NavStep>& steps, const ClassifierOptions& options) {
    const auto flags = recovery_success_flags(steps, options);
    RecoveryTable table;
    for (auto c : kFailureClasses) table.by_class[c];
    std::size_t k = 0;
    for (const auto& s : steps) {
        if (s.kind != StepKind::Recovery) continue;
        const bool ok = flags[k++];
        for (auto* counts : {&table.by_behavior[{s.failure, s.behavior}], &table.by_class[s.failure]}) {
            ++counts->total;
            ++(ok ? counts->successful : counts->unsuccessful);
        }
    }
    return table;
}

void write_recovery_table_csv(const RecoveryTable& table, std::ostream& out) {
    out << "failure_class,behavior,successful,unsuccessful,total\n";
    for (auto c : kFailureClasses) {
        const auto& row = table.by_class.at(c);
        out << to_string(c) << ",ALL," << row.successful << ',' << row.unsuccessful << ',' << row.total << '\n';
    }
    for (const auto& [key, row] : table.by_behavior)
        out << to_string(key.first) << ',' << to_string(key.second) << ',' << row.successful << ','
            << row.unsuccessful << ',' << row.total << '\n';
}

void write_recovery_locations_csv(const std::vector<NavStep>& steps, std::ostream& out,
                                  const ClassifierOptions& options) {
    const auto flags = recovery_success_flags(steps, options);
    out << "x,y,failure_class,behavior,success\n";
    out.precision(10);
    std::size_t k = 0;
    for (const auto& s : steps) {
        if (s.kind != StepKind::Recovery) continue;
        out << s.x << ',' << s.y << ',' << to_string(s.failure) << ',' << to_string(s.behavior) << ','
            << (flags[k++] ? 1 : 0) << '\n';
    }
}

}  // namespace lta::recovery
