#include "hypoelim/gjl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "hypoelim/errors.hpp"

namespace hypoelim {

std::vector<HypothesisSet> exact_classes(const ProblemInstance& inst, const HypothesisSet& alive,
                                         ActionIndex action) {
    std::vector<HypothesisSet> classes;
    for (HypothesisIndex i : alive) {
        auto it = std::find_if(classes.begin(), classes.end(), [&](const HypothesisSet& c) {
            return inst.param(action, c.front()) == inst.param(action, i);
        });
        if (it == classes.end()) {
            classes.push_back({i});
        } else {
            it->push_back(i);
        }
    }
    return classes;
}

ActionIndex gjl_select_action(const ProblemInstance& inst, const HypothesisSet& alive) {
    if (alive.size() < 2) throw UsageError("gjl_select_action needs at least two alive hypotheses");
    std::optional<ActionIndex> best;
    std::size_t best_largest = std::numeric_limits<std::size_t>::max();
    for (ActionIndex a = 0; a < inst.num_actions(); ++a) {
        std::size_t largest = 0;
        for (const auto& c : exact_classes(inst, alive, a)) largest = std::max(largest, c.size());
        if (largest == alive.size()) continue;
        // Eliminated count |alive| - largest is maximal exactly when the
        // largest class is smallest; strict < keeps the smallest index.
        if (largest < best_largest) {
            best = a;
            best_largest = largest;
        }
    }
    if (!best) throw NoSeparatingAction("no action separates any pair of alive hypotheses");
    return *best;
}

double gjl_min_divergence(const ProblemInstance& inst, const HypothesisSet& alive,
                          ActionIndex action) {
    double d_min = std::numeric_limits<double>::infinity();
    for (HypothesisIndex l : alive) {
        for (HypothesisIndex m : alive) {
            if (l == m) continue;
            const double d = inst.kl(action, l, m);
            if (d > 0.0) d_min = std::min(d_min, d);
        }
    }
    return d_min;
}

std::uint64_t gjl_budget(double gamma, double d_min) {
    if (!(d_min > 0.0) || !std::isfinite(d_min)) throw UsageError("d_min must be positive and finite");
    const double tau = std::ceil(gamma / d_min);
    if (tau >= 1.8e19) throw UsageError("GJL budget does not fit in 64 bits");
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(tau));
}

GjlStagePlan make_gjl_plan(const ProblemInstance& inst, const HypothesisSet& alive,
                           ActionIndex action, double gamma) {
    const double d_min = gjl_min_divergence(inst, alive, action);
    if (!std::isfinite(d_min)) {
        throw NoSeparatingAction("action " + std::to_string(action) + " separates no alive pair");
    }
    return {action, gjl_budget(gamma, d_min), d_min};
}

GjlStageOutcome gjl_stage(const ProblemInstance& inst, const HypothesisSet& alive,
                          const GjlStagePlan& plan, ObservationSource& source) {
    if (alive.empty()) throw UsageError("gjl_stage on an empty alive set");
    const SampleSummary summary = source.draw_summary(plan.action, plan.tau_fixed);
    const Family family = inst.family(plan.action);

    GjlStageOutcome outcome;
    double best = -std::numeric_limits<double>::infinity();
    for (HypothesisIndex i : alive) {
        const double ll = summary_log_likelihood(family, inst.param(plan.action, i), summary);
        if (ll > best) {
            best = ll;
            outcome.winner = i;
        }
    }
    const ParamVector& winning = inst.param(plan.action, outcome.winner);
    for (HypothesisIndex i : alive) {
        if (inst.param(plan.action, i) == winning) outcome.survivors.push_back(i);
    }
    return outcome;
}

RunResult run_gjl(const ProblemInstance& inst, double delta, HypothesisIndex true_h,
                  ObservationSource& source, const RunLimits& limits,
                  const std::vector<ActionIndex>& action_override) {
    if (true_h >= inst.num_hypotheses()) throw UsageError("true hypothesis out of range");
    const double gamma = elimination_threshold(inst.num_hypotheses(), delta);

    RunResult result;
    HypothesisSet alive = all_hypotheses(inst.num_hypotheses());
    while (alive.size() >= 2) {
        const std::size_t r = result.stages.size();
        const ActionIndex action =
            r < action_override.size() ? action_override[r] : gjl_select_action(inst, alive);
        const GjlStagePlan plan = make_gjl_plan(inst, alive, action, gamma);
        if (limits.max_total_samples && result.total_samples + plan.tau_fixed > *limits.max_total_samples) {
            result.truncated = true;
            return result;
        }
        GjlStageOutcome outcome = gjl_stage(inst, alive, plan, source);

        StageRecord record;
        record.action = action;
        record.tau = plan.tau_fixed;
        record.winner = outcome.winner;
        record.contestants = alive.size();
        record.alive_before = std::move(alive);
        record.alive_after = std::move(outcome.survivors);
        alive = record.alive_after;
        result.total_samples += plan.tau_fixed;
        result.stages.push_back(std::move(record));
    }
    result.declared = alive.front();
    result.correct = result.declared == true_h;
    return result;
}

RunResult run_gjl(const ProblemInstance& inst, double delta, HypothesisIndex true_h,
                  RandomStream& rng) {
    SimulatedEnvironment env(inst, true_h, rng);
    return run_gjl(inst, delta, true_h, env);
}

}  // namespace hypoelim
