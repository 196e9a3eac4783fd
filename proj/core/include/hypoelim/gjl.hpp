#pragma once

#include <cstdint>
#include <vector>

#include "hypoelim/elimination.hpp"
#include "hypoelim/instance.hpp"

namespace hypoelim {

// Greedy fixed-budget baseline ("GJL as described"): pick the action that
// eliminates the most alive hypotheses, collect a fixed budget sized for
// the closest non-identical pair, keep the max-likelihood class.

struct GjlStagePlan {
    ActionIndex action = 0;
    std::uint64_t tau_fixed = 0;
    double d_min = 0.0;  // bits
};

/// Alive hypotheses grouped by identical parameter under `action`,
/// ordered by smallest member.
std::vector<HypothesisSet> exact_classes(const ProblemInstance& inst, const HypothesisSet& alive,
                                         ActionIndex action);

ActionIndex gjl_select_action(const ProblemInstance& inst, const HypothesisSet& alive);

/// Smallest non-zero KLD between alive hypotheses under `action`.
double gjl_min_divergence(const ProblemInstance& inst, const HypothesisSet& alive,
                          ActionIndex action);

std::uint64_t gjl_budget(double gamma, double d_min);

GjlStagePlan make_gjl_plan(const ProblemInstance& inst, const HypothesisSet& alive,
                           ActionIndex action, double gamma);

struct GjlStageOutcome {
    HypothesisIndex winner = 0;
    HypothesisSet survivors;
};

/// Draws exactly plan.tau_fixed observations and keeps the exact class of
/// the maximum-likelihood hypothesis (smallest index on exact ties).
GjlStageOutcome gjl_stage(const ProblemInstance& inst, const HypothesisSet& alive,
                          const GjlStagePlan& plan, ObservationSource& source);

RunResult run_gjl(const ProblemInstance& inst, double delta, HypothesisIndex true_h,
                  ObservationSource& source, const RunLimits& limits = {},
                  const std::vector<ActionIndex>& action_override = {});

RunResult run_gjl(const ProblemInstance& inst, double delta, HypothesisIndex true_h,
                  RandomStream& rng);

}  // namespace hypoelim
