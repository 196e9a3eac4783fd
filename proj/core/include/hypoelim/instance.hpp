#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hypoelim/distributions.hpp"

namespace hypoelim {

using HypothesisIndex = std::size_t;
using ActionIndex = std::size_t;

/// Sorted, duplicate-free set of hypothesis indices.
using HypothesisSet = std::vector<HypothesisIndex>;

HypothesisSet all_hypotheses(std::size_t count);

struct ActionSpec {
    Family family = Family::NormalUnitVariance;
    std::vector<ParamVector> params;  // params[i] is the parameter under hypothesis i

    friend bool operator==(const ActionSpec&, const ActionSpec&) = default;
};

/// Hypotheses, priors and actions. Immutable after construction, so one
/// instance can be shared read-only by any number of concurrent trials.
class ProblemInstance {
public:
    /// Throws UsageError / ParameterDomainError when the invariants fail:
    /// H >= 2, priors strictly inside (0,1) summing to 1, at least one
    /// action, H valid parameters of a common dimension per action.
    ProblemInstance(std::vector<double> priors, std::vector<ActionSpec> actions);

    std::size_t num_hypotheses() const noexcept { return priors_.size(); }
    std::size_t num_actions() const noexcept { return actions_.size(); }
    const std::vector<double>& priors() const noexcept { return priors_; }
    const std::vector<ActionSpec>& actions() const noexcept { return actions_; }
    const ActionSpec& action(ActionIndex a) const;
    Family family(ActionIndex a) const { return action(a).family; }
    const ParamVector& param(ActionIndex a, HypothesisIndex i) const;

    /// D(H_i(a) || H_j(a)) in bits.
    double kl(ActionIndex a, HypothesisIndex i, HypothesisIndex j) const;
    double squared_distance(ActionIndex a, HypothesisIndex i, HypothesisIndex j) const;

    friend bool operator==(const ProblemInstance&, const ProblemInstance&) = default;

private:
    std::vector<double> priors_;
    std::vector<ActionSpec> actions_;
};

/// Benchmark environment: H hypothesis-specific actions (mean 3 under
/// their own hypothesis, a once-drawn U[0,1] mean otherwise) plus one
/// action with means 0.5 + 0.01 i. Uniform priors.
ProblemInstance generate_paper_instance(std::size_t num_hypotheses, Family family,
                                        std::uint64_t seed);

/// Smallest mean a generated exponential action may carry.
inline constexpr double kMinExponentialMean = 1e-6;

struct HypothesisPair {
    HypothesisIndex first;
    HypothesisIndex second;
    friend bool operator==(const HypothesisPair&, const HypothesisPair&) = default;
};

struct AssumptionReport {
    std::optional<double> alpha;  // min strictly positive KLD
    std::optional<double> beta;   // max KLD
    std::optional<double> c1;     // min ||dtheta||^2 / KLD over nonidentical pairs
    std::optional<double> c2;     // max of the same ratio
    bool a1_holds = false;
    bool a3_holds = false;
    std::vector<ActionIndex> uninformative_actions;  // all hypotheses share one parameter
    std::vector<HypothesisPair> violating_pairs;     // pairs no action separates
};

AssumptionReport verify_assumptions(const ProblemInstance& inst);

HypothesisIndex draw_true_hypothesis(const ProblemInstance& inst, RandomStream& rng);

struct Observation {
    double value = 0.0;
    ActionIndex action = 0;
    std::uint64_t time_index = 1;
};

Observation observe(const ProblemInstance& inst, HypothesisIndex true_h, ActionIndex action,
                    RandomStream& rng, std::uint64_t time_index = 1);

// Persistence. Doubles are written in shortest round-trip form, so
// save -> load reproduces the instance bit for bit.
nlohmann::json to_json(const ProblemInstance& inst);
ProblemInstance instance_from_json(const nlohmann::json& doc);  // throws SchemaError
void save_instance(const ProblemInstance& inst, const std::filesystem::path& path);
ProblemInstance load_instance(const std::filesystem::path& path);

nlohmann::json to_json(const AssumptionReport& report);

}  // namespace hypoelim
