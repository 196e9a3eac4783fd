#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hypoelim/clustering.hpp"
#include "hypoelim/instance.hpp"

namespace hypoelim {

// ---------------------------------------------------------------------------
// Observation sources
// ---------------------------------------------------------------------------

/// Where a policy gets its samples from. The simulator draws from the
/// instance under a fixed true hypothesis; tests substitute scripted feeds.
class ObservationSource {
public:
    virtual ~ObservationSource() = default;

    virtual double draw(ActionIndex action) = 0;

    /// Count and sum of `count` fresh observations under `action`.
    /// The default draws them one by one.
    virtual SampleSummary draw_summary(ActionIndex action, std::uint64_t count);
};

class SimulatedEnvironment final : public ObservationSource {
public:
    /// `inst` and `rng` must outlive the environment.
    SimulatedEnvironment(const ProblemInstance& inst, HypothesisIndex true_h, RandomStream& rng);

    double draw(ActionIndex action) override;
    SampleSummary draw_summary(ActionIndex action, std::uint64_t count) override;

    HypothesisIndex true_hypothesis() const noexcept { return true_h_; }
    /// Observations produced so far, i.e. the current time index n.
    std::uint64_t observations() const noexcept { return observations_; }

private:
    const ProblemInstance* inst_;
    HypothesisIndex true_h_;
    RandomStream* rng_;
    std::vector<double> means_;  // true mean per action
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::exponential_distribution<double> exponential_{1.0};
    std::uint64_t observations_ = 0;
};

// ---------------------------------------------------------------------------
// Policy configuration and results
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kDefaultMaxSamplesPerStage = 1'000'000'000;

struct PolicyConfig {
    double delta = 1e-3;
    ClusteringConfig clustering;
    std::uint64_t max_samples_per_stage = kDefaultMaxSamplesPerStage;
    /// When non-empty, stage r uses action_override[r] instead of the
    /// separation-maximising choice (until the sequence runs out).
    std::vector<ActionIndex> action_override;

    void validate(const ProblemInstance& inst) const;
};

/// Budget on the total samples of one trial. Reaching it truncates the
/// trial instead of raising an error.
struct RunLimits {
    std::optional<std::uint64_t> max_total_samples;
};

struct StageRecord {
    ActionIndex action = 0;
    std::uint64_t tau = 0;
    HypothesisIndex winner = 0;
    HypothesisSet alive_before;
    HypothesisSet alive_after;
    std::size_t contestants = 0;
    /// Contestants meeting the winning condition when the stage stopped.
    std::size_t winners_at_stop = 1;
    /// max |L_ij + L_ji| over contestant pairs at the stop.
    double antisymmetry_error = 0.0;

    std::size_t eliminated() const noexcept { return alive_before.size() - alive_after.size(); }
};

struct RunResult {
    HypothesisIndex declared = 0;
    std::uint64_t total_samples = 0;
    bool correct = false;
    bool truncated = false;  // stopped by RunLimits before a decision
    std::vector<StageRecord> stages;
};

/// Elimination threshold log2(H / delta) for the initial hypothesis count H.
double elimination_threshold(std::size_t num_hypotheses, double delta);

// ---------------------------------------------------------------------------
// Stage machinery
// ---------------------------------------------------------------------------

/// One stage's running state. Keeps the cumulative log-likelihood of each
/// contestant, so L_ij = l_i - l_j is antisymmetric by construction and a
/// winner exists iff the leader is at least gamma ahead of the runner-up.
class StageState {
public:
    StageState(const ProblemInstance& inst, ActionIndex action, HypothesisSet alive,
               HypothesisSet contestants);

    void update(double x) noexcept {
        for (std::size_t p = 0; p < loglik_.size(); ++p) loglik_[p] += offset_[p] + slope_[p] * x;
        ++tau_;
    }

    ActionIndex action() const noexcept { return action_; }
    const HypothesisSet& alive() const noexcept { return alive_; }
    const HypothesisSet& contestants() const noexcept { return contestants_; }
    std::uint64_t tau() const noexcept { return tau_; }

    /// L between contestants at positions p and q of contestants().
    double llr(std::size_t p, std::size_t q) const { return loglik_.at(p) - loglik_.at(q); }
    /// L between two hypotheses; both must be contestants.
    double llr_between(HypothesisIndex i, HypothesisIndex j) const;

    /// Contestant with L_ij >= gamma against every other contestant.
    std::optional<HypothesisIndex> winner(double gamma) const noexcept;
    /// Number of contestants meeting the winning condition, by a full
    /// pairwise scan (at most one, see winner()).
    std::size_t count_winners(double gamma) const;
    double max_antisymmetry_error() const;

private:
    ActionIndex action_;
    HypothesisSet alive_;
    HypothesisSet contestants_;
    std::vector<double> offset_;
    std::vector<double> slope_;
    std::vector<double> loglik_;
    std::uint64_t tau_ = 0;
};

struct StageOutcome {
    HypothesisIndex winner = 0;
    std::uint64_t tau = 0;
    std::size_t winners_at_stop = 1;
    double antisymmetry_error = 0.0;
};

/// Action with the largest minimum squared parameter distance between
/// alive hypotheses in different clusters; smallest index on ties.
/// Throws NoSeparatingAction when every action keeps alive in one cluster.
ActionIndex select_action(const ProblemInstance& inst, const ClusterMap& map,
                          const HypothesisSet& alive);

/// Samples `action` until a representative of alive beats all others by
/// gamma. Throws StageOverrun past max_samples.
StageOutcome run_stage(const ProblemInstance& inst, const ClusterMap& map,
                       const HypothesisSet& alive, ActionIndex action, double gamma,
                       ObservationSource& source,
                       std::uint64_t max_samples = kDefaultMaxSamplesPerStage);

/// Full multi-stage elimination run.
RunResult run(const ProblemInstance& inst, const ClusterMap& map, const PolicyConfig& cfg,
              HypothesisIndex true_h, ObservationSource& source, const RunLimits& limits = {});

/// Convenience overload: builds the cluster map and a simulated environment.
RunResult run(const ProblemInstance& inst, const PolicyConfig& cfg, HypothesisIndex true_h,
              RandomStream& rng);

// ---------------------------------------------------------------------------
// Delay predictions
// ---------------------------------------------------------------------------

/// Asymptotic expected stage length under H_i: the max over contestants j
/// other than i's representative k of gamma / (D(i||j) - D(i||k)).
/// Infinite when some gap is not positive.
double predicted_stage_delay(const ProblemInstance& inst, const ClusterMap& map,
                             const HypothesisSet& alive, ActionIndex action,
                             HypothesisIndex true_h, double gamma);

struct DelayBounds {
    double lower = 0.0;  // gamma / beta
    double upper = 0.0;  // max_a (H / eps_a) * gamma, infinite if some eps_a = 0
};

DelayBounds delay_bounds(std::size_t num_hypotheses, double delta, double beta,
                         const ClusteringConfig& clustering);

nlohmann::json to_json(const StageRecord& stage, std::size_t stage_number);

}  // namespace hypoelim
