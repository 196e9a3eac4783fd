#include "hypoelim/elimination.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "hypoelim/errors.hpp"

namespace hypoelim {

namespace {

HypothesisSet intersect(const HypothesisSet& a, const HypothesisSet& b) {
    HypothesisSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::string describe(const HypothesisSet& set) {
    std::ostringstream os;
    os << '{';
    for (std::size_t n = 0; n < set.size(); ++n) os << (n ? "," : "") << set[n];
    os << '}';
    return os.str();
}

std::optional<StageOutcome> try_stage(StageState& state, double gamma, ObservationSource& source,
                                      std::uint64_t limit) {
    const ActionIndex action = state.action();
    std::optional<HypothesisIndex> found;
    while (!(found = state.winner(gamma))) {
        if (state.tau() >= limit) return std::nullopt;
        state.update(source.draw(action));
    }
    return StageOutcome{*found, state.tau(), state.count_winners(gamma), state.max_antisymmetry_error()};
}

}  // namespace

// ---------------------------------------------------------------------------

SampleSummary ObservationSource::draw_summary(ActionIndex action, std::uint64_t count) {
    SampleSummary s{count, 0.0};
    for (std::uint64_t n = 0; n < count; ++n) s.sum += draw(action);
    return s;
}

SimulatedEnvironment::SimulatedEnvironment(const ProblemInstance& inst, HypothesisIndex true_h,
                                           RandomStream& rng)
    : inst_(&inst), true_h_(true_h), rng_(&rng) {
    if (true_h >= inst.num_hypotheses()) throw UsageError("true hypothesis out of range");
    means_.reserve(inst.num_actions());
    for (ActionIndex a = 0; a < inst.num_actions(); ++a) means_.push_back(inst.param(a, true_h)[0]);
}

double SimulatedEnvironment::draw(ActionIndex action) {
    if (action >= means_.size()) throw UsageError("action out of range");
    ++observations_;
    switch (inst_->family(action)) {
        case Family::NormalUnitVariance: return means_[action] + normal_(rng_->engine());
        case Family::ExponentialByMean: return means_[action] * exponential_(rng_->engine());
    }
    throw UsageError("unknown family");
}

SampleSummary SimulatedEnvironment::draw_summary(ActionIndex action, std::uint64_t count) {
    if (action >= means_.size()) throw UsageError("action out of range");
    observations_ += count;
    return sample_summary(inst_->family(action), inst_->param(action, true_h_), count, *rng_);
}

// ---------------------------------------------------------------------------

void PolicyConfig::validate(const ProblemInstance& inst) const {
    if (!(delta > 0.0 && delta < 1.0)) throw UsageError("delta must lie in (0, 1)");
    clustering.validate(inst.num_actions());
    if (max_samples_per_stage < 1) throw UsageError("max_samples_per_stage must be >= 1");
    for (ActionIndex a : action_override) {
        if (a >= inst.num_actions()) throw UsageError("override action out of range");
    }
}

double elimination_threshold(std::size_t num_hypotheses, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw UsageError("delta must lie in (0, 1)");
    return std::log2(static_cast<double>(num_hypotheses) / delta);
}

// ---------------------------------------------------------------------------

StageState::StageState(const ProblemInstance& inst, ActionIndex action, HypothesisSet alive,
                       HypothesisSet contestants)
    : action_(action), alive_(std::move(alive)), contestants_(std::move(contestants)) {
    if (contestants_.size() < 2) throw UsageError("a stage needs at least two contestants");
    offset_.reserve(contestants_.size());
    slope_.reserve(contestants_.size());
    for (HypothesisIndex i : contestants_) {
        const LogDensityKernel kernel = log_density_kernel(inst.family(action), inst.param(action, i));
        offset_.push_back(kernel.offset);
        slope_.push_back(kernel.slope);
    }
    loglik_.assign(contestants_.size(), 0.0);
}

double StageState::llr_between(HypothesisIndex i, HypothesisIndex j) const {
    auto pos = [this](HypothesisIndex h) {
        auto it = std::lower_bound(contestants_.begin(), contestants_.end(), h);
        if (it == contestants_.end() || *it != h) throw UsageError("not a contestant: " + std::to_string(h));
        return static_cast<std::size_t>(it - contestants_.begin());
    };
    return llr(pos(i), pos(j));
}

std::optional<HypothesisIndex> StageState::winner(double gamma) const noexcept {
    std::size_t leader = 0;
    double best = -std::numeric_limits<double>::infinity();
    double second = best;
    for (std::size_t p = 0; p < loglik_.size(); ++p) {
        const double v = loglik_[p];
        if (v > best) {
            second = best;
            best = v;
            leader = p;
        } else if (v > second) {
            second = v;
        }
    }
    if (best - second >= gamma) return contestants_[leader];
    return std::nullopt;
}

std::size_t StageState::count_winners(double gamma) const {
    std::size_t winners = 0;
    for (std::size_t p = 0; p < loglik_.size(); ++p) {
        bool beats_all = true;
        for (std::size_t q = 0; q < loglik_.size() && beats_all; ++q) {
            if (p != q && !(llr(p, q) >= gamma)) beats_all = false;
        }
        winners += beats_all;
    }
    return winners;
}

double StageState::max_antisymmetry_error() const {
    double worst = 0.0;
    for (std::size_t p = 0; p < loglik_.size(); ++p) {
        for (std::size_t q = p + 1; q < loglik_.size(); ++q) {
            worst = std::max(worst, std::abs(llr(p, q) + llr(q, p)));
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------

ActionIndex select_action(const ProblemInstance& inst, const ClusterMap& map,
                          const HypothesisSet& alive) {
    if (alive.size() < 2) throw UsageError("select_action needs at least two alive hypotheses");
    std::optional<ActionIndex> best;
    double best_separation = -1.0;
    for (ActionIndex b = 0; b < inst.num_actions(); ++b) {
        double separation = std::numeric_limits<double>::infinity();
        bool separates = false;
        for (std::size_t x = 0; x < alive.size(); ++x) {
            for (std::size_t y = x + 1; y < alive.size(); ++y) {
                if (map.same_cluster(b, alive[x], alive[y])) continue;
                separates = true;
                separation = std::min(separation, inst.squared_distance(b, alive[x], alive[y]));
            }
        }
        if (separates && separation > best_separation) {
            best = b;
            best_separation = separation;
        }
    }
    if (!best) {
        throw NoSeparatingAction("no separating action: every action keeps alive hypotheses " +
                                 describe(alive) + " in one cluster");
    }
    return *best;
}

StageOutcome run_stage(const ProblemInstance& inst, const ClusterMap& map,
                       const HypothesisSet& alive, ActionIndex action, double gamma,
                       ObservationSource& source, std::uint64_t max_samples) {
    if (!(gamma > 0.0)) throw UsageError("stage threshold must be positive");
    StageState state(inst, action, alive, map.repr(alive, action));
    if (auto outcome = try_stage(state, gamma, source, max_samples)) return *outcome;
    throw StageOverrun("stage overrun: action " + std::to_string(action) + ", contestants " +
                       describe(state.contestants()) + ", no winner after " +
                       std::to_string(state.tau()) + " samples");
}

RunResult run(const ProblemInstance& inst, const ClusterMap& map, const PolicyConfig& cfg,
              HypothesisIndex true_h, ObservationSource& source, const RunLimits& limits) {
    cfg.validate(inst);
    if (true_h >= inst.num_hypotheses()) throw UsageError("true hypothesis out of range");
    const double gamma = elimination_threshold(inst.num_hypotheses(), cfg.delta);

    RunResult result;
    HypothesisSet alive = all_hypotheses(inst.num_hypotheses());
    while (alive.size() >= 2) {
        const std::size_t r = result.stages.size();
        const ActionIndex action =
            r < cfg.action_override.size() ? cfg.action_override[r] : select_action(inst, map, alive);
        HypothesisSet contestants = map.repr(alive, action);
        if (contestants.size() < 2) {
            throw NoSeparatingAction("override action " + std::to_string(action) +
                                     " does not separate alive hypotheses " + describe(alive));
        }

        std::uint64_t limit = cfg.max_samples_per_stage;
        bool trial_capped = false;
        if (limits.max_total_samples) {
            const std::uint64_t remaining =
                *limits.max_total_samples > result.total_samples ? *limits.max_total_samples - result.total_samples : 0;
            if (remaining < limit) {
                limit = remaining;
                trial_capped = true;
            }
        }

        StageState state(inst, action, alive, std::move(contestants));
        const auto outcome = try_stage(state, gamma, source, limit);
        if (!outcome) {
            if (trial_capped) {
                result.total_samples += state.tau();
                result.truncated = true;
                return result;
            }
            throw StageOverrun("stage " + std::to_string(r + 1) + " overrun: action " +
                               std::to_string(action) + ", contestants " +
                               describe(state.contestants()) + ", no winner after " +
                               std::to_string(state.tau()) + " samples (check epsilon)");
        }

        StageRecord record;
        record.action = action;
        record.tau = outcome->tau;
        record.winner = outcome->winner;
        record.contestants = state.contestants().size();
        record.winners_at_stop = outcome->winners_at_stop;
        record.antisymmetry_error = outcome->antisymmetry_error;
        record.alive_after = intersect(alive, map.equiv(outcome->winner, action));
        record.alive_before = std::move(alive);
        alive = record.alive_after;
        result.total_samples += outcome->tau;
        result.stages.push_back(std::move(record));
    }
    // The winner's own cluster always survives, so alive never empties.
    result.declared = alive.front();
    result.correct = result.declared == true_h;
    return result;
}

RunResult run(const ProblemInstance& inst, const PolicyConfig& cfg, HypothesisIndex true_h,
              RandomStream& rng) {
    const ClusterMap map = build_cluster_map(inst, cfg.clustering);
    SimulatedEnvironment env(inst, true_h, rng);
    return run(inst, map, cfg, true_h, env);
}

// ---------------------------------------------------------------------------

double predicted_stage_delay(const ProblemInstance& inst, const ClusterMap& map,
                             const HypothesisSet& alive, ActionIndex action,
                             HypothesisIndex true_h, double gamma) {
    const HypothesisSet contestants = map.repr(alive, action);
    auto rep = std::find_if(contestants.begin(), contestants.end(),
                            [&](HypothesisIndex c) { return map.same_cluster(action, c, true_h); });
    if (rep == contestants.end()) throw UsageError("true hypothesis has no alive representative");
    double worst = 0.0;
    for (HypothesisIndex j : contestants) {
        if (j == *rep) continue;
        const double gap = divergence_gap(inst, action, true_h, j, *rep);
        if (!(gap > 0.0)) return std::numeric_limits<double>::infinity();
        worst = std::max(worst, gamma / gap);
    }
    return worst;
}

DelayBounds delay_bounds(std::size_t num_hypotheses, double delta, double beta,
                         const ClusteringConfig& clustering) {
    const double gamma = elimination_threshold(num_hypotheses, delta);
    DelayBounds bounds;
    bounds.lower = gamma / beta;
    for (double eps : clustering.epsilon) {
        const double term = eps > 0.0 ? static_cast<double>(num_hypotheses) / eps * gamma
                                      : std::numeric_limits<double>::infinity();
        bounds.upper = std::max(bounds.upper, term);
    }
    return bounds;
}

nlohmann::json to_json(const StageRecord& stage, std::size_t stage_number) {
    return {{"stage", stage_number},
            {"action", stage.action},
            {"tau", stage.tau},
            {"winner", stage.winner},
            {"alive_before", stage.alive_before},
            {"alive_after", stage.alive_after}};
}

}  // namespace hypoelim
