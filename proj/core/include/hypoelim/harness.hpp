#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hypoelim/instance.hpp"

namespace hypoelim {

enum class AlgorithmKind { Elimination, GjlAsDescribed };

struct AlgorithmSpec {
    AlgorithmKind kind = AlgorithmKind::Elimination;
    double epsilon = 0.0;                     // uniform proximity parameter
    std::vector<double> per_action_epsilon;   // overrides `epsilon` when non-empty
    std::optional<std::size_t> trials;        // cell-level override of the trial count

    static AlgorithmSpec elimination(double eps) { return {AlgorithmKind::Elimination, eps, {}, {}}; }
    static AlgorithmSpec gjl() { return {AlgorithmKind::GjlAsDescribed, 0.0, {}, {}}; }

    /// "elimination" or "gjl_as_described".
    std::string name() const;
    /// Shortest round-trip epsilon, or "per-action".
    std::string epsilon_text() const;
    /// name plus epsilon; also seeds the algorithm's random streams.
    std::string label() const;
};

inline constexpr std::size_t kDefaultEliminationTrials = 10'000;
inline constexpr std::size_t kDefaultGjlTrials = 100;

struct ExperimentConfig {
    std::shared_ptr<const ProblemInstance> instance;
    std::vector<AlgorithmSpec> algorithms;
    std::vector<double> delta_grid;  // strictly decreasing, inside (0,1)
    std::size_t trials_per_cell = kDefaultEliminationTrials;
    std::size_t gjl_trials_per_cell = kDefaultGjlTrials;
    std::uint64_t master_seed = 0;
    std::optional<std::uint64_t> trial_sample_cap;
    std::size_t workers = 0;  // 0 = available parallelism

    void validate() const;
    std::size_t trials_for(const AlgorithmSpec& algorithm) const;
};

struct CellStats {
    std::string algorithm;  // AlgorithmSpec::name()
    std::string epsilon;    // AlgorithmSpec::epsilon_text()
    std::string family;
    double delta = 0.0;
    std::size_t trials = 0;  // completed trials
    std::size_t errors = 0;
    double p_e_hat = 0.0;
    double p_e_wilson_upper = 0.0;
    double mean_n = 0.0;
    double stderr_n = 0.0;
    double abr = 0.0;
    bool capped = false;  // some trials hit the sample cap and were dropped

    // Diagnostics, not part of the CSV.
    std::size_t requested_trials = 0;
    std::uint64_t stages = 0;
    std::uint64_t winner_violations = 0;  // stages that stopped without exactly one winner
    double max_antisymmetry_error = 0.0;
    std::size_t min_stages_per_trial = 0;
    std::size_t max_stages_per_trial = 0;
    bool monotone_elimination = true;
    std::uint64_t min_n = 0;
    std::uint64_t max_n = 0;
};

struct ExperimentResult {
    std::size_t num_hypotheses = 0;
    std::vector<CellStats> cells;
};

struct CellOptions {
    std::size_t workers = 0;
    std::optional<std::uint64_t> trial_sample_cap;
};

/// Runs `trials` independent trials. Trial t uses RandomStream::derive(seed, {t})
/// to draw the true hypothesis and its observations; aggregation is in trial
/// order, so the result does not depend on the number of workers.
CellStats run_cell(const ProblemInstance& inst, const AlgorithmSpec& algorithm, double delta,
                   std::size_t trials, std::uint64_t seed, const CellOptions& options = {});

/// Seed of the (algorithm, delta index) cell under a master seed.
std::uint64_t cell_seed(std::uint64_t master_seed, const AlgorithmSpec& algorithm,
                        std::size_t delta_index);

ExperimentResult sweep(const ExperimentConfig& config);

double wilson_upper(std::size_t errors, std::size_t trials, double z = 1.959963984540054);
double average_bayes_risk(double delta, std::size_t num_hypotheses, double mean_n, double p_e);

// CSV with header
//   algorithm,family,delta,epsilon,trials,errors,p_e_hat,p_e_wilson_upper,mean_n,stderr_n,abr,capped
inline constexpr const char* kCsvHeader =
    "algorithm,family,delta,epsilon,trials,errors,p_e_hat,p_e_wilson_upper,mean_n,stderr_n,abr,capped";

std::string format_double(double value);
void write_csv(const ExperimentResult& result, std::ostream& out);
std::string to_csv(const ExperimentResult& result);
/// Parses a CSV produced by write_csv. Throws SchemaError.
ExperimentResult read_csv(std::istream& in);

struct RankedEntry {
    std::string algorithm;
    std::string epsilon;
    double mean_n = 0.0;
    double ratio_to_best = 1.0;
};

struct DeltaRanking {
    double delta = 0.0;
    std::vector<RankedEntry> entries;  // ascending mean_n
    std::vector<std::string> violations;
};

struct CompareReport {
    std::vector<DeltaRanking> by_delta;  // in order of first appearance
    bool ordering_violated() const;
};

/// Per delta, sorts algorithms by mean_n and flags any pair breaking the
/// expected order: clustered elimination < unclustered elimination < GJL.
CompareReport compare_report(const ExperimentResult& result);
std::string format_report(const CompareReport& report);

/// Sweep configuration file, mirroring ExperimentConfig without the instance.
ExperimentConfig experiment_config_from_json(const nlohmann::json& doc);

}  // namespace hypoelim
