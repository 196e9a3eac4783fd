#include "hypoelim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <exception>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "hypoelim/clustering.hpp"
#include "hypoelim/elimination.hpp"
#include "hypoelim/errors.hpp"
#include "hypoelim/gjl.hpp"

namespace hypoelim {

namespace {

struct TrialRecord {
    std::uint64_t n = 0;
    bool correct = false;
    bool truncated = false;
    std::size_t stages = 0;
    std::uint64_t winner_violations = 0;
    double antisymmetry_error = 0.0;
    bool monotone = true;
    std::exception_ptr error;
};

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::size_t resolve_workers(std::size_t requested, std::size_t trials) {
    std::size_t workers = requested;
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    return std::max<std::size_t>(1, std::min(workers, trials));
}

std::string family_text(const ProblemInstance& inst) {
    const Family first = inst.family(0);
    for (const auto& spec : inst.actions()) {
        if (spec.family != first) return "mixed";
    }
    return std::string(to_string(first));
}

[[noreturn]] void rethrow_with_context(std::exception_ptr error, const std::string& context) {
    try {
        std::rethrow_exception(error);
    } catch (const StageOverrun& e) {
        throw StageOverrun(context + e.what());
    } catch (const NoSeparatingAction& e) {
        throw NoSeparatingAction(context + e.what());
    } catch (const UsageError& e) {
        throw UsageError(context + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error(context + e.what());
    }
}

int expected_rank(const std::string& algorithm, const std::string& epsilon) {
    if (algorithm == "gjl_as_described") return 2;
    if (epsilon == "0") return 1;
    return 0;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& text) {
    if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw SchemaError("bad number in CSV: \"" + text + "\"");
    }
    return value;
}

std::size_t parse_count(const std::string& text) {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw SchemaError("bad count in CSV: \"" + text + "\"");
    }
    return value;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string AlgorithmSpec::name() const {
    return kind == AlgorithmKind::Elimination ? "elimination" : "gjl_as_described";
}

std::string AlgorithmSpec::epsilon_text() const {
    if (kind == AlgorithmKind::GjlAsDescribed) return "0";
    if (!per_action_epsilon.empty()) return "per-action";
    return format_double(epsilon);
}

std::string AlgorithmSpec::label() const {
    std::string out = name() + "(eps=" + epsilon_text();
    if (!per_action_epsilon.empty()) {
        for (double e : per_action_epsilon) out += ":" + format_double(e);
    }
    return out + ")";
}

void ExperimentConfig::validate() const {
    if (!instance) throw UsageError("experiment has no instance");
    for (std::size_t d = 0; d < delta_grid.size(); ++d) {
        if (!(delta_grid[d] > 0.0 && delta_grid[d] < 1.0)) throw UsageError("delta values must lie in (0, 1)");
        if (d > 0 && !(delta_grid[d] < delta_grid[d - 1])) {
            throw UsageError("delta grid must be strictly decreasing");
        }
    }
    if (trials_per_cell < 1 || gjl_trials_per_cell < 1) throw UsageError("trials per cell must be >= 1");
    for (const auto& algorithm : algorithms) {
        if (algorithm.trials && *algorithm.trials < 1) throw UsageError("trials per cell must be >= 1");
        if (algorithm.kind != AlgorithmKind::Elimination) continue;
        if (!algorithm.per_action_epsilon.empty() &&
            algorithm.per_action_epsilon.size() != instance->num_actions()) {
            throw UsageError("per-action epsilon needs one value per action");
        }
        auto check = [](double e) {
            if (!std::isfinite(e) || e < 0.0) throw UsageError("epsilon must be finite and >= 0");
        };
        check(algorithm.epsilon);
        std::for_each(algorithm.per_action_epsilon.begin(), algorithm.per_action_epsilon.end(), check);
    }
}

std::size_t ExperimentConfig::trials_for(const AlgorithmSpec& algorithm) const {
    if (algorithm.trials) return *algorithm.trials;
    return algorithm.kind == AlgorithmKind::GjlAsDescribed ? gjl_trials_per_cell : trials_per_cell;
}

// ---------------------------------------------------------------------------

double wilson_upper(std::size_t errors, std::size_t trials, double z) {
    if (trials == 0) return 1.0;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(errors) / n;
    const double z2 = z * z;
    const double centre = p + z2 / (2.0 * n);
    const double spread = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return std::min(1.0, (centre + spread) / (1.0 + z2 / n));
}

double average_bayes_risk(double delta, std::size_t num_hypotheses, double mean_n, double p_e) {
    const double h = static_cast<double>(num_hypotheses);
    return delta / (h * h) * mean_n + p_e;
}

std::uint64_t cell_seed(std::uint64_t master_seed, const AlgorithmSpec& algorithm,
                        std::size_t delta_index) {
    return RandomStream::derive_seed(master_seed, {fnv1a(algorithm.label()), delta_index});
}

CellStats run_cell(const ProblemInstance& inst, const AlgorithmSpec& algorithm, double delta,
                   std::size_t trials, std::uint64_t seed, const CellOptions& options) {
    if (trials < 1) throw UsageError("a cell needs at least one trial");
    if (!(delta > 0.0 && delta < 1.0)) throw UsageError("delta must lie in (0, 1)");

    PolicyConfig policy;
    policy.delta = delta;
    std::optional<ClusterMap> map;
    if (algorithm.kind == AlgorithmKind::Elimination) {
        policy.clustering = algorithm.per_action_epsilon.empty()
                                ? ClusteringConfig::uniform(inst.num_actions(), algorithm.epsilon)
                                : ClusteringConfig{algorithm.per_action_epsilon, 1};
        policy.validate(inst);
        map = build_cluster_map(inst, policy.clustering);
    }
    const RunLimits limits{options.trial_sample_cap};

    std::vector<TrialRecord> records(trials);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (std::size_t t = next.fetch_add(1); t < trials && !failed.load(); t = next.fetch_add(1)) {
            TrialRecord& rec = records[t];
            try {
                RandomStream rng = RandomStream::derive(seed, {t});
                const HypothesisIndex true_h = draw_true_hypothesis(inst, rng);
                SimulatedEnvironment env(inst, true_h, rng);
                const RunResult result = algorithm.kind == AlgorithmKind::Elimination
                                             ? run(inst, *map, policy, true_h, env, limits)
                                             : run_gjl(inst, delta, true_h, env, limits);
                rec.n = result.total_samples;
                rec.correct = result.correct;
                rec.truncated = result.truncated;
                rec.stages = result.stages.size();
                for (const StageRecord& stage : result.stages) {
                    if (stage.winners_at_stop != 1) ++rec.winner_violations;
                    rec.antisymmetry_error = std::max(rec.antisymmetry_error, stage.antisymmetry_error);
                    if (stage.alive_after.empty() || stage.alive_after.size() >= stage.alive_before.size()) {
                        rec.monotone = false;
                    }
                }
            } catch (...) {
                rec.error = std::current_exception();
                failed.store(true);
            }
        }
    };

    const std::size_t workers = resolve_workers(options.workers, trials);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    for (std::size_t t = 0; t < trials; ++t) {
        if (records[t].error) {
            rethrow_with_context(records[t].error, "trial " + std::to_string(t) + " (cell seed " +
                                                       std::to_string(seed) + "): ");
        }
    }

    CellStats cell;
    cell.algorithm = algorithm.name();
    cell.epsilon = algorithm.epsilon_text();
    cell.family = family_text(inst);
    cell.delta = delta;
    cell.requested_trials = trials;
    cell.min_n = std::numeric_limits<std::uint64_t>::max();
    cell.min_stages_per_trial = std::numeric_limits<std::size_t>::max();

    double sum_n = 0.0;
    for (const TrialRecord& rec : records) {
        if (rec.truncated) {
            cell.capped = true;
            continue;
        }
        ++cell.trials;
        cell.errors += rec.correct ? 0 : 1;
        sum_n += static_cast<double>(rec.n);
        cell.min_n = std::min(cell.min_n, rec.n);
        cell.max_n = std::max(cell.max_n, rec.n);
        cell.stages += rec.stages;
        cell.winner_violations += rec.winner_violations;
        cell.max_antisymmetry_error = std::max(cell.max_antisymmetry_error, rec.antisymmetry_error);
        cell.min_stages_per_trial = std::min(cell.min_stages_per_trial, rec.stages);
        cell.max_stages_per_trial = std::max(cell.max_stages_per_trial, rec.stages);
        cell.monotone_elimination = cell.monotone_elimination && rec.monotone;
    }
    if (cell.trials == 0) {
        cell.mean_n = cell.stderr_n = cell.p_e_hat = cell.abr = std::numeric_limits<double>::quiet_NaN();
        cell.p_e_wilson_upper = 1.0;
        cell.min_n = 0;
        cell.min_stages_per_trial = 0;
        return cell;
    }
    const double n = static_cast<double>(cell.trials);
    cell.mean_n = sum_n / n;
    double squares = 0.0;
    for (const TrialRecord& rec : records) {
        if (rec.truncated) continue;
        const double d = static_cast<double>(rec.n) - cell.mean_n;
        squares += d * d;
    }
    cell.stderr_n = cell.trials > 1 ? std::sqrt(squares / (n - 1.0) / n) : 0.0;
    cell.p_e_hat = static_cast<double>(cell.errors) / n;
    cell.p_e_wilson_upper = wilson_upper(cell.errors, cell.trials);
    cell.abr = average_bayes_risk(delta, inst.num_hypotheses(), cell.mean_n, cell.p_e_hat);
    return cell;
}

ExperimentResult sweep(const ExperimentConfig& config) {
    config.validate();
    ExperimentResult result;
    result.num_hypotheses = config.instance->num_hypotheses();
    const CellOptions options{config.workers, config.trial_sample_cap};
    for (const AlgorithmSpec& algorithm : config.algorithms) {
        for (std::size_t d = 0; d < config.delta_grid.size(); ++d) {
            result.cells.push_back(run_cell(*config.instance, algorithm, config.delta_grid[d],
                                            config.trials_for(algorithm),
                                            cell_seed(config.master_seed, algorithm, d), options));
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buffer[64];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, ptr);
}

void write_csv(const ExperimentResult& result, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const CellStats& c : result.cells) {
        out << c.algorithm << ',' << c.family << ',' << format_double(c.delta) << ',' << c.epsilon << ','
            << c.trials << ',' << c.errors << ',' << format_double(c.p_e_hat) << ','
            << format_double(c.p_e_wilson_upper) << ',' << format_double(c.mean_n) << ','
            << format_double(c.stderr_n) << ',' << format_double(c.abr) << ','
            << (c.capped ? "true" : "false") << '\n';
    }
}

std::string to_csv(const ExperimentResult& result) {
    std::ostringstream os;
    write_csv(result, os);
    return os.str();
}

ExperimentResult read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw SchemaError("CSV header does not match");
    ExperimentResult result;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 12) throw SchemaError("CSV row " + std::to_string(row) + " has " +
                                              std::to_string(f.size()) + " fields");
        CellStats c;
        c.algorithm = f[0];
        c.family = f[1];
        c.delta = parse_double(f[2]);
        c.epsilon = f[3];
        c.trials = parse_count(f[4]);
        c.errors = parse_count(f[5]);
        c.p_e_hat = parse_double(f[6]);
        c.p_e_wilson_upper = parse_double(f[7]);
        c.mean_n = parse_double(f[8]);
        c.stderr_n = parse_double(f[9]);
        c.abr = parse_double(f[10]);
        if (f[11] != "true" && f[11] != "false") throw SchemaError("bad capped flag in CSV");
        c.capped = f[11] == "true";
        c.requested_trials = c.trials;
        result.cells.push_back(std::move(c));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Ranking
// ---------------------------------------------------------------------------

bool CompareReport::ordering_violated() const {
    return std::any_of(by_delta.begin(), by_delta.end(),
                       [](const DeltaRanking& d) { return !d.violations.empty(); });
}

CompareReport compare_report(const ExperimentResult& result) {
    CompareReport report;
    for (const CellStats& cell : result.cells) {
        auto it = std::find_if(report.by_delta.begin(), report.by_delta.end(),
                               [&](const DeltaRanking& d) { return d.delta == cell.delta; });
        if (it == report.by_delta.end()) {
            report.by_delta.push_back({cell.delta, {}, {}});
            it = std::prev(report.by_delta.end());
        }
        it->entries.push_back({cell.algorithm, cell.epsilon, cell.mean_n, 1.0});
    }
    for (DeltaRanking& d : report.by_delta) {
        std::stable_sort(d.entries.begin(), d.entries.end(),
                         [](const RankedEntry& a, const RankedEntry& b) { return a.mean_n < b.mean_n; });
        const double best = d.entries.front().mean_n;
        for (RankedEntry& e : d.entries) e.ratio_to_best = best > 0.0 ? e.mean_n / best : 1.0;
        for (const RankedEntry& a : d.entries) {
            for (const RankedEntry& b : d.entries) {
                if (expected_rank(a.algorithm, a.epsilon) < expected_rank(b.algorithm, b.epsilon) &&
                    a.mean_n > b.mean_n) {
                    d.violations.push_back(a.algorithm + "(eps=" + a.epsilon + ") mean_n " +
                                           format_double(a.mean_n) + " exceeds " + b.algorithm +
                                           "(eps=" + b.epsilon + ") mean_n " + format_double(b.mean_n));
                }
            }
        }
    }
    return report;
}

std::string format_report(const CompareReport& report) {
    std::ostringstream os;
    for (const DeltaRanking& d : report.by_delta) {
        os << "delta=" << format_double(d.delta) << '\n';
        for (const RankedEntry& e : d.entries) {
            char line[160];
            std::snprintf(line, sizeof line, "  %-18s eps=%-10s mean_n=%-14.6g x%.4g\n", e.algorithm.c_str(),
                          e.epsilon.c_str(), e.mean_n, e.ratio_to_best);
            os << line;
        }
        if (d.violations.empty()) {
            os << "  ordering: ok\n";
        } else {
            for (const auto& v : d.violations) os << "  ordering violated: " << v << '\n';
        }
    }
    return os.str();
}

// ---------------------------------------------------------------------------

ExperimentConfig experiment_config_from_json(const nlohmann::json& doc) {
    try {
        if (!doc.is_object()) throw SchemaError("sweep config must be a JSON object");
        ExperimentConfig cfg;
        if (doc.contains("algorithms")) {
            for (const auto& entry : doc.at("algorithms")) {
                const auto kind = entry.at("kind").get<std::string>();
                AlgorithmSpec spec;
                if (kind == "elimination" || kind == "elim") {
                    spec.kind = AlgorithmKind::Elimination;
                    if (entry.contains("epsilon")) {
                        const auto& eps = entry.at("epsilon");
                        if (eps.is_array()) {
                            spec.per_action_epsilon = eps.get<std::vector<double>>();
                        } else {
                            spec.epsilon = eps.get<double>();
                        }
                    }
                } else if (kind == "gjl" || kind == "gjl_as_described") {
                    spec.kind = AlgorithmKind::GjlAsDescribed;
                } else {
                    throw SchemaError("unknown algorithm kind \"" + kind + "\"");
                }
                if (entry.contains("trials")) spec.trials = entry.at("trials").get<std::size_t>();
                cfg.algorithms.push_back(std::move(spec));
            }
        }
        if (doc.contains("delta_grid")) cfg.delta_grid = doc.at("delta_grid").get<std::vector<double>>();
        if (doc.contains("trials_per_cell")) cfg.trials_per_cell = doc.at("trials_per_cell").get<std::size_t>();
        if (doc.contains("gjl_trials_per_cell")) {
            cfg.gjl_trials_per_cell = doc.at("gjl_trials_per_cell").get<std::size_t>();
        }
        if (doc.contains("master_seed")) cfg.master_seed = doc.at("master_seed").get<std::uint64_t>();
        if (doc.contains("trial_sample_cap") && !doc.at("trial_sample_cap").is_null()) {
            cfg.trial_sample_cap = doc.at("trial_sample_cap").get<std::uint64_t>();
        }
        if (doc.contains("workers")) cfg.workers = doc.at("workers").get<std::size_t>();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed sweep config: ") + e.what());
    }
}

}  // namespace hypoelim
