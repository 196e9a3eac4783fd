#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hypoelim/clustering.hpp"
#include "hypoelim/distributions.hpp"
#include "hypoelim/elimination.hpp"
#include "hypoelim/errors.hpp"
#include "hypoelim/gjl.hpp"
#include "hypoelim/harness.hpp"
#include "hypoelim/instance.hpp"

namespace fs = std::filesystem;
using namespace hypoelim;

namespace {

enum ExitCode : int { kOk = 0, kDomain = 1, kUsage = 2, kOverrun = 3 };

// Raised for bad combinations of otherwise well-formed flags.
struct CliError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Family parse_family(const std::string& name) {
    auto family = family_from_string(name);
    if (!family) throw CliError("unknown family \"" + name + "\" (expected normal or exponential)");
    return *family;
}

void check_out_path(const fs::path& out, bool force) {
    if (fs::exists(out) && !force) {
        throw CliError(out.string() + " already exists (use --force to overwrite)");
    }
}

// Warns about epsilon choices that break the clustered separation margin.
void warn_epsilon(const ProblemInstance& inst, const ClusteringConfig& clustering) {
    const ClusterMap map = build_cluster_map(inst, clustering);
    for (ActionIndex a = 0; a < inst.num_actions(); ++a) {
        const EpsilonMargin m = validate_epsilon(inst, map, a);
        if (m.uninformative()) {
            std::cerr << "warning: action " << a << " is a single cluster at epsilon "
                      << format_double(clustering.epsilon[a]) << '\n';
        } else if (!(*m.margin > 0.0)) {
            std::cerr << "warning: action " << a << " has divergence margin " << format_double(*m.margin)
                      << " <= 0 at epsilon " << format_double(clustering.epsilon[a])
                      << "; stages on it may not stop\n";
        }
    }
}

void require_separable(const ProblemInstance& inst) {
    const AssumptionReport report = verify_assumptions(inst);
    if (!report.a3_holds) {
        std::string pairs;
        for (const auto& p : report.violating_pairs) {
            pairs += " (" + std::to_string(p.first) + "," + std::to_string(p.second) + ")";
        }
        throw NoSeparatingAction("instance violates separability; inseparable pairs:" + pairs);
    }
}

// ---------------------------------------------------------------------------

struct GenOptions {
    std::size_t hypotheses = 16;
    std::string family = "normal";
    std::uint64_t seed = 0;
    fs::path out;
};

int cmd_gen(const GenOptions& o) {
    if (o.hypotheses < 2) throw UsageError("--hypotheses must be at least 2");
    const ProblemInstance inst = generate_paper_instance(o.hypotheses, parse_family(o.family), o.seed);
    save_instance(inst, o.out);
    std::cout << "hypotheses=" << inst.num_hypotheses() << " actions=" << inst.num_actions()
              << " family=" << to_string(inst.family(0)) << " out=" << o.out.string() << '\n';
    return kOk;
}

int cmd_verify(const fs::path& path) {
    const ProblemInstance inst = load_instance(path);
    const AssumptionReport report = verify_assumptions(inst);
    std::cout << to_json(report).dump() << '\n';
    return report.a1_holds && report.a3_holds ? kOk : kDomain;
}

struct RunOptions {
    fs::path instance;
    std::string algo = "elim";
    double delta = 1e-3;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    bool trace = false;
    std::uint64_t max_samples_per_stage = kDefaultMaxSamplesPerStage;
};

int cmd_run(const RunOptions& o) {
    const ProblemInstance inst = load_instance(o.instance);
    require_separable(inst);
    RandomStream rng(o.seed);
    const HypothesisIndex truth = draw_true_hypothesis(inst, rng);
    SimulatedEnvironment env(inst, truth, rng);

    RunResult result;
    std::string algorithm;
    if (o.algo == "elim" || o.algo == "elimination") {
        PolicyConfig cfg;
        cfg.delta = o.delta;
        cfg.clustering = ClusteringConfig::uniform(inst.num_actions(), o.epsilon);
        cfg.max_samples_per_stage = o.max_samples_per_stage;
        cfg.validate(inst);
        warn_epsilon(inst, cfg.clustering);
        result = run(inst, build_cluster_map(inst, cfg.clustering), cfg, truth, env);
        algorithm = "elimination";
    } else if (o.algo == "gjl") {
        if (!(o.delta > 0.0 && o.delta < 1.0)) throw UsageError("--delta must lie in (0, 1)");
        result = run_gjl(inst, o.delta, truth, env);
        algorithm = "gjl_as_described";
    } else {
        throw CliError("unknown --algo \"" + o.algo + "\" (expected elim or gjl)");
    }

    if (o.trace) {
        for (std::size_t r = 0; r < result.stages.size(); ++r) {
            std::cout << to_json(result.stages[r], r + 1).dump() << '\n';
        }
    }
    nlohmann::json line = {{"algorithm", algorithm},
                           {"epsilon", algorithm == "elimination" ? o.epsilon : 0.0},
                           {"delta", o.delta},
                           {"seed", o.seed},
                           {"true_hypothesis", truth},
                           {"declared", result.declared},
                           {"correct", result.correct},
                           {"total_samples", result.total_samples},
                           {"stages", result.stages.size()}};
    std::cout << line.dump() << '\n';
    return kOk;
}

struct SweepOptions {
    fs::path instance;
    fs::path config;
    std::vector<double> epsilons;
    bool gjl = false;
    std::vector<double> deltas;
    std::optional<std::size_t> trials;
    std::optional<std::size_t> gjl_trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> cap;
    std::optional<std::size_t> workers;
    fs::path out;
    bool force = false;
};

int cmd_sweep(const SweepOptions& o) {
    check_out_path(o.out, o.force);
    ExperimentConfig cfg;
    if (!o.config.empty()) {
        std::ifstream in(o.config);
        if (!in) throw std::ios_base::failure("cannot open " + o.config.string());
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError(o.config.string() + ": " + e.what());
        }
        cfg = experiment_config_from_json(doc);
    }
    if (!o.epsilons.empty() || o.gjl) {
        cfg.algorithms.clear();
        for (double eps : o.epsilons) cfg.algorithms.push_back(AlgorithmSpec::elimination(eps));
        if (o.gjl) cfg.algorithms.push_back(AlgorithmSpec::gjl());
    }
    if (!o.deltas.empty()) cfg.delta_grid = o.deltas;
    if (o.trials) cfg.trials_per_cell = *o.trials;
    if (o.gjl_trials) cfg.gjl_trials_per_cell = *o.gjl_trials;
    if (o.seed) cfg.master_seed = *o.seed;
    if (o.cap) cfg.trial_sample_cap = *o.cap;
    if (o.workers) cfg.workers = *o.workers;
    if (cfg.delta_grid.empty()) throw CliError("no delta grid (use --delta or a config file)");

    const ProblemInstance inst = load_instance(o.instance);
    require_separable(inst);
    cfg.instance = std::make_shared<const ProblemInstance>(inst);
    cfg.validate();
    for (const AlgorithmSpec& algorithm : cfg.algorithms) {
        if (algorithm.kind != AlgorithmKind::Elimination) continue;
        warn_epsilon(inst, algorithm.per_action_epsilon.empty()
                               ? ClusteringConfig::uniform(inst.num_actions(), algorithm.epsilon)
                               : ClusteringConfig{algorithm.per_action_epsilon, 1});
    }

    const ExperimentResult result = sweep(cfg);
    std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
    if (!out) throw std::ios_base::failure("cannot open " + o.out.string() + " for writing");
    write_csv(result, out);
    out.close();
    if (!out) throw std::ios_base::failure("failed writing " + o.out.string());
    if (!result.cells.empty()) std::cout << format_report(compare_report(result));
    return kOk;
}

int cmd_report(const fs::path& csv) {
    std::ifstream in(csv);
    if (!in) throw std::ios_base::failure("cannot open " + csv.string());
    std::cout << format_report(compare_report(read_csv(in)));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential multi-hypothesis testing by cluster-level elimination"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "hypoelim 0.1.0");

    GenOptions gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a benchmark instance");
    gen_cmd->add_option("--hypotheses", gen.hypotheses, "Number of hypotheses H")->required();
    gen_cmd->add_option("--family", gen.family, "normal or exponential")->required();
    gen_cmd->add_option("--seed", gen.seed, "Seed for the random means")->required();
    gen_cmd->add_option("--out", gen.out, "Instance JSON to write")->required();

    fs::path verify_path;
    auto* verify_cmd = app.add_subcommand("verify", "Check identifiability and separation of an instance");
    verify_cmd->add_option("instance", verify_path, "Instance JSON")->required();

    RunOptions run_opts;
    auto* run_cmd = app.add_subcommand("run", "Run one trial and print the result as JSON");
    run_cmd->add_option("instance", run_opts.instance, "Instance JSON")->required();
    run_cmd->add_option("--algo", run_opts.algo, "elim or gjl")->capture_default_str();
    run_cmd->add_option("--delta", run_opts.delta, "Risk parameter in (0,1)")->capture_default_str();
    run_cmd->add_option("--epsilon", run_opts.epsilon, "Squared-distance clustering threshold")
        ->capture_default_str();
    run_cmd->add_option("--seed", run_opts.seed, "Trial seed")->capture_default_str();
    run_cmd->add_option("--max-samples-per-stage", run_opts.max_samples_per_stage, "Stage overrun limit")
        ->capture_default_str();
    run_cmd->add_flag("--trace", run_opts.trace, "Print one JSON line per stage");

    SweepOptions sweep_opts;
    auto* sweep_cmd = app.add_subcommand("sweep", "Monte-Carlo sweep over algorithms and deltas");
    sweep_cmd->add_option("instance", sweep_opts.instance, "Instance JSON")->required();
    sweep_cmd->add_option("--config", sweep_opts.config, "Sweep configuration JSON");
    sweep_cmd->add_option("--epsilon", sweep_opts.epsilons, "Add an elimination run with this epsilon")
        ->delimiter(',');
    sweep_cmd->add_flag("--gjl", sweep_opts.gjl, "Add the fixed-budget baseline");
    sweep_cmd->add_option("--delta", sweep_opts.deltas, "Delta grid, strictly decreasing")->delimiter(',');
    sweep_cmd->add_option("--trials", sweep_opts.trials, "Trials per elimination cell");
    sweep_cmd->add_option("--gjl-trials", sweep_opts.gjl_trials, "Trials per baseline cell");
    sweep_cmd->add_option("--seed", sweep_opts.seed, "Master seed");
    sweep_cmd->add_option("--cap", sweep_opts.cap, "Per-trial sample cap");
    sweep_cmd->add_option("--workers", sweep_opts.workers, "Worker threads (0 = all cores)")
        ->envname("HYPOELIM_WORKERS");
    sweep_cmd->add_option("--out", sweep_opts.out, "CSV to write")->required();
    sweep_cmd->add_flag("--force", sweep_opts.force, "Overwrite an existing --out file");

    fs::path report_path;
    auto* report_cmd = app.add_subcommand("report", "Rank algorithms in a sweep CSV");
    report_cmd->add_option("csv", report_path, "Sweep CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*gen_cmd) return cmd_gen(gen);
        if (*verify_cmd) return cmd_verify(verify_path);
        if (*run_cmd) return cmd_run(run_opts);
        if (*sweep_cmd) return cmd_sweep(sweep_opts);
        if (*report_cmd) return cmd_report(report_path);
    } catch (const StageOverrun& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kOverrun;
    } catch (const NoSeparatingAction& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDomain;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
