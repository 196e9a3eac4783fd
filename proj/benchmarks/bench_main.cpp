#include <benchmark/benchmark.h>

#include "hypoelim/clustering.hpp"
#include "hypoelim/elimination.hpp"
#include "hypoelim/gjl.hpp"
#include "hypoelim/harness.hpp"
#include "hypoelim/instance.hpp"

using namespace hypoelim;

namespace {

const ProblemInstance& benchmark_instance() {
    static const ProblemInstance inst = generate_paper_instance(16, Family::NormalUnitVariance, 42);
    return inst;
}

// Observations per second through a 16-contestant stage.
void BM_StageUpdate(benchmark::State& state) {
    const auto& inst = benchmark_instance();
    StageState stage(inst, 1, all_hypotheses(16), all_hypotheses(16));
    RandomStream rng(1);
    SimulatedEnvironment env(inst, 3, rng);
    for (auto _ : state) {
        stage.update(env.draw(1));
        benchmark::DoNotOptimize(stage.winner(1e300));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StageUpdate);

void BM_EliminationRun(benchmark::State& state) {
    const auto& inst = benchmark_instance();
    PolicyConfig cfg;
    cfg.delta = 1e-3;
    cfg.clustering = ClusteringConfig::uniform(inst.num_actions(), static_cast<double>(state.range(0)) / 100.0);
    const ClusterMap map = build_cluster_map(inst, cfg.clustering);
    std::uint64_t t = 0, samples = 0;
    for (auto _ : state) {
        RandomStream rng = RandomStream::derive(7, {t++});
        const HypothesisIndex truth = draw_true_hypothesis(inst, rng);
        SimulatedEnvironment env(inst, truth, rng);
        samples += run(inst, map, cfg, truth, env).total_samples;
    }
    state.counters["samples_per_run"] = benchmark::Counter(static_cast<double>(samples),
                                                           benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_EliminationRun)->Arg(0)->Arg(10)->Unit(benchmark::kMicrosecond);

void BM_GjlRun(benchmark::State& state) {
    const auto& inst = benchmark_instance();
    std::uint64_t t = 0;
    for (auto _ : state) {
        RandomStream rng = RandomStream::derive(8, {t++});
        const HypothesisIndex truth = draw_true_hypothesis(inst, rng);
        benchmark::DoNotOptimize(run_gjl(inst, 1e-3, truth, rng));
    }
}
BENCHMARK(BM_GjlRun)->Unit(benchmark::kMicrosecond);

void BM_BuildClusterMap(benchmark::State& state) {
    const auto inst = generate_paper_instance(static_cast<std::size_t>(state.range(0)),
                                              Family::NormalUnitVariance, 42);
    const auto cfg = ClusteringConfig::uniform(inst.num_actions(), 0.1);
    for (auto _ : state) benchmark::DoNotOptimize(build_cluster_map(inst, cfg));
}
BENCHMARK(BM_BuildClusterMap)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_SelectAction(benchmark::State& state) {
    const auto& inst = benchmark_instance();
    const ClusterMap map = build_cluster_map(inst, ClusteringConfig::uniform(inst.num_actions(), 0.1));
    const HypothesisSet alive = all_hypotheses(16);
    for (auto _ : state) benchmark::DoNotOptimize(select_action(inst, map, alive));
}
BENCHMARK(BM_SelectAction);

void BM_RunCell(benchmark::State& state) {
    const auto& inst = benchmark_instance();
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_cell(inst, AlgorithmSpec::elimination(0.1), 1e-3, 1000, 1,
                                          {static_cast<std::size_t>(state.range(0)), {}}));
    }
}
BENCHMARK(BM_RunCell)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
