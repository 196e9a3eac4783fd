#include "hypoelim/gjl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <gtest/gtest.h>

#include "hypoelim/errors.hpp"
#include "test_support.hpp"

namespace hypoelim {
namespace {

using testing::ScriptedSource;

ProblemInstance scalar_instance(const std::vector<std::vector<double>>& rows,
                                Family family = Family::NormalUnitVariance) {
    const std::size_t h = rows.front().size();
    std::vector<ActionSpec> actions;
    for (const auto& row : rows) {
        ActionSpec spec{family, {}};
        for (double m : row) spec.params.push_back(ParamVector{m});
        actions.push_back(std::move(spec));
    }
    return ProblemInstance(std::vector<double>(h, 1.0 / static_cast<double>(h)), std::move(actions));
}

TEST(GjlBudget, CeilOfThresholdOverMinDivergence) {
    // log2(1600) / 0.5 = 21.2877..., from tests/oracles/closed_forms.py.
    EXPECT_EQ(gjl_budget(elimination_threshold(16, 1e-2), 0.5), 22u);
    EXPECT_EQ(gjl_budget(4.0, 2.0), 2u);
    EXPECT_EQ(gjl_budget(0.1, 5.0), 1u);
    EXPECT_THROW(gjl_budget(1.0, 0.0), UsageError);
    EXPECT_THROW(gjl_budget(1.0, std::numeric_limits<double>::infinity()), UsageError);
}

TEST(ExactClasses, GroupsIdenticalParameters) {
    const auto inst = scalar_instance({{1.0, 2.0, 1.0, 3.0, 2.0}});
    EXPECT_EQ(exact_classes(inst, all_hypotheses(5), 0),
              (std::vector<HypothesisSet>{{0, 2}, {1, 4}, {3}}));
    EXPECT_EQ(exact_classes(inst, {2, 3}, 0), (std::vector<HypothesisSet>{{2}, {3}}));
}

TEST(GjlSelectAction, PrefersMoreEliminations) {
    // Action 0 splits into pairs, action 1 into singletons.
    const auto inst = scalar_instance({{0.0, 0.0, 1.0, 1.0}, {0.0, 1.0, 2.0, 3.0}});
    EXPECT_EQ(gjl_select_action(inst, all_hypotheses(4)), 1u);
    EXPECT_EQ(gjl_select_action(inst, {0, 2}), 0u);
}

TEST(GjlSelectAction, IdenticalActionsAreAnError) {
    const auto inst = scalar_instance({{1.0, 1.0, 4.0}, {2.0, 2.0, 2.0}});
    EXPECT_THROW(gjl_select_action(inst, {0, 1}), NoSeparatingAction);
    EXPECT_EQ(gjl_select_action(inst, {0, 2}), 0u);
}

TEST(GjlSelectAction, BenchmarkInstanceTakesFirstAllDistinctAction) {
    // Every action of the generated instance has distinct parameters, so
    // all tie on the largest class and the smallest index wins.
    const auto inst = generate_paper_instance(16, Family::NormalUnitVariance, 42);
    EXPECT_EQ(gjl_select_action(inst, all_hypotheses(16)), 0u);
    EXPECT_EQ(gjl_select_action(inst, {5, 9}), 0u);
}

TEST(GjlPlan, MinDivergenceOverAliveOnly) {
    const auto inst = scalar_instance({{0.0, 0.1, 1.0, 1.0}});
    const double gamma = 7.0;
    const auto plan = make_gjl_plan(inst, all_hypotheses(4), 0, gamma);
    EXPECT_DOUBLE_EQ(plan.d_min, 0.01 / (2.0 * kLn2));
    EXPECT_EQ(plan.tau_fixed, static_cast<std::uint64_t>(std::ceil(gamma / plan.d_min)));
    const auto narrow = make_gjl_plan(inst, {1, 2, 3}, 0, gamma);
    EXPECT_DOUBLE_EQ(narrow.d_min, 0.81 / (2.0 * kLn2));
    EXPECT_THROW(make_gjl_plan(inst, {2, 3}, 0, gamma), NoSeparatingAction);
}

TEST(GjlStage, DrawsExactlyTheBudgetAndKeepsWinningClass) {
    const auto inst = scalar_instance({{0.0, 2.0, 2.0, 5.0}});
    ScriptedSource script(std::vector<double>{2.1, 1.9, 2.4, 0.0});
    const GjlStagePlan plan{0, 3, 1.0};
    const auto outcome = gjl_stage(inst, all_hypotheses(4), plan, script);
    EXPECT_EQ(script.drawn(), 3u);
    EXPECT_EQ(outcome.winner, 1u);
    EXPECT_EQ(outcome.survivors, (HypothesisSet{1, 2}));
}

TEST(GjlStage, ExactTiesShareFate) {
    const auto inst = scalar_instance({{0.3, 1.0, 0.3, 1.6, 1.0}}, Family::ExponentialByMean);
    const auto all = all_hypotheses(5);
    const auto plan = make_gjl_plan(inst, all, 0, 4.0);
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        RandomStream rng(seed);
        SimulatedEnvironment env(inst, seed % 5, rng);
        const auto s = gjl_stage(inst, all, plan, env).survivors;
        auto has = [&](HypothesisIndex i) { return std::binary_search(s.begin(), s.end(), i); };
        EXPECT_EQ(has(0), has(2));
        EXPECT_EQ(has(1), has(4));
        EXPECT_FALSE(s.empty());
    }
}

TEST(GjlStage, SummaryMatchesPerSampleLikelihood) {
    // The winner picked from the block summary equals the argmax of the
    // per-sample log-likelihood sums.
    for (Family family : {Family::NormalUnitVariance, Family::ExponentialByMean}) {
        const auto inst = scalar_instance({{0.4, 0.9, 1.3, 2.2}}, family);
        const GjlStagePlan plan{0, 7, 1.0};
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            RandomStream rng(seed);
            std::vector<double> xs;
            for (int n = 0; n < 7; ++n) xs.push_back(sample(family, inst.param(0, seed % 4), rng));
            ScriptedSource script(xs);
            const auto outcome = gjl_stage(inst, all_hypotheses(4), plan, script);
            std::size_t best = 0;
            double best_ll = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < 4; ++i) {
                double ll = 0.0;
                for (double x : xs) ll += testing::oracle_log2_density(family, x, inst.param(0, i)[0]);
                if (ll > best_ll) {
                    best_ll = ll;
                    best = i;
                }
            }
            EXPECT_EQ(outcome.winner, best) << to_string(family) << " seed " << seed;
        }
    }
}

TEST(RunGjl, TwoHypothesesSingleFixedStage) {
    const auto inst = scalar_instance({{0.0, 1.0}});
    const std::uint64_t budget = gjl_budget(elimination_threshold(2, 1e-2), 1.0 / (2.0 * kLn2));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RandomStream rng(seed);
        const auto result = run_gjl(inst, 1e-2, 1, rng);
        ASSERT_EQ(result.stages.size(), 1u);
        EXPECT_EQ(result.total_samples, budget);
    }
}

TEST(RunGjl, RecordedBudgetsFollowFormula) {
    const auto inst = generate_paper_instance(8, Family::ExponentialByMean, 3);
    const double gamma = elimination_threshold(8, 1e-2);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        RandomStream rng(seed);
        const HypothesisIndex truth = draw_true_hypothesis(inst, rng);
        const auto result = run_gjl(inst, 1e-2, truth, rng);
        std::uint64_t total = 0;
        for (const auto& s : result.stages) {
            double d_min = std::numeric_limits<double>::infinity();
            for (HypothesisIndex l : s.alive_before) {
                for (HypothesisIndex m : s.alive_before) {
                    const double d = inst.kl(s.action, l, m);
                    if (l != m && d > 0.0) d_min = std::min(d_min, d);
                }
            }
            EXPECT_EQ(s.tau, static_cast<std::uint64_t>(std::ceil(gamma / d_min)));
            EXPECT_LT(s.alive_after.size(), s.alive_before.size());
            total += s.tau;
        }
        EXPECT_EQ(total, result.total_samples);
        EXPECT_GE(result.stages.size(), 1u);
        EXPECT_LE(result.stages.size(), 7u);
    }
}

TEST(RunGjl, SampleCountDeterminedBySurvivorPath) {
    const auto inst = generate_paper_instance(6, Family::NormalUnitVariance, 42);
    std::map<std::vector<HypothesisSet>, std::uint64_t> by_path;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        RandomStream rng(seed);
        const auto result = run_gjl(inst, 1e-2, seed % 6, rng);
        std::vector<HypothesisSet> path;
        for (const auto& s : result.stages) path.push_back(s.alive_after);
        auto [it, inserted] = by_path.emplace(path, result.total_samples);
        if (!inserted) EXPECT_EQ(it->second, result.total_samples);
    }
}

TEST(RunGjl, CapTruncatesBeforeOverspending) {
    const auto inst = generate_paper_instance(4, Family::NormalUnitVariance, 42);
    RandomStream rng(1);
    SimulatedEnvironment env(inst, 2, rng);
    const auto result = run_gjl(inst, 1e-2, 2, env, RunLimits{10});
    EXPECT_TRUE(result.truncated);
    EXPECT_LE(result.total_samples, 10u);
    EXPECT_EQ(env.observations(), result.total_samples);
}

TEST(RunGjl, OverrideSequence) {
    const auto inst = generate_paper_instance(4, Family::NormalUnitVariance, 42);
    RandomStream rng(1);
    SimulatedEnvironment env(inst, 2, rng);
    const auto result = run_gjl(inst, 1e-2, 2, env, {}, {4});
    ASSERT_FALSE(result.stages.empty());
    EXPECT_EQ(result.stages[0].action, 4u);
}

}  // namespace
}  // namespace hypoelim
