#include <benchmark/benchmark.h>

#include "toolplan/executor.hpp"
#include "toolplan/explorer.hpp"
#include "toolplan/grpo.hpp"
#include "toolplan/planner.hpp"
#include "toolplan/reward.hpp"
#include "toolplan/toolworld.hpp"

namespace {

using namespace toolplan;

struct Fixture {
    ToolWorld world = generate_world(WorldConfig{20, 32, 5, 0.5}, 42);
    std::vector<Task> tasks = generate_tasks(world, TaskGenConfig{64, 2, 5, 0.1}, 7);
    KnowledgeBase kb = build_knowledge_base(world, 10, 3);
    PlannerParams params = init_planner(32, 20, 6, 1);
};

const Fixture& fixture() {
    static Fixture f;
    return f;
}

void BM_InvokeTool(benchmark::State& state) {
    const auto& f = fixture();
    const ToolSpec& tool = f.world.tools[0];
    const ToolCall call{tool.name, canonical_arguments(tool, std::nullopt)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(invoke_tool(f.world, call));
    }
}
BENCHMARK(BM_InvokeTool);

void BM_SamplePlan(benchmark::State& state) {
    const auto& f = fixture();
    Rng rng(99);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            sample_plan(f.params, f.world, f.tasks[0], rng, f.params.max_steps));
    }
}
BENCHMARK(BM_SamplePlan);

void BM_LogProbGradient(benchmark::State& state) {
    const auto& f = fixture();
    const Plan& plan = f.tasks[0].truth_plan;
    for (auto _ : state) {
        benchmark::DoNotOptimize(log_prob_gradient(f.params, f.tasks[0], plan, true));
    }
}
BENCHMARK(BM_LogProbGradient);

void BM_GroupUpdate(benchmark::State& state) {
    const auto& f = fixture();
    Rng rng(5);
    PlanGroup group = sample_group(f.params, f.world, f.tasks[0], 8, rng);
    for (const auto& s : group.samples) {
        group.rewards.push_back(plan_reward(s.plan, f.tasks[0].truth_plan).total);
    }
    group.advantages = normalize_advantages(group.rewards, 1e-8).first;
    const std::vector<PlanGroup> groups{group};
    for (auto _ : state) {
        benchmark::DoNotOptimize(grpo_gradient(f.params, groups, 0.2));
    }
}
BENCHMARK(BM_GroupUpdate);

void BM_ExecutePlan(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            execute_plan(f.world, f.tasks[0].truth_plan, f.tasks[0], &f.kb, 2));
    }
}
BENCHMARK(BM_ExecutePlan);

}  // namespace

BENCHMARK_MAIN();
