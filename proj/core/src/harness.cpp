#include "toolplan/harness.hpp"

#include <algorithm>
#include <stdexcept>

namespace toolplan {

namespace {

constexpr std::uint64_t kSplitTag = 0x6576616cULL;     // "eval"
constexpr std::uint64_t kInitTag = 0x696e6974ULL;      // "init"
constexpr std::uint64_t kExploreTag = 0x6b62ULL;       // "kb"

bool plans_equal(const Plan& a, const Plan& b) {
    if (a.size() != b.size()) return false;
    for (int i = 0; i < a.size(); ++i) {
        if (a.steps[i].tool_id != b.steps[i].tool_id) return false;
    }
    return true;
}

}  // namespace

const char* ablation_variant_name(AblationVariant v) {
    switch (v) {
        case AblationVariant::NoPlanningReward: return "no_planning_reward";
        case AblationVariant::NoExploration: return "no_exploration";
    }
    return "unknown";
}

Metrics evaluate_plans(const ToolWorld& world, const std::vector<Task>& tasks,
                       const std::vector<Plan>& plans, const KnowledgeBase* kb, int retry_budget) {
    if (tasks.empty()) throw std::invalid_argument("evaluation needs at least one task");
    if (plans.size() != tasks.size()) {
        throw std::invalid_argument("one plan per task is required");
    }

    Metrics metrics;
    metrics.tasks_total = static_cast<long>(tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (plans_equal(plans[i], tasks[i].truth_plan)) {
            metrics.plan_exact_match_rate += 1.0;
        }
        const ExecutionTrace trace = execute_plan(world, plans[i], tasks[i], kb, retry_budget);
        metrics.calls_attempted += trace.calls_attempted;
        metrics.calls_errored += trace.calls_errored;
        if (trace.final_output.has_value() && *trace.final_output == tasks[i].answer) {
            ++metrics.tasks_succeeded;
        }
    }
    metrics.plan_exact_match_rate /= static_cast<double>(metrics.tasks_total);
    metrics.success_rate = static_cast<double>(metrics.tasks_succeeded) /
                           static_cast<double>(metrics.tasks_total);
    metrics.invocation_error_rate =
        metrics.calls_attempted == 0
            ? 0.0
            : static_cast<double>(metrics.calls_errored) /
                  static_cast<double>(metrics.calls_attempted);
    return metrics;
}

Metrics evaluate(const ToolWorld& world, const std::vector<Task>& tasks,
                 const PlannerParams& params, const KnowledgeBase* kb, int retry_budget) {
    if (tasks.empty()) throw std::invalid_argument("evaluation needs at least one task");
    std::vector<Plan> plans;
    plans.reserve(tasks.size());
    for (const auto& task : tasks) {
        plans.push_back(decode_greedy(params, world, task, params.max_steps));
    }
    return evaluate_plans(world, tasks, plans, kb, retry_budget);
}

Plan random_baseline_plan(const ToolWorld& world, const Task& task, Rng& rng, int max_steps) {
    if (max_steps < 1) throw std::invalid_argument("max_steps must be positive");
    // Stopping before each step with probability 1/(m+1) gives a mean length
    // of m, so averaged over tasks the baseline matches the depth range mean.
    const double stop_p = 1.0 / static_cast<double>(task.depth() + 1);
    Plan plan;
    for (int i = 0; i < max_steps; ++i) {
        if (rng.uniform() < stop_p) break;
        const int tool = static_cast<int>(rng.uniform_int(world.num_tools()));
        plan.steps.push_back(PlanStep{make_sub_query(i, world.tools[tool].name), tool});
    }
    return plan;
}

std::pair<std::vector<Task>, std::vector<Task>> split_tasks(const std::vector<Task>& tasks,
                                                            double holdout_fraction,
                                                            std::uint64_t seed) {
    if (holdout_fraction < 0.0 || holdout_fraction >= 1.0) {
        throw std::invalid_argument("holdout_fraction must lie in [0, 1)");
    }
    std::vector<std::size_t> indices(tasks.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    Rng rng(derive_seed(seed, kSplitTag));
    rng.shuffle(indices);

    const auto holdout_count = static_cast<std::size_t>(
        holdout_fraction * static_cast<double>(tasks.size()));
    std::pair<std::vector<Task>, std::vector<Task>> result;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        (i < holdout_count ? result.second : result.first).push_back(tasks[indices[i]]);
    }
    return result;
}

AblationReport run_ablation(const ToolWorld& world, const std::vector<Task>& tasks,
                            const AblationConfig& config, AblationVariant which) {
    if (tasks.empty()) throw std::invalid_argument("ablation needs at least one task");

    const auto [train_tasks, eval_tasks] =
        split_tasks(tasks, config.holdout_fraction, config.train.seed);
    if (train_tasks.empty() || eval_tasks.empty()) {
        throw std::invalid_argument("ablation split produced an empty partition");
    }

    const KnowledgeBase kb = build_knowledge_base(
        world, config.explore_max_rounds, derive_seed(config.train.seed, kExploreTag));

    const int max_steps = world.longest_chain() + 1;
    const PlannerParams initial =
        init_planner(world.feature_dim, world.num_tools(), max_steps,
                     derive_seed(config.train.seed, kInitTag));

    AblationReport report;
    report.which = which;

    const TrainResult dense =
        train(world, train_tasks, initial, RewardKind::Dense, config.train, eval_tasks);
    report.baseline = evaluate(world, eval_tasks, dense.params, &kb, config.retry_budget);

    if (which == AblationVariant::NoPlanningReward) {
        const TrainResult sparse =
            train(world, train_tasks, initial, RewardKind::Sparse, config.train, eval_tasks);
        report.variant = evaluate(world, eval_tasks, sparse.params, &kb, config.retry_budget);
        report.direction_holds = report.variant.success_rate < report.baseline.success_rate;
    } else {
        report.variant = evaluate(world, eval_tasks, dense.params, nullptr, config.retry_budget);
        report.direction_holds =
            report.variant.invocation_error_rate > report.baseline.invocation_error_rate;
    }
    return report;
}

}  // namespace toolplan
