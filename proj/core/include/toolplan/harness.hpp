#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "toolplan/executor.hpp"
#include "toolplan/explorer.hpp"
#include "toolplan/grpo.hpp"
#include "toolplan/planner.hpp"
#include "toolplan/toolworld.hpp"

namespace toolplan {

struct Metrics {
    double success_rate = 0.0;            // tasks whose final answer matched
    double invocation_error_rate = 0.0;   // errored calls / attempted calls
    double plan_exact_match_rate = 0.0;   // greedy plan equals the reference plan
    long tasks_total = 0;
    long tasks_succeeded = 0;
    long calls_attempted = 0;
    long calls_errored = 0;
};

enum class AblationVariant { NoPlanningReward, NoExploration };

const char* ablation_variant_name(AblationVariant v);

struct AblationReport {
    AblationVariant which = AblationVariant::NoPlanningReward;
    Metrics baseline;
    Metrics variant;
    bool direction_holds = false;
};

struct AblationConfig {
    TrainConfig train;
    int explore_max_rounds = 10;
    int retry_budget = 2;
    double holdout_fraction = 0.2;
};

// Greedy-decode a plan per task, execute it, and aggregate. Deterministic and
// side-effect free.
Metrics evaluate(const ToolWorld& world, const std::vector<Task>& tasks,
                 const PlannerParams& params, const KnowledgeBase* kb, int retry_budget);

// Same aggregation over externally supplied plans (one per task).
Metrics evaluate_plans(const ToolWorld& world, const std::vector<Task>& tasks,
                       const std::vector<Plan>& plans, const KnowledgeBase* kb, int retry_budget);

// Uniform tool at each step with geometric stopping whose mean matches the
// task's own depth; the lower-bound reference planner.
Plan random_baseline_plan(const ToolWorld& world, const Task& task, Rng& rng, int max_steps);

// Seeded 80/20-style partition into (train, holdout).
std::pair<std::vector<Task>, std::vector<Task>> split_tasks(const std::vector<Task>& tasks,
                                                            double holdout_fraction,
                                                            std::uint64_t seed);

// Trains and evaluates the baseline and the requested variant under identical
// seeds, then checks the expected direction: lower success without the dense
// planning reward, higher invocation error rate without exploration.
AblationReport run_ablation(const ToolWorld& world, const std::vector<Task>& tasks,
                            const AblationConfig& config, AblationVariant which);

}  // namespace toolplan
