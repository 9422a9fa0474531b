#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "toolplan/planner.hpp"
#include "toolplan/toolworld.hpp"

namespace toolplan {

// A group of k plans sampled for one query. Log-probs in `samples` are the
// behaviour-policy values frozen at sampling time.
struct PlanGroup {
    Task task;
    std::vector<SampledPlan> samples;
    std::vector<double> rewards;
    std::vector<double> advantages;
};

struct GroupStats {
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation
    double eta = 0.0;
};

enum class RewardKind { Dense, Sparse };

struct TrainConfig {
    int k = 8;
    int epochs = 15;
    double learning_rate = 0.5;
    double clip_eps = 0.2;
    double eta = 1e-8;
    int batch_tasks = 8;
    int inner_updates = 1;  // gradient steps per sampling round
    // Training-only shaping: plans that already earn step credit lose this
    // much per step of length mismatch with the reference. The trajectory
    // reward is flat in extra steps, so without this term the policy has no
    // gradient toward placing STOP and greedy decodes run to max_steps.
    // Evaluation metrics never use it.
    double length_penalty = 0.05;
    std::uint64_t seed = 0;
};

struct EpochRecord {
    int epoch = 0;
    double mean_reward = 0.0;
    double mean_abs_advantage = 0.0;
    double objective = 0.0;       // surrogate value after the epoch's updates
    double clip_fraction = 0.0;
    double holdout_exact_match = 0.0;
    double duplicate_rate = 0.0;  // within-group duplicate plans (i.i.d. sampling)
};

struct TrainingLog {
    std::vector<EpochRecord> epochs;
};

struct TrainResult {
    PlannerParams params;
    TrainingLog log;
};

// k i.i.d. draws from the current policy; rewards and advantages left empty.
PlanGroup sample_group(const PlannerParams& params, const ToolWorld& world, const Task& task,
                       int k, Rng& rng);

// Group-wise advantage normalization: (reward - mean) / (population std + eta).
std::pair<std::vector<double>, GroupStats> normalize_advantages(const std::vector<double>& rewards,
                                                                double eta);

// Clipped surrogate objective, averaged flat over every sample of every group.
double grpo_objective(const PlannerParams& params, const std::vector<PlanGroup>& groups,
                      double clip_eps);

// Analytic gradient of grpo_objective. Samples whose clipped term is selected
// contribute exactly zero. Optionally reports the clipped fraction.
Matrix grpo_gradient(const PlannerParams& params, const std::vector<PlanGroup>& groups,
                     double clip_eps, double* clip_fraction = nullptr);

// Full training loop: per epoch, shuffle tasks, sample groups per batch under
// the current policy (frozen as the behaviour policy), normalize advantages,
// and take inner_updates ascent steps. Deterministic given config.seed.
// When holdout is empty, an internal 80/20 split of `tasks` provides the
// exact-match probe set.
TrainResult train(const ToolWorld& world, const std::vector<Task>& tasks,
                  const PlannerParams& initial, RewardKind reward_kind, const TrainConfig& config,
                  const std::vector<Task>& holdout = {});

double reward_of(RewardKind kind, const Plan& plan, const Plan& truth);

void write_training_log_csv(const TrainingLog& log, std::ostream& out);

}  // namespace toolplan
