#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "toolplan/matrix.hpp"
#include "toolplan/rng.hpp"
#include "toolplan/toolworld.hpp"

namespace toolplan {

// Parameters of the autoregressive linear-softmax policy over tool choices.
// The action space is the tool set plus an explicit STOP action, so plan
// length is part of the policy.
struct PlannerParams {
    int feature_dim = 0;  // query feature dimension
    int num_tools = 0;
    int max_steps = 0;
    Matrix weights;  // (feature_dim_total x num_actions)

    int feature_dim_total() const { return feature_dim + num_tools + max_steps; }
    int num_actions() const { return num_tools + 1; }
    int stop_action() const { return num_tools; }
};

// Near-uniform initial policy: seeded Gaussian weights, mean 0, std 0.01.
PlannerParams init_planner(int feature_dim, int num_tools, int max_steps, std::uint64_t seed);

struct SampledPlan {
    Plan plan;
    double log_prob = 0.0;          // log-probability of the whole action sequence
    bool stopped_naturally = false; // STOP sampled, as opposed to hitting max_steps
};

// Conditioning context for one autoregressive step:
// [query features | one-hot of previous tool (zeros at step 0) | one-hot of step index].
std::vector<double> featurize(const PlannerParams& params, const Task& task, int step_index,
                              std::optional<int> prev_tool);

std::vector<double> step_logits(const PlannerParams& params, const std::vector<double>& features);

// Softmax over (tools | STOP); strictly positive, sums to 1.
std::vector<double> step_distribution(const PlannerParams& params,
                                      const std::vector<double>& features);

SampledPlan sample_plan(const PlannerParams& params, const ToolWorld& world, const Task& task,
                        Rng& rng, int max_steps);

// Exact log-probability of the plan's action sequence. stopped_naturally adds
// the trailing STOP term; it must be false when the plan fills max_steps.
double plan_log_prob(const PlannerParams& params, const Task& task, const Plan& plan,
                     bool stopped_naturally);

// Score-function gradient of plan_log_prob with respect to the weights:
// sum over steps of outer(features, onehot(action) - probs).
Matrix log_prob_gradient(const PlannerParams& params, const Task& task, const Plan& plan,
                         bool stopped_naturally);

// Argmax decoding (STOP included); used for evaluation.
Plan decode_greedy(const PlannerParams& params, const ToolWorld& world, const Task& task,
                   int max_steps);

}  // namespace toolplan
