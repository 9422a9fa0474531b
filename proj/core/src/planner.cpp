#include "toolplan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace toolplan {

namespace {

constexpr std::uint64_t kInitTag = 0x706c616eULL;  // "plan"

void check_task(const PlannerParams& params, const Task& task) {
    if (static_cast<int>(task.features.size()) != params.feature_dim) {
        throw std::invalid_argument("task feature dimension does not match the planner");
    }
}

double log_sum_exp(const std::vector<double>& logits) {
    const double peak = *std::max_element(logits.begin(), logits.end());
    double acc = 0.0;
    for (double l : logits) acc += std::exp(l - peak);
    return peak + std::log(acc);
}

}  // namespace

PlannerParams init_planner(int feature_dim, int num_tools, int max_steps, std::uint64_t seed) {
    if (feature_dim < 1 || num_tools < 1 || max_steps < 1) {
        throw std::invalid_argument("planner dimensions must be positive");
    }
    PlannerParams params;
    params.feature_dim = feature_dim;
    params.num_tools = num_tools;
    params.max_steps = max_steps;
    params.weights = Matrix(static_cast<std::size_t>(params.feature_dim_total()),
                            static_cast<std::size_t>(params.num_actions()));
    Rng rng(derive_seed(seed, kInitTag));
    for (double& w : params.weights.data) w = 0.01 * rng.gaussian();
    return params;
}

std::vector<double> featurize(const PlannerParams& params, const Task& task, int step_index,
                              std::optional<int> prev_tool) {
    check_task(params, task);
    if (step_index < 0 || step_index >= params.max_steps) {
        throw std::invalid_argument("step_index outside [0, max_steps)");
    }
    if (prev_tool.has_value() && (*prev_tool < 0 || *prev_tool >= params.num_tools)) {
        throw std::invalid_argument("prev_tool outside the tool range");
    }
    std::vector<double> features(static_cast<std::size_t>(params.feature_dim_total()), 0.0);
    std::copy(task.features.begin(), task.features.end(), features.begin());
    if (prev_tool.has_value()) {
        features[params.feature_dim + *prev_tool] = 1.0;
    }
    features[params.feature_dim + params.num_tools + step_index] = 1.0;
    return features;
}

std::vector<double> step_logits(const PlannerParams& params, const std::vector<double>& features) {
    if (features.size() != params.weights.rows) {
        throw std::invalid_argument("feature vector does not match the weight matrix");
    }
    std::vector<double> logits(static_cast<std::size_t>(params.num_actions()), 0.0);
    for (std::size_t r = 0; r < params.weights.rows; ++r) {
        const double f = features[r];
        if (f == 0.0) continue;
        const double* row = params.weights.data.data() + r * params.weights.cols;
        for (std::size_t a = 0; a < params.weights.cols; ++a) logits[a] += f * row[a];
    }
    return logits;
}

std::vector<double> step_distribution(const PlannerParams& params,
                                      const std::vector<double>& features) {
    const auto logits = step_logits(params, features);
    const double lse = log_sum_exp(logits);
    std::vector<double> probs(logits.size());
    for (std::size_t a = 0; a < logits.size(); ++a) probs[a] = std::exp(logits[a] - lse);
    return probs;
}

SampledPlan sample_plan(const PlannerParams& params, const ToolWorld& world, const Task& task,
                        Rng& rng, int max_steps) {
    if (max_steps < 1 || max_steps > params.max_steps) {
        throw std::invalid_argument("max_steps must lie in [1, planner max_steps]");
    }
    SampledPlan sampled;
    std::optional<int> prev;
    for (int i = 0; i < max_steps; ++i) {
        const auto features = featurize(params, task, i, prev);
        const auto logits = step_logits(params, features);
        const double lse = log_sum_exp(logits);

        const double u = rng.uniform();
        double cumulative = 0.0;
        int action = params.num_actions() - 1;
        for (int a = 0; a < params.num_actions(); ++a) {
            cumulative += std::exp(logits[a] - lse);
            if (u < cumulative) {
                action = a;
                break;
            }
        }

        sampled.log_prob += logits[action] - lse;
        if (action == params.stop_action()) {
            sampled.stopped_naturally = true;
            break;
        }
        sampled.plan.steps.push_back(PlanStep{make_sub_query(i, world.tools[action].name), action});
        prev = action;
    }
    return sampled;
}

double plan_log_prob(const PlannerParams& params, const Task& task, const Plan& plan,
                     bool stopped_naturally) {
    const int n = plan.size();
    if (n > params.max_steps || (stopped_naturally && n >= params.max_steps)) {
        throw std::invalid_argument("plan length incompatible with max_steps");
    }
    double total = 0.0;
    std::optional<int> prev;
    for (int i = 0; i < n; ++i) {
        const auto logits = step_logits(params, featurize(params, task, i, prev));
        total += logits[plan.steps[i].tool_id] - log_sum_exp(logits);
        prev = plan.steps[i].tool_id;
    }
    if (stopped_naturally) {
        const auto logits = step_logits(params, featurize(params, task, n, prev));
        total += logits[params.stop_action()] - log_sum_exp(logits);
    }
    return total;
}

Matrix log_prob_gradient(const PlannerParams& params, const Task& task, const Plan& plan,
                         bool stopped_naturally) {
    const int n = plan.size();
    if (n > params.max_steps || (stopped_naturally && n >= params.max_steps)) {
        throw std::invalid_argument("plan length incompatible with max_steps");
    }
    Matrix grad(params.weights.rows, params.weights.cols);
    std::optional<int> prev;
    const int terms = stopped_naturally ? n + 1 : n;
    for (int i = 0; i < terms; ++i) {
        const int action = i < n ? plan.steps[i].tool_id : params.stop_action();
        const auto features = featurize(params, task, i, prev);
        auto probs = step_distribution(params, features);
        probs[action] -= 1.0;  // -(onehot - probs)
        for (std::size_t r = 0; r < grad.rows; ++r) {
            const double f = features[r];
            if (f == 0.0) continue;
            double* row = grad.data.data() + r * grad.cols;
            for (std::size_t a = 0; a < grad.cols; ++a) row[a] -= f * probs[a];
        }
        if (i < n) prev = action;
    }
    return grad;
}

Plan decode_greedy(const PlannerParams& params, const ToolWorld& world, const Task& task,
                   int max_steps) {
    if (max_steps < 1 || max_steps > params.max_steps) {
        throw std::invalid_argument("max_steps must lie in [1, planner max_steps]");
    }
    Plan plan;
    std::optional<int> prev;
    for (int i = 0; i < max_steps; ++i) {
        const auto logits = step_logits(params, featurize(params, task, i, prev));
        const int action = static_cast<int>(
            std::max_element(logits.begin(), logits.end()) - logits.begin());
        if (action == params.stop_action()) break;
        plan.steps.push_back(PlanStep{make_sub_query(i, world.tools[action].name), action});
        prev = action;
    }
    return plan;
}

}  // namespace toolplan
