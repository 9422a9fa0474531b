#pragma once

#include <vector>

#include "toolplan/toolworld.hpp"

namespace toolplan {

struct RewardBreakdown {
    std::vector<double> per_step;  // r_i for i = 1..n
    double total = 0.0;            // sum of per_step
};

// Step-wise reward for the i-th step (1-indexed): 1/m when the step index is
// within the reference plan and the tool matches positionally, else 0.
double step_reward(const Plan& plan, const Plan& truth, int i);

// Trajectory reward: the sum of step rewards over all n generated steps.
// A plan matching the reference exactly totals 1; steps beyond the reference
// length contribute nothing.
RewardBreakdown plan_reward(const Plan& plan, const Plan& truth);

// Ablation variant: a single success indicator, 1 iff the plan matches the
// reference exactly (same length, same tool at every position).
double sparse_reward(const Plan& plan, const Plan& truth);

}  // namespace toolplan
