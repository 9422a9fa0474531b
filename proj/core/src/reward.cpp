#include "toolplan/reward.hpp"

#include <stdexcept>

namespace toolplan {

double step_reward(const Plan& plan, const Plan& truth, int i) {
    if (i < 1 || i > plan.size()) {
        throw std::invalid_argument("step index outside the generated plan");
    }
    const int m = truth.size();
    if (i <= m && plan.steps[i - 1].tool_id == truth.steps[i - 1].tool_id) {
        return 1.0 / static_cast<double>(m);
    }
    return 0.0;
}

RewardBreakdown plan_reward(const Plan& plan, const Plan& truth) {
    RewardBreakdown breakdown;
    breakdown.per_step.reserve(plan.steps.size());
    for (int i = 1; i <= plan.size(); ++i) {
        const double r = step_reward(plan, truth, i);
        breakdown.per_step.push_back(r);
        breakdown.total += r;
    }
    return breakdown;
}

double sparse_reward(const Plan& plan, const Plan& truth) {
    if (plan.size() != truth.size()) return 0.0;
    for (int i = 0; i < plan.size(); ++i) {
        if (plan.steps[i].tool_id != truth.steps[i].tool_id) return 0.0;
    }
    return 1.0;
}

}  // namespace toolplan
