#include "toolplan/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "toolplan/reward.hpp"

namespace toolplan {

namespace {

constexpr std::uint64_t kSplitTag = 0x73706c6974ULL;    // "split"
constexpr std::uint64_t kShuffleTag = 0x73687566ULL;    // "shuf"
constexpr std::uint64_t kSampleTag = 0x73616d70ULL;     // "samp"

void check_groups(const std::vector<PlanGroup>& groups) {
    if (groups.empty()) throw std::invalid_argument("no groups supplied");
    for (const auto& g : groups) {
        if (g.samples.empty()) throw std::invalid_argument("empty group");
        if (g.advantages.size() != g.samples.size()) {
            throw std::invalid_argument("advantages not filled for a group");
        }
    }
}

bool plans_equal(const Plan& a, const Plan& b) {
    if (a.size() != b.size()) return false;
    for (int i = 0; i < a.size(); ++i) {
        if (a.steps[i].tool_id != b.steps[i].tool_id) return false;
    }
    return true;
}

double exact_match_rate(const PlannerParams& params, const ToolWorld& world,
                        const std::vector<Task>& tasks) {
    if (tasks.empty()) return 0.0;
    int hits = 0;
    for (const auto& task : tasks) {
        const Plan decoded = decode_greedy(params, world, task, params.max_steps);
        if (plans_equal(decoded, task.truth_plan)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(tasks.size());
}

}  // namespace

double reward_of(RewardKind kind, const Plan& plan, const Plan& truth) {
    return kind == RewardKind::Dense ? plan_reward(plan, truth).total : sparse_reward(plan, truth);
}

PlanGroup sample_group(const PlannerParams& params, const ToolWorld& world, const Task& task,
                       int k, Rng& rng) {
    if (k < 2) throw std::invalid_argument("group size must be at least 2");
    PlanGroup group;
    group.task = task;
    group.samples.reserve(k);
    // Groups hold distinct plans where the policy can still produce them:
    // duplicates are redrawn within a bounded budget, which keeps group
    // variance alive for near-deterministic policies. Once the budget is
    // spent (or the policy has fully collapsed) duplicates are admitted.
    int redraws_left = 16 * k;
    while (static_cast<int>(group.samples.size()) < k) {
        SampledPlan candidate = sample_plan(params, world, task, rng, params.max_steps);
        bool duplicate = false;
        for (const auto& existing : group.samples) {
            if (plans_equal(existing.plan, candidate.plan)) {
                duplicate = true;
                break;
            }
        }
        if (duplicate && redraws_left > 0) {
            --redraws_left;
            continue;
        }
        group.samples.push_back(std::move(candidate));
    }
    return group;
}

std::pair<std::vector<double>, GroupStats> normalize_advantages(const std::vector<double>& rewards,
                                                                double eta) {
    if (rewards.size() < 2) throw std::invalid_argument("need at least two rewards");
    if (eta <= 0.0) throw std::invalid_argument("eta must be positive");
    const double k = static_cast<double>(rewards.size());
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= k;
    double variance = 0.0;
    for (double r : rewards) variance += (r - mean) * (r - mean);
    variance /= k;

    GroupStats stats;
    stats.mean = mean;
    stats.stddev = std::sqrt(variance);
    stats.eta = eta;

    std::vector<double> advantages(rewards.size());
    for (std::size_t j = 0; j < rewards.size(); ++j) {
        advantages[j] = (rewards[j] - mean) / (stats.stddev + eta);
    }
    return {advantages, stats};
}

double grpo_objective(const PlannerParams& params, const std::vector<PlanGroup>& groups,
                      double clip_eps) {
    check_groups(groups);
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& group : groups) {
        for (std::size_t j = 0; j < group.samples.size(); ++j) {
            const SampledPlan& sample = group.samples[j];
            const double new_lp =
                plan_log_prob(params, group.task, sample.plan, sample.stopped_naturally);
            const double ratio = std::exp(new_lp - sample.log_prob);
            const double advantage = group.advantages[j];
            const double unclipped = ratio * advantage;
            const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * advantage;
            total += std::min(unclipped, clipped);
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

Matrix grpo_gradient(const PlannerParams& params, const std::vector<PlanGroup>& groups,
                     double clip_eps, double* clip_fraction) {
    check_groups(groups);
    Matrix grad(params.weights.rows, params.weights.cols);
    std::size_t count = 0;
    std::size_t clipped_count = 0;
    for (const auto& group : groups) {
        for (std::size_t j = 0; j < group.samples.size(); ++j) {
            const SampledPlan& sample = group.samples[j];
            ++count;
            const double advantage = group.advantages[j];
            const double new_lp =
                plan_log_prob(params, group.task, sample.plan, sample.stopped_naturally);
            const double ratio = std::exp(new_lp - sample.log_prob);
            const double unclipped = ratio * advantage;
            const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * advantage;
            if (clipped < unclipped) {
                // The clip is constant in the parameters, so the selected
                // branch contributes nothing.
                ++clipped_count;
                continue;
            }
            if (advantage == 0.0) continue;
            const Matrix step_grad =
                log_prob_gradient(params, group.task, sample.plan, sample.stopped_naturally);
            grad.add_scaled(step_grad, ratio * advantage);
        }
    }
    grad.scale(1.0 / static_cast<double>(count));
    if (clip_fraction != nullptr) {
        *clip_fraction = static_cast<double>(clipped_count) / static_cast<double>(count);
    }
    return grad;
}

TrainResult train(const ToolWorld& world, const std::vector<Task>& tasks,
                  const PlannerParams& initial, RewardKind reward_kind, const TrainConfig& config,
                  const std::vector<Task>& holdout) {
    if (tasks.empty()) throw std::invalid_argument("no training tasks supplied");
    if (config.k < 2) throw std::invalid_argument("group size must be at least 2");
    if (config.epochs < 1) throw std::invalid_argument("epochs must be positive");
    if (config.clip_eps <= 0.0 || config.clip_eps >= 1.0) {
        throw std::invalid_argument("clip_eps must lie in (0, 1)");
    }
    if (config.eta <= 0.0) throw std::invalid_argument("eta must be positive");
    if (config.batch_tasks < 1) throw std::invalid_argument("batch_tasks must be positive");
    if (config.inner_updates < 1) throw std::invalid_argument("inner_updates must be positive");

    // Resolve the train/probe split: explicit holdout wins, otherwise an
    // 80/20 seeded partition of the given tasks.
    std::vector<Task> train_tasks;
    std::vector<Task> probe_tasks;
    if (!holdout.empty()) {
        train_tasks = tasks;
        probe_tasks = holdout;
    } else {
        std::vector<std::size_t> indices(tasks.size());
        for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
        Rng split_rng(derive_seed(config.seed, kSplitTag));
        split_rng.shuffle(indices);
        const std::size_t train_count = std::max<std::size_t>(1, (tasks.size() * 8) / 10);
        for (std::size_t i = 0; i < indices.size(); ++i) {
            (i < train_count ? train_tasks : probe_tasks).push_back(tasks[indices[i]]);
        }
    }

    TrainResult result;
    result.params = initial;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::vector<std::size_t> order(train_tasks.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng shuffle_rng(derive_seed(config.seed, kShuffleTag, static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(order);

        double reward_sum = 0.0;
        double abs_adv_sum = 0.0;
        std::size_t sample_count = 0;
        std::size_t duplicate_count = 0;
        double objective_sum = 0.0;
        double clip_sum = 0.0;
        std::size_t batch_count = 0;

        for (std::size_t start = 0; start < order.size(); start += config.batch_tasks) {
            const std::size_t stop = std::min(order.size(), start + config.batch_tasks);

            std::vector<PlanGroup> groups;
            groups.reserve(stop - start);
            for (std::size_t pos = start; pos < stop; ++pos) {
                Rng sample_rng(derive_seed(config.seed, kSampleTag,
                                           static_cast<std::uint64_t>(epoch),
                                           static_cast<std::uint64_t>(pos)));
                PlanGroup group =
                    sample_group(result.params, world, train_tasks[order[pos]], config.k, sample_rng);
                group.rewards.reserve(group.samples.size());
                for (const auto& sample : group.samples) {
                    double reward = reward_of(reward_kind, sample.plan, group.task.truth_plan);
                    if (reward_kind == RewardKind::Dense && reward > 0.0) {
                        // Shaping only ranks plans that already earn credit;
                        // rewarding length alone would entrench content-free
                        // plans of plausible length.
                        const int gap =
                            std::abs(sample.plan.size() - group.task.truth_plan.size());
                        reward -= config.length_penalty * gap;
                    }
                    group.rewards.push_back(reward);
                }
                auto [advantages, stats] = normalize_advantages(group.rewards, config.eta);
                group.advantages = std::move(advantages);

                for (std::size_t j = 0; j < group.samples.size(); ++j) {
                    reward_sum += group.rewards[j];
                    abs_adv_sum += std::abs(group.advantages[j]);
                    ++sample_count;
                    for (std::size_t prior = 0; prior < j; ++prior) {
                        if (plans_equal(group.samples[j].plan, group.samples[prior].plan)) {
                            ++duplicate_count;
                            break;
                        }
                    }
                }
                groups.push_back(std::move(group));
            }

            double clip_fraction = 0.0;
            for (int update = 0; update < config.inner_updates; ++update) {
                const Matrix grad = grpo_gradient(result.params, groups, config.clip_eps,
                                                  &clip_fraction);
                if (!grad.all_finite()) {
                    throw std::runtime_error("training aborted: gradient became non-finite");
                }
                result.params.weights.add_scaled(grad, config.learning_rate);
            }
            const double objective = grpo_objective(result.params, groups, config.clip_eps);
            if (!std::isfinite(objective)) {
                throw std::runtime_error("training aborted: objective became non-finite");
            }
            objective_sum += objective;
            clip_sum += clip_fraction;
            ++batch_count;
        }

        EpochRecord record;
        record.epoch = epoch;
        record.mean_reward = reward_sum / static_cast<double>(sample_count);
        record.mean_abs_advantage = abs_adv_sum / static_cast<double>(sample_count);
        record.objective = objective_sum / static_cast<double>(batch_count);
        record.clip_fraction = clip_sum / static_cast<double>(batch_count);
        record.holdout_exact_match = exact_match_rate(result.params, world, probe_tasks);
        record.duplicate_rate = static_cast<double>(duplicate_count) /
                                static_cast<double>(sample_count);
        result.log.epochs.push_back(record);
    }
    return result;
}

void write_training_log_csv(const TrainingLog& log, std::ostream& out) {
    out << "epoch,mean_reward,mean_abs_advantage,objective,clip_fraction,holdout_exact_match\n";
    char buffer[512];
    for (const auto& r : log.epochs) {
        std::snprintf(buffer, sizeof(buffer), "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.epoch,
                      r.mean_reward, r.mean_abs_advantage, r.objective, r.clip_fraction,
                      r.holdout_exact_match);
        out << buffer;
    }
}

}  // namespace toolplan
