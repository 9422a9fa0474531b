#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "toolplan/grpo.hpp"
#include "toolplan/json_io.hpp"
#include "toolplan/reward.hpp"

using namespace toolplan;

namespace {

Task make_task(std::vector<double> features) {
    Task task;
    task.features = std::move(features);
    return task;
}

Plan make_plan(const std::vector<int>& tools) {
    Plan plan;
    for (std::size_t i = 0; i < tools.size(); ++i) {
        plan.steps.push_back(PlanStep{make_sub_query(static_cast<int>(i), "t"), tools[i]});
    }
    return plan;
}

std::vector<double> random_features(int dim, Rng& rng) {
    std::vector<double> f(dim);
    for (double& x : f) x = rng.gaussian();
    return f;
}

// Builds a one-sample group whose stored behaviour log-prob is offset so that
// the ratio under `params` equals `ratio` exactly.
PlanGroup fabricated_group(const PlannerParams& params, const Task& task, const Plan& plan,
                           double ratio, double advantage) {
    PlanGroup group;
    group.task = task;
    SampledPlan sample;
    sample.plan = plan;
    sample.stopped_naturally = true;
    sample.log_prob = plan_log_prob(params, task, plan, true) - std::log(ratio);
    group.samples.push_back(sample);
    group.rewards.push_back(0.0);
    group.advantages.push_back(advantage);
    return group;
}

Matrix fd_objective_gradient(PlannerParams params, const std::vector<PlanGroup>& groups,
                             double clip_eps, double h) {
    Matrix grad(params.weights.rows, params.weights.cols);
    for (std::size_t i = 0; i < params.weights.data.size(); ++i) {
        const double saved = params.weights.data[i];
        params.weights.data[i] = saved + h;
        const double up = grpo_objective(params, groups, clip_eps);
        params.weights.data[i] = saved - h;
        const double down = grpo_objective(params, groups, clip_eps);
        params.weights.data[i] = saved;
        grad.data[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

double relative_error(const Matrix& analytic, const Matrix& numeric) {
    Matrix diff = analytic;
    diff.add_scaled(numeric, -1.0);
    return diff.frobenius_norm() / std::max(numeric.frobenius_norm(), 1e-12);
}

}  // namespace

TEST_CASE("advantage normalization follows the group formula") {
    SUBCASE("hand-computed four-sample group") {
        const auto [advantages, stats] = normalize_advantages({1.0, 0.5, 0.5, 0.0}, 1e-8);
        CHECK(stats.mean == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(stats.stddev == doctest::Approx(0.35355339059327373).epsilon(1e-9));
        CHECK(advantages[0] == doctest::Approx(1.414213).epsilon(1e-5));
        CHECK(advantages[1] == doctest::Approx(0.0));
        CHECK(advantages[2] == doctest::Approx(0.0));
        CHECK(advantages[3] == doctest::Approx(-1.414213).epsilon(1e-5));
    }
    SUBCASE("zero variance yields all-zero advantages") {
        const auto [advantages, stats] = normalize_advantages({0.25, 0.25, 0.25}, 1e-8);
        CHECK(stats.stddev == 0.0);
        for (double a : advantages) CHECK(a == 0.0);
    }
    SUBCASE("two-sample group") {
        const auto [advantages, stats] = normalize_advantages({1.0, 0.0}, 1e-8);
        CHECK(stats.mean == doctest::Approx(0.5));
        CHECK(stats.stddev == doctest::Approx(0.5));
        CHECK(advantages[0] == doctest::Approx(1.0).epsilon(1e-5));
        CHECK(advantages[1] == doctest::Approx(-1.0).epsilon(1e-5));
    }
    SUBCASE("preconditions") {
        CHECK_THROWS(normalize_advantages({1.0}, 1e-8));
        CHECK_THROWS(normalize_advantages({1.0, 0.0}, 0.0));
    }
}

TEST_CASE("normalized advantages are centered with near-unit spread") {
    Rng rng(555);
    const std::vector<int> group_sizes{2, 4, 8, 16};
    for (int trial = 0; trial < 1000; ++trial) {
        const int k = group_sizes[trial % group_sizes.size()];
        std::vector<double> rewards(k);
        for (double& r : rewards) r = rng.uniform();
        const auto [advantages, stats] = normalize_advantages(rewards, 1e-8);

        double mean = 0.0;
        for (double a : advantages) mean += a;
        mean /= k;
        double var = 0.0;
        for (double a : advantages) var += (a - mean) * (a - mean);
        var /= k;

        if (stats.stddev >= 1e-4) {
            CHECK(std::abs(mean) <= 1e-9);
            CHECK(std::sqrt(var) >= 1.0 - 1e-4);
            CHECK(std::sqrt(var) <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("objective clip arithmetic on fabricated ratios") {
    PlannerParams params = init_planner(2, 3, 3, 1);
    const Task task = make_task({0.5, -0.5});
    const Plan plan = make_plan({1, 2});

    SUBCASE("positive advantage clips from above") {
        const auto group = fabricated_group(params, task, plan, 1.3, 1.0);
        CHECK(grpo_objective(params, {group}, 0.2) == doctest::Approx(1.2).epsilon(1e-9));
    }
    SUBCASE("negative advantage takes the more pessimistic branch") {
        const auto group = fabricated_group(params, task, plan, 0.5, -1.0);
        CHECK(grpo_objective(params, {group}, 0.2) == doctest::Approx(-0.8).epsilon(1e-9));
    }
    SUBCASE("in-range ratio is left unclipped") {
        const auto group = fabricated_group(params, task, plan, 1.1, 1.0);
        CHECK(grpo_objective(params, {group}, 0.2) == doctest::Approx(1.1).epsilon(1e-9));
    }
}

TEST_CASE("ratio-one neutrality: the objective vanishes at the behaviour policy") {
    const ToolWorld world = generate_world(WorldConfig{6, 4, 3, 0.0}, 31);
    PlannerParams params = init_planner(4, world.num_tools(), 4, 8);
    Rng rng(17);
    for (double& w : params.weights.data) w = 0.5 * rng.gaussian();

    std::vector<PlanGroup> groups;
    for (int g = 0; g < 10; ++g) {
        Task task = make_task(random_features(4, rng));
        task.truth_plan = make_plan({1, 2});
        Rng sample_rng(900 + g);
        PlanGroup group = sample_group(params, world, task, 8, sample_rng);
        for (const auto& s : group.samples) {
            group.rewards.push_back(plan_reward(s.plan, task.truth_plan).total);
        }
        group.advantages = normalize_advantages(group.rewards, 1e-8).first;
        groups.push_back(group);
    }
    CHECK(std::abs(grpo_objective(params, groups, 0.2)) <= 1e-9);
}

TEST_CASE("clipped-and-selected samples contribute exactly zero gradient") {
    PlannerParams params = init_planner(2, 3, 3, 4);
    const Task task = make_task({1.0, 2.0});
    const Plan plan_a = make_plan({0, 1});
    const Plan plan_b = make_plan({2});

    // Group of two: sample 0 is clipped (positive advantage, ratio above the
    // band), sample 1 is active.
    PlanGroup group = fabricated_group(params, task, plan_a, 1.5, 1.0);
    {
        SampledPlan sample;
        sample.plan = plan_b;
        sample.stopped_naturally = true;
        sample.log_prob = plan_log_prob(params, task, plan_b, true) - std::log(0.9);
        group.samples.push_back(sample);
        group.rewards.push_back(0.0);
        group.advantages.push_back(0.5);
    }

    const Matrix grad = grpo_gradient(params, {group}, 0.2);

    Matrix expected = log_prob_gradient(params, task, plan_b, true);
    expected.scale(0.9 * 0.5 / 2.0);  // ratio * advantage, averaged over both samples
    for (std::size_t i = 0; i < grad.data.size(); ++i) {
        CHECK(grad.data[i] == doctest::Approx(expected.data[i]).epsilon(1e-12));
    }

    SUBCASE("all samples clipped means an exactly zero matrix") {
        PlanGroup clipped = fabricated_group(params, task, plan_a, 1.5, 1.0);
        double fraction = 0.0;
        const Matrix zero = grpo_gradient(params, {clipped}, 0.2, &fraction);
        CHECK(fraction == 1.0);
        for (double g : zero.data) CHECK(g == 0.0);
    }

    SUBCASE("all-zero advantages mean a zero gradient and objective") {
        PlanGroup flat = fabricated_group(params, task, plan_a, 1.5, 0.0);
        flat.advantages[0] = 0.0;
        CHECK(grpo_objective(params, {flat}, 0.2) == 0.0);
        const Matrix zero = grpo_gradient(params, {flat}, 0.2);
        for (double g : zero.data) CHECK(g == 0.0);
    }
}

TEST_CASE("analytic surrogate gradient matches central finite differences") {
    const ToolWorld world = generate_world(WorldConfig{5, 3, 3, 0.0}, 63);
    Rng rng(808);

    int checked = 0;
    double worst = 0.0;
    while (checked < 50) {
        PlannerParams behaviour = init_planner(3, world.num_tools(), 3, 100 + checked);
        for (double& w : behaviour.weights.data) w = 0.4 * rng.gaussian();

        Task task = make_task(random_features(3, rng));
        task.truth_plan = make_plan({0, 1});

        Rng sample_rng(3000 + checked);
        PlanGroup group = sample_group(behaviour, world, task, 6, sample_rng);
        for (const auto& s : group.samples) {
            group.rewards.push_back(plan_reward(s.plan, task.truth_plan).total);
        }
        group.advantages = normalize_advantages(group.rewards, 1e-8).first;

        // Evaluate the surrogate at a slightly moved policy; skip configurations
        // that land a ratio near a clip kink, where finite differences straddle
        // the non-smooth point.
        PlannerParams params = behaviour;
        for (double& w : params.weights.data) w += 0.03 * rng.gaussian();

        bool near_kink = false;
        for (const auto& s : group.samples) {
            const double ratio =
                std::exp(plan_log_prob(params, task.features.empty() ? task : task, s.plan,
                                       s.stopped_naturally) -
                         s.log_prob);
            if (std::abs(ratio - 0.8) < 1e-3 || std::abs(ratio - 1.2) < 1e-3) near_kink = true;
        }
        if (near_kink) continue;

        const Matrix analytic = grpo_gradient(params, {group}, 0.2);
        const Matrix numeric = fd_objective_gradient(params, {group}, 0.2, 1e-5);
        if (numeric.frobenius_norm() < 1e-12) continue;  // all samples clipped or flat
        worst = std::max(worst, relative_error(analytic, numeric));
        ++checked;
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("group sampling shape and determinism") {
    const ToolWorld world = generate_world(WorldConfig{5, 3, 3, 0.0}, 41);
    PlannerParams params = init_planner(3, world.num_tools(), 4, 5);
    Task task = make_task({0.2, 0.4, 0.6});

    Rng rng_a(12);
    const PlanGroup a = sample_group(params, world, task, 4, rng_a);
    REQUIRE(a.samples.size() == 4);
    for (const auto& s : a.samples) {
        CHECK(s.log_prob <= 0.0);
        CHECK(std::isfinite(s.log_prob));
    }

    Rng rng_b(12);
    const PlanGroup b = sample_group(params, world, task, 4, rng_b);
    for (std::size_t j = 0; j < a.samples.size(); ++j) {
        CHECK(a.samples[j].plan.tool_ids() == b.samples[j].plan.tool_ids());
        CHECK(a.samples[j].log_prob == b.samples[j].log_prob);
    }

    CHECK_THROWS(sample_group(params, world, task, 1, rng_a));

    SUBCASE("a near-deterministic policy repeats one plan k times") {
        for (std::size_t r = 0; r < params.weights.rows; ++r) params.weights(r, 2) = 0.0;
        for (int i = 0; i < params.max_steps; ++i) {
            params.weights(static_cast<std::size_t>(params.feature_dim + params.num_tools + i), 2) = 60.0;
        }
        // STOP never wins, tool 2 always does; every sample runs to max_steps.
        Rng rng(77);
        const PlanGroup peaked = sample_group(params, world, task, 6, rng);
        for (const auto& s : peaked.samples) {
            CHECK(s.plan.tool_ids() == peaked.samples[0].plan.tool_ids());
            CHECK(s.plan.size() == params.max_steps);
        }
    }
}

TEST_CASE("training is deterministic and lifts reward on a small world") {
    const ToolWorld world = generate_world(WorldConfig{8, 16, 3, 0.0}, 404);
    const std::vector<Task> tasks = generate_tasks(world, TaskGenConfig{60, 2, 3, 0.05}, 11);

    const PlannerParams initial = init_planner(world.feature_dim, world.num_tools(), 4, 2);
    TrainConfig config;
    config.k = 6;
    config.epochs = 4;
    config.batch_tasks = 8;
    config.seed = 99;

    const TrainResult first = train(world, tasks, initial, RewardKind::Dense, config);
    const TrainResult second = train(world, tasks, initial, RewardKind::Dense, config);

    REQUIRE(first.log.epochs.size() == 4);
    CHECK(planner_to_json(first.params) == planner_to_json(second.params));
    for (std::size_t e = 0; e < first.log.epochs.size(); ++e) {
        CHECK(first.log.epochs[e].mean_reward == second.log.epochs[e].mean_reward);
        CHECK(first.log.epochs[e].objective == second.log.epochs[e].objective);
        CHECK(first.log.epochs[e].holdout_exact_match ==
              second.log.epochs[e].holdout_exact_match);
    }
    CHECK(first.log.epochs.back().mean_reward > first.log.epochs.front().mean_reward);

    std::ostringstream csv;
    write_training_log_csv(first.log, csv);
    const std::string csv_text = csv.str();
    CHECK(csv_text.rfind("epoch,mean_reward,mean_abs_advantage,objective,clip_fraction,"
                         "holdout_exact_match\n", 0) == 0);
    CHECK(std::count(csv_text.begin(), csv_text.end(), '\n') == 5);  // header + 4 epochs

    CHECK_THROWS(train(world, {}, initial, RewardKind::Dense, config));
}
