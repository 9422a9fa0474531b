#include <cmath>
#include <set>

#include "doctest.h"
#include "toolplan/harness.hpp"
#include "toolplan/json_io.hpp"
#include "toolplan/reward.hpp"

using namespace toolplan;

TEST_CASE("oracle plans with a full knowledge base hit the ceiling") {
    const ToolWorld world = generate_world(WorldConfig{20, 8, 5, 0.0}, 71);
    const KnowledgeBase kb = build_knowledge_base(world, 10, 5);
    const auto tasks = generate_tasks(world, TaskGenConfig{50, 2, 5, 0.1}, 8);

    std::vector<Plan> truth_plans;
    for (const auto& t : tasks) truth_plans.push_back(t.truth_plan);

    const Metrics metrics = evaluate_plans(world, tasks, truth_plans, &kb, 2);
    CHECK(metrics.success_rate == 1.0);
    CHECK(metrics.invocation_error_rate == 0.0);
    CHECK(metrics.plan_exact_match_rate == 1.0);
    CHECK(metrics.tasks_succeeded == metrics.tasks_total);
}

TEST_CASE("an untrained planner almost never reproduces a plan exactly") {
    const ToolWorld world = generate_world(WorldConfig{20, 32, 5, 0.5}, 42);
    const KnowledgeBase kb = build_knowledge_base(world, 10, 7);
    const auto tasks = generate_tasks(world, TaskGenConfig{200, 2, 5, 0.1}, 9);

    const PlannerParams params = init_planner(world.feature_dim, world.num_tools(), 6, 1);
    const Metrics metrics = evaluate(world, tasks, params, &kb, 2);
    CHECK(metrics.plan_exact_match_rate <= 0.01);
}

TEST_CASE("metric identities are recomputed from the integer counters") {
    const ToolWorld world = generate_world(WorldConfig{12, 8, 4, 0.5}, 55);
    const KnowledgeBase kb = build_knowledge_base(world, 10, 3);
    const auto tasks = generate_tasks(world, TaskGenConfig{40, 2, 4, 0.1}, 4);
    const PlannerParams params = init_planner(world.feature_dim, world.num_tools(), 5, 2);

    const Metrics metrics = evaluate(world, tasks, params, &kb, 2);
    CHECK(metrics.tasks_total == 40);
    CHECK(metrics.success_rate ==
          static_cast<double>(metrics.tasks_succeeded) / static_cast<double>(metrics.tasks_total));
    if (metrics.calls_attempted > 0) {
        CHECK(metrics.invocation_error_rate ==
              static_cast<double>(metrics.calls_errored) /
                  static_cast<double>(metrics.calls_attempted));
    }
    CHECK(metrics.calls_errored <= metrics.calls_attempted);

    SUBCASE("evaluation is pure: repeated runs agree byte for byte") {
        const Metrics again = evaluate(world, tasks, params, &kb, 2);
        CHECK(metrics_to_json(metrics) == metrics_to_json(again));
    }

    SUBCASE("evaluation requires tasks") {
        CHECK_THROWS(evaluate(world, {}, params, &kb, 2));
    }
}

TEST_CASE("random baseline plans are capped and weak") {
    const ToolWorld world = generate_world(WorldConfig{20, 8, 5, 0.0}, 18);
    const auto tasks = generate_tasks(world, TaskGenConfig{20, 4, 4, 0.1}, 12);

    SUBCASE("length never exceeds the cap and seeds diversify") {
        bool any_difference = false;
        Plan previous;
        for (int s = 0; s < 20; ++s) {
            Rng rng(derive_seed(600, s));
            const Plan plan = random_baseline_plan(world, tasks[0], rng, 6);
            CHECK(plan.size() <= 6);
            if (s > 0 && plan.tool_ids() != previous.tool_ids()) any_difference = true;
            previous = plan;
        }
        CHECK(any_difference);
    }

    SUBCASE("expected dense reward stays below five percent") {
        Rng rng(31007);
        double total = 0.0;
        const int draws = 10000;
        for (int i = 0; i < draws; ++i) {
            const Plan plan = random_baseline_plan(world, tasks[i % tasks.size()], rng, 6);
            total += plan_reward(plan, tasks[i % tasks.size()].truth_plan).total;
        }
        CHECK(total / draws <= 0.05);
    }
}

TEST_CASE("task splitting is a seeded partition") {
    const ToolWorld world = generate_world(WorldConfig{12, 8, 4, 0.0}, 5);
    const auto tasks = generate_tasks(world, TaskGenConfig{50, 2, 4, 0.1}, 21);

    const auto [train_a, holdout_a] = split_tasks(tasks, 0.2, 77);
    const auto [train_b, holdout_b] = split_tasks(tasks, 0.2, 77);
    CHECK(train_a.size() == 40);
    CHECK(holdout_a.size() == 10);
    CHECK(train_b.size() == train_a.size());

    std::set<int> ids;
    for (const auto& t : train_a) ids.insert(t.task_id);
    for (const auto& t : holdout_a) ids.insert(t.task_id);
    CHECK(ids.size() == 50);
}

TEST_CASE("ablations share their baseline under identical seeds") {
    const ToolWorld world = generate_world(WorldConfig{10, 12, 3, 0.5}, 31);
    const auto tasks = generate_tasks(world, TaskGenConfig{60, 2, 3, 0.05}, 17);

    AblationConfig config;
    config.train.k = 4;
    config.train.epochs = 3;
    config.train.batch_tasks = 8;
    config.train.seed = 5;

    const AblationReport reward_arm =
        run_ablation(world, tasks, config, AblationVariant::NoPlanningReward);
    const AblationReport exploration_arm =
        run_ablation(world, tasks, config, AblationVariant::NoExploration);

    CHECK(metrics_to_json(reward_arm.baseline) == metrics_to_json(exploration_arm.baseline));
    CHECK(ablation_variant_name(reward_arm.which) == std::string("no_planning_reward"));
    CHECK(ablation_variant_name(exploration_arm.which) == std::string("no_exploration"));

    // Directions on this small configuration are checked loosely here; the
    // acceptance suite pins them on the standard world across seeds.
    CHECK(exploration_arm.variant.invocation_error_rate >=
          exploration_arm.baseline.invocation_error_rate);
}
