// Command-line runner for the simulated tool-use environment: world and task
// generation, offline exploration, planner training, evaluation, and the two
// ablations. All outputs are deterministic JSON/CSV keyed by --seed.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "toolplan/executor.hpp"
#include "toolplan/explorer.hpp"
#include "toolplan/grpo.hpp"
#include "toolplan/harness.hpp"
#include "toolplan/json_io.hpp"
#include "toolplan/planner.hpp"
#include "toolplan/toolworld.hpp"

namespace {

using namespace toolplan;

constexpr std::uint64_t kInitTag = 0x696e6974ULL;  // "init"

ToolWorld load_world_file(const std::string& path) {
    return world_from_json(read_file(path));
}

std::vector<Task> load_tasks_file(const std::string& path, const ToolWorld& world) {
    const std::string text = read_file(path);
    const ToolWorld embedded = world_from_json(text);
    if (world_to_json(embedded) != world_to_json(world)) {
        throw std::runtime_error("tasks file was generated for a different world");
    }
    return tasks_from_json(text);
}

int max_task_depth(const std::vector<Task>& tasks) {
    int depth = 0;
    for (const auto& t : tasks) depth = std::max(depth, t.depth());
    return depth;
}

struct TrainCli {
    std::string world_path, tasks_path, out_path, log_path;
    std::string reward = "dense";
    TrainConfig config;
};

PlannerParams run_training(const TrainCli& cli, std::ostream& info) {
    const ToolWorld world = load_world_file(cli.world_path);
    const std::vector<Task> tasks = load_tasks_file(cli.tasks_path, world);
    const auto [train_tasks, holdout_tasks] = split_tasks(tasks, 0.2, cli.config.seed);
    if (train_tasks.empty() || holdout_tasks.empty()) {
        throw std::runtime_error("not enough tasks for an 80/20 train/eval split");
    }

    const int max_steps = max_task_depth(tasks) + 1;
    const PlannerParams initial = init_planner(world.feature_dim, world.num_tools(), max_steps,
                                               derive_seed(cli.config.seed, kInitTag));

    const RewardKind kind = cli.reward == "sparse" ? RewardKind::Sparse : RewardKind::Dense;
    const TrainResult result =
        train(world, train_tasks, initial, kind, cli.config, holdout_tasks);

    write_file(cli.out_path, planner_to_json(result.params));
    if (!cli.log_path.empty()) {
        std::ofstream log(cli.log_path, std::ios::binary);
        if (!log) throw std::runtime_error("cannot open '" + cli.log_path + "' for writing");
        write_training_log_csv(result.log, log);
    }

    const EpochRecord& last = result.log.epochs.back();
    info << "trained " << cli.config.epochs << " epochs on " << train_tasks.size()
         << " tasks (" << holdout_tasks.size() << " held out)\n"
         << "final mean reward " << last.mean_reward << ", holdout exact-match "
         << last.holdout_exact_match << ", duplicate rate " << last.duplicate_rate << "\n";
    return result.params;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulated multi-hop tool environment with an RL-trained planner"};
    app.require_subcommand(1);

    // gen-world
    auto* gen_world = app.add_subcommand("gen-world", "generate a deterministic tool world");
    WorldConfig world_config;
    std::uint64_t seed = 0;
    std::string out_path;
    gen_world->add_option("--tools", world_config.num_tools, "number of tools")->required();
    gen_world->add_option("--feature-dim", world_config.feature_dim, "query feature dimension")
        ->required();
    gen_world->add_option("--max-depth", world_config.max_depth, "guaranteed chain depth")
        ->required();
    gen_world->add_option("--hidden-rate", world_config.hidden_constraint_rate,
                          "fraction of tools with hidden constraints")
        ->required();
    gen_world->add_option("--seed", seed, "generator seed")->required();
    gen_world->add_option("--out", out_path, "output world JSON")->required();

    // gen-tasks
    auto* gen_tasks_cmd = app.add_subcommand("gen-tasks", "generate multi-hop tasks for a world");
    std::string world_path;
    TaskGenConfig task_config;
    gen_tasks_cmd->add_option("--world", world_path, "world JSON")->required();
    gen_tasks_cmd->add_option("--count", task_config.count, "number of tasks")->required();
    gen_tasks_cmd->add_option("--depth-min", task_config.depth_min, "minimum chain length")
        ->required();
    gen_tasks_cmd->add_option("--depth-max", task_config.depth_max, "maximum chain length")
        ->required();
    gen_tasks_cmd->add_option("--noise", task_config.noise_scale, "feature noise scale")
        ->required();
    gen_tasks_cmd->add_option("--seed", seed, "generator seed")->required();
    gen_tasks_cmd->add_option("--out", out_path, "output tasks JSON")->required();

    // explore
    auto* explore_cmd = app.add_subcommand("explore", "build the tool knowledge base offline");
    int max_rounds = 10;
    explore_cmd->add_option("--world", world_path, "world JSON")->required();
    explore_cmd->add_option("--max-rounds", max_rounds, "probe budget per tool");
    explore_cmd->add_option("--seed", seed, "exploration seed")->required();
    explore_cmd->add_option("--out", out_path, "output knowledge base JSON")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "train the planner with group-relative updates");
    TrainCli train_cli;
    train_cmd->add_option("--world", train_cli.world_path, "world JSON")->required();
    train_cmd->add_option("--tasks", train_cli.tasks_path, "tasks JSON")->required();
    train_cmd->add_option("--reward", train_cli.reward, "dense|sparse")
        ->check(CLI::IsMember({"dense", "sparse"}));
    train_cmd->add_option("--k", train_cli.config.k, "group size");
    train_cmd->add_option("--epochs", train_cli.config.epochs, "training epochs");
    train_cmd->add_option("--lr", train_cli.config.learning_rate, "learning rate");
    train_cmd->add_option("--clip-eps", train_cli.config.clip_eps, "clipping epsilon");
    train_cmd->add_option("--eta", train_cli.config.eta, "advantage stability constant");
    train_cmd->add_option("--batch-tasks", train_cli.config.batch_tasks, "tasks per batch");
    train_cmd->add_option("--inner-updates", train_cli.config.inner_updates,
                          "gradient steps per sampling round");
    train_cmd->add_option("--length-penalty", train_cli.config.length_penalty,
                          "training-only penalty per step beyond the reference length");
    train_cmd->add_option("--seed", train_cli.config.seed, "training seed")->required();
    train_cmd->add_option("--out", train_cli.out_path, "output planner JSON")->required();
    train_cmd->add_option("--log", train_cli.log_path, "training log CSV");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a planner on tasks");
    std::string tasks_path, planner_path, kb_path, export_plans_path;
    int retry_budget = 2;
    eval_cmd->add_option("--world", world_path, "world JSON")->required();
    eval_cmd->add_option("--tasks", tasks_path, "tasks JSON")->required();
    eval_cmd->add_option("--planner", planner_path, "planner JSON")->required();
    eval_cmd->add_option("--kb", kb_path, "knowledge base JSON");
    eval_cmd->add_option("--retry-budget", retry_budget, "retries per failed step");
    eval_cmd->add_option("--out", out_path, "output metrics JSON")->required();
    eval_cmd->add_option("--export-plans", export_plans_path, "write decoded plans JSON");
    bool trace_flag = false;
    eval_cmd->add_flag("--trace", trace_flag, "dump one line per tool invocation");

    // ablate
    auto* ablate_cmd = app.add_subcommand("ablate", "run one ablation arm against the baseline");
    std::string which = "no_planning_reward";
    AblationConfig ablation;
    ablate_cmd->add_option("--which", which, "no_planning_reward|no_exploration")
        ->required()
        ->check(CLI::IsMember({"no_planning_reward", "no_exploration"}));
    ablate_cmd->add_option("--world", world_path, "world JSON")->required();
    ablate_cmd->add_option("--tasks", tasks_path, "tasks JSON")->required();
    ablate_cmd->add_option("--k", ablation.train.k, "group size");
    ablate_cmd->add_option("--epochs", ablation.train.epochs, "training epochs");
    ablate_cmd->add_option("--lr", ablation.train.learning_rate, "learning rate");
    ablate_cmd->add_option("--clip-eps", ablation.train.clip_eps, "clipping epsilon");
    ablate_cmd->add_option("--eta", ablation.train.eta, "advantage stability constant");
    ablate_cmd->add_option("--batch-tasks", ablation.train.batch_tasks, "tasks per batch");
    ablate_cmd->add_option("--inner-updates", ablation.train.inner_updates,
                           "gradient steps per sampling round");
    ablate_cmd->add_option("--length-penalty", ablation.train.length_penalty,
                           "training-only penalty per step beyond the reference length");
    ablate_cmd->add_option("--max-rounds", ablation.explore_max_rounds, "probe budget per tool");
    ablate_cmd->add_option("--retry-budget", ablation.retry_budget, "retries per failed step");
    ablate_cmd->add_option("--seed", ablation.train.seed, "seed shared by both arms")->required();
    ablate_cmd->add_option("--out", out_path, "output report JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_world->parsed()) {
            const ToolWorld world = generate_world(world_config, seed);
            write_file(out_path, world_to_json(world));
            std::cout << "wrote world with " << world.num_tools() << " tools (longest chain "
                      << world.longest_chain() << ") to " << out_path << "\n";
        } else if (gen_tasks_cmd->parsed()) {
            const ToolWorld world = load_world_file(world_path);
            const std::vector<Task> tasks = generate_tasks(world, task_config, seed);
            write_file(out_path, world_to_json(world, &tasks));
            std::cout << "wrote " << tasks.size() << " tasks to " << out_path << "\n";
        } else if (explore_cmd->parsed()) {
            const ToolWorld world = load_world_file(world_path);
            const KnowledgeBase kb = build_knowledge_base(world, max_rounds, seed);
            write_file(out_path, kb_to_json(kb));
            int covered = 0;
            for (const auto& [id, entry] : kb.entries) {
                if (!entry.validated_templates.empty()) ++covered;
            }
            std::cout << "explored " << kb.entries.size() << " tools; " << covered
                      << " have validated templates\n";
        } else if (train_cmd->parsed()) {
            run_training(train_cli, std::cout);
            std::cout << "wrote planner to " << train_cli.out_path << "\n";
        } else if (eval_cmd->parsed()) {
            const ToolWorld world = load_world_file(world_path);
            const std::vector<Task> tasks = load_tasks_file(tasks_path, world);
            const PlannerParams params = planner_from_json(read_file(planner_path));
            KnowledgeBase kb;
            const bool with_kb = !kb_path.empty();
            if (with_kb) kb = kb_from_json(read_file(kb_path));
            const Metrics metrics =
                evaluate(world, tasks, params, with_kb ? &kb : nullptr, retry_budget);
            write_file(out_path, metrics_to_json(metrics));
            if (!export_plans_path.empty()) {
                std::vector<Plan> plans;
                plans.reserve(tasks.size());
                for (const auto& task : tasks) {
                    plans.push_back(decode_greedy(params, world, task, params.max_steps));
                }
                write_file(export_plans_path, plans_to_json(plans));
            }
            if (trace_flag) {
                for (const auto& task : tasks) {
                    const Plan plan = decode_greedy(params, world, task, params.max_steps);
                    const ExecutionTrace trace =
                        execute_plan(world, plan, task, with_kb ? &kb : nullptr, retry_budget);
                    std::cout << "task=" << task.task_id << "\n";
                    dump_trace(trace, std::cout);
                }
            }
            std::cout << "SR " << metrics.success_rate << ", IER "
                      << metrics.invocation_error_rate << ", exact-match "
                      << metrics.plan_exact_match_rate << "\n";
        } else if (ablate_cmd->parsed()) {
            const ToolWorld world = load_world_file(world_path);
            const std::vector<Task> tasks = load_tasks_file(tasks_path, world);
            const AblationVariant variant = which == "no_exploration"
                                                ? AblationVariant::NoExploration
                                                : AblationVariant::NoPlanningReward;
            const AblationReport report = run_ablation(world, tasks, ablation, variant);
            write_file(out_path, ablation_report_to_json(report));
            std::cout << which << ": baseline SR " << report.baseline.success_rate << " IER "
                      << report.baseline.invocation_error_rate << " | variant SR "
                      << report.variant.success_rate << " IER "
                      << report.variant.invocation_error_rate << " | direction "
                      << (report.direction_holds ? "holds" : "violated") << "\n";
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
