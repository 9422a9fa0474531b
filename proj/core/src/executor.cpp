#include "toolplan/executor.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <string>

namespace toolplan {

namespace {

constexpr std::uint64_t kBindTag = 0x62696e64ULL;  // "bind"

Value probe_pool_pick(ValueType type, Rng& rng) {
    switch (type) {
        case ValueType::Integer:
            return Value{kIntegerProbePool[rng.uniform_int(kIntegerProbePool.size())]};
        case ValueType::Real:
            return Value{kRealProbePool[rng.uniform_int(kRealProbePool.size())]};
        case ValueType::String: {
            const auto& pool = string_probe_pool();
            return Value{pool[rng.uniform_int(static_cast<std::int64_t>(pool.size()))]};
        }
    }
    return Value{std::int64_t{0}};
}

}  // namespace

std::optional<ToolCall> bind_arguments(const ToolWorld& world, const StepContext& ctx,
                                       const KnowledgeEntry* kb_entry, int template_index,
                                       Rng* ablation_rng) {
    const int tool_id = ctx.sub_task.tool_id;
    if (tool_id < 0 || tool_id >= world.num_tools()) {
        throw std::invalid_argument("bind_arguments needs a tool that exists in the world");
    }
    const ToolSpec& tool = world.tools[tool_id];
    const std::string dep_name = tool.dependency_param.value_or("");

    ToolCall call;
    call.tool_name = tool.name;

    if (kb_entry != nullptr) {
        if (kb_entry->validated_templates.empty()) return std::nullopt;
        if (template_index < 0 ||
            template_index >= static_cast<int>(kb_entry->validated_templates.size())) {
            throw std::invalid_argument("template_index outside the validated templates");
        }
        call.arguments = kb_entry->validated_templates[template_index];
    } else {
        if (ablation_rng == nullptr) {
            throw std::invalid_argument("no-knowledge binding needs an rng");
        }
        for (const auto& p : tool.params) {
            if (!p.required || p.name == dep_name) continue;
            call.arguments[p.name] = probe_pool_pick(p.declared_type, *ablation_rng);
        }
    }

    if (!dep_name.empty()) {
        call.arguments[dep_name] =
            ctx.history.empty() ? Value{kDependencySentinel} : ctx.history.back();
    }
    return call;
}

ExecutionTrace execute_plan(const ToolWorld& world, const Plan& plan, const Task& task,
                            const KnowledgeBase* kb, int retry_budget) {
    if (retry_budget < 0) throw std::invalid_argument("retry_budget must be non-negative");

    ExecutionTrace trace;
    std::vector<Value> history;

    for (int step_index = 0; step_index < plan.size(); ++step_index) {
        const PlanStep& step = plan.steps[step_index];

        // A tool id outside the world models a hallucinated tool name: the
        // call is attempted once and rejected by the environment.
        if (step.tool_id < 0 || step.tool_id >= world.num_tools()) {
            ToolCall call{"ghost_tool_" + std::to_string(step.tool_id), {}};
            const InvocationResult result = invoke_tool(world, call);
            ++trace.calls_attempted;
            ++trace.calls_errored;
            trace.attempts.push_back(AttemptRecord{step_index, 0, call, result});
            trace.steps.push_back(StepRecord{call, result, 0});
            trace.aborted = true;
            break;
        }

        StepContext ctx{&task, step, history};
        const KnowledgeEntry* entry = kb != nullptr ? kb->entry_for(step.tool_id) : nullptr;

        if (kb != nullptr && (entry == nullptr || entry->validated_templates.empty())) {
            trace.no_template_step = step_index;
            trace.aborted = true;
            break;
        }

        const int max_attempts =
            entry != nullptr
                ? std::min(1 + retry_budget, static_cast<int>(entry->validated_templates.size()))
                : 1 + retry_budget;

        bool step_succeeded = false;
        for (int attempt = 0; attempt < max_attempts; ++attempt) {
            std::optional<ToolCall> call;
            if (entry != nullptr) {
                call = bind_arguments(world, ctx, entry, attempt);
            } else {
                Rng rng(derive_seed(world.seed, kBindTag, static_cast<std::uint64_t>(task.task_id),
                                    static_cast<std::uint64_t>(step_index),
                                    static_cast<std::uint64_t>(attempt)));
                call = bind_arguments(world, ctx, nullptr, 0, &rng);
            }

            const InvocationResult result = invoke_tool(world, *call);
            ++trace.calls_attempted;
            trace.attempts.push_back(AttemptRecord{step_index, attempt, *call, result});

            if (result.ok()) {
                history.push_back(*result.output);
                trace.steps.push_back(StepRecord{*call, result, attempt});
                step_succeeded = true;
                break;
            }
            ++trace.calls_errored;
            if (attempt + 1 == max_attempts) {
                trace.steps.push_back(StepRecord{*call, result, attempt});
            }
        }

        if (!step_succeeded) {
            trace.aborted = true;
            break;
        }
    }

    if (!plan.empty() && !trace.aborted && static_cast<int>(history.size()) == plan.size()) {
        trace.final_output = history.back();
    }
    return trace;
}

void dump_trace(const ExecutionTrace& trace, std::ostream& out) {
    for (const auto& a : trace.attempts) {
        out << "step=" << a.step_index + 1 << " tool=" << a.call.tool_name
            << " attempt=" << a.attempt + 1 << " outcome=";
        if (a.result.ok()) {
            out << "success";
        } else {
            out << "error:" << invoke_error_name(*a.result.error);
        }
        out << '\n';
    }
}

}  // namespace toolplan
