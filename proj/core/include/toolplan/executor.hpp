#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "toolplan/explorer.hpp"
#include "toolplan/rng.hpp"
#include "toolplan/toolworld.hpp"

namespace toolplan {

// Context available when executing one plan step: the originating query, the
// sub-task, and the observations collected so far.
struct StepContext {
    const Task* query = nullptr;
    PlanStep sub_task;
    std::vector<Value> history;
};

struct StepRecord {
    ToolCall call;  // final attempt for the step
    InvocationResult result;
    int retries_used = 0;
};

struct AttemptRecord {
    int step_index = 0;  // 0-based position in the plan
    int attempt = 0;     // 0-based attempt counter within the step
    ToolCall call;
    InvocationResult result;
};

struct ExecutionTrace {
    std::vector<StepRecord> steps;      // one record per step that was invoked
    std::vector<AttemptRecord> attempts;  // every invocation, in order
    std::optional<Value> final_output;  // engaged iff every plan step succeeded
    int calls_attempted = 0;
    int calls_errored = 0;
    bool aborted = false;
    std::optional<int> no_template_step;  // step that had no usable template to bind
};

// Builds the concrete tool call for a step. With a knowledge-base entry the
// chosen validated template is copied and the dependency parameter is
// overwritten with the latest observation (placeholder when none exists).
// Without an entry (exploration ablation) arguments come from the declared
// schema and the shared probe pools, which may violate hidden constraints.
// Returns nullopt when the entry exists but holds no validated template.
std::optional<ToolCall> bind_arguments(const ToolWorld& world, const StepContext& ctx,
                                       const KnowledgeEntry* kb_entry, int template_index,
                                       Rng* ablation_rng = nullptr);

// Executes the plan in order, retrying each failed step with the next
// template (or next seeded guess) up to retry_budget times, and aborting
// once a step exhausts its attempts. Failure is data in the trace.
ExecutionTrace execute_plan(const ToolWorld& world, const Plan& plan, const Task& task,
                            const KnowledgeBase* kb, int retry_budget);

// Line-oriented debug dump, one line per invocation.
void dump_trace(const ExecutionTrace& trace, std::ostream& out);

}  // namespace toolplan
