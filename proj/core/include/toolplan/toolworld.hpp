#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "toolplan/rng.hpp"
#include "toolplan/value.hpp"

namespace toolplan {

// Probe pools shared by the world generator (constraint payloads are drawn
// from them) and the explorer (candidate arguments are drawn from them), so
// every hidden constraint is discoverable by bounded probing.
inline constexpr std::array<std::int64_t, 7> kIntegerProbePool{0, 1, -1, 7, 42, 100, 1000};
inline constexpr std::array<double, 5> kRealProbePool{0.0, 1.0, -1.0, 0.5, 3.14};
const std::vector<std::string>& string_probe_pool();  // 16 fixed tokens

// Placeholder bound to dependency parameters when no upstream value exists
// (offline probing, or the first step of a chain).
inline constexpr std::int64_t kDependencySentinel = 0;

struct ParamSchema {
    std::string name;
    ValueType declared_type = ValueType::Integer;
    bool required = true;
};

// An argument restriction enforced by the environment but absent from the
// declared schema; discovering these is the explorer's job.
struct HiddenConstraint {
    enum class Kind { EnumMembership, IntegerRange, StringFormat };

    std::string param_name;
    Kind kind = Kind::EnumMembership;
    std::vector<std::string> allowed_tokens;  // EnumMembership
    std::int64_t lo = 0;                      // IntegerRange, inclusive
    std::int64_t hi = 0;
    std::string first_chars;                  // StringFormat: permitted first characters

    bool satisfied_by(const Value& v) const;
};

struct ToolSpec {
    int tool_id = 0;
    std::string name;
    std::vector<std::string> description;  // token list; never leaks constraint payloads
    std::vector<ParamSchema> params;
    std::vector<HiddenConstraint> hidden_constraints;
    ValueType output_kind = ValueType::Integer;
    std::optional<std::string> dependency_param;  // param fed by the upstream step's output

    const ParamSchema* find_param(const std::string& name) const;
};

// One step of a plan: a templated sub-query plus the tool chosen for it.
struct PlanStep {
    std::vector<std::string> sub_query;
    int tool_id = 0;
};

struct Plan {
    std::vector<PlanStep> steps;

    int size() const { return static_cast<int>(steps.size()); }
    bool empty() const { return steps.empty(); }
    std::vector<int> tool_ids() const;
};

std::vector<std::string> make_sub_query(int step_index, const std::string& tool_name);

struct ToolWorld {
    std::vector<ToolSpec> tools;
    // chain_graph[u] lists the tools whose dependency input is type-compatible
    // with u's output; edges always point forward in the topological order.
    std::vector<std::vector<int>> chain_graph;
    std::uint64_t seed = 0;
    int feature_dim = 0;

    int num_tools() const { return static_cast<int>(tools.size()); }
    const ToolSpec* find_tool(const std::string& name) const;
    bool has_edge(int from, int to) const;
    // Number of tools on the longest chain; this is the world's usable depth.
    int longest_chain() const;
};

struct Task {
    int task_id = 0;
    std::vector<double> features;
    Plan truth_plan;
    Value answer = std::int64_t{0};

    int depth() const { return truth_plan.size(); }
};

struct ToolCall {
    std::string tool_name;
    ArgumentMap arguments;
};

enum class InvokeError { UnknownTool, MissingParam, TypeMismatch, ConstraintViolation, DependencyUnmet };

const char* invoke_error_name(InvokeError e);

struct InvocationResult {
    std::optional<Value> output;      // engaged iff the call succeeded
    std::optional<InvokeError> error;

    bool ok() const { return output.has_value(); }

    static InvocationResult success(Value v) { return InvocationResult{std::move(v), std::nullopt}; }
    static InvocationResult failure(InvokeError e) { return InvocationResult{std::nullopt, e}; }
};

struct WorldConfig {
    int num_tools = 0;
    int feature_dim = 0;
    int max_depth = 0;
    double hidden_constraint_rate = 0.0;
};

struct TaskGenConfig {
    int count = 0;
    int depth_min = 2;
    int depth_max = 2;
    double noise_scale = 0.0;
};

// Deterministic function of (config, seed). Throws std::invalid_argument when
// the config cannot produce a valid world (e.g. max_depth > num_tools).
ToolWorld generate_world(const WorldConfig& config, std::uint64_t seed);

// Ground-truth invocation semantics. Invalid calls are legal inputs; errors
// are data, not faults.
InvocationResult invoke_tool(const ToolWorld& world, const ToolCall& call,
                             const std::optional<Value>& upstream = std::nullopt);

std::vector<Task> generate_tasks(const ToolWorld& world, const TaskGenConfig& config,
                                 std::uint64_t seed);

// Lowest-indexed probe-pool value satisfying every hidden constraint on the
// parameter. Always exists by construction of the payloads.
Value canonical_param_value(const ToolSpec& tool, const ParamSchema& param);

// Required-params-only assignment used by faithful execution.
ArgumentMap canonical_arguments(const ToolSpec& tool, const std::optional<Value>& upstream);

// Executes a tool chain with canonical constraint-satisfying arguments,
// threading each output into the next dependency parameter. Throws if any
// step fails (which would violate world invariants).
Value faithful_answer(const ToolWorld& world, const Plan& truth_plan);

// Deterministic embedding of a tool sequence into feature space; task
// features are this plus seeded Gaussian noise.
std::vector<double> plan_embedding(const ToolWorld& world, const std::vector<int>& tool_sequence);

}  // namespace toolplan
