#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "toolplan/rng.hpp"
#include "toolplan/toolworld.hpp"

namespace toolplan {

// Everything learned about one tool by offline probing: argument maps that
// returned success, recorded failures, and the probing budget spent.
struct KnowledgeEntry {
    int tool_id = 0;
    std::vector<ArgumentMap> validated_templates;
    std::vector<std::pair<ArgumentMap, InvokeError>> failures;
    int rounds_used = 0;
};

struct KnowledgeBase {
    std::map<int, KnowledgeEntry> entries;
    std::uint64_t world_seed = 0;

    const KnowledgeEntry* entry_for(int tool_id) const {
        const auto it = entries.find(tool_id);
        return it == entries.end() ? nullptr : &it->second;
    }
};

struct ExploreConfig {
    int max_rounds = 10;
    bool stop_on_first_success = false;  // default: collect up to template_cap templates
    int template_cap = 3;
};

// Next candidate assignment covering every required parameter with
// type-conforming probe-pool values. Never repeats an exact map from
// prior_failures; after constraint violations it varies the suspected
// parameter's value first, drawing untried values per parameter.
// Returns nullopt once the probe space is exhausted without success.
std::optional<ArgumentMap> propose_arguments(
    const std::vector<ParamSchema>& schema,
    const std::vector<std::pair<ArgumentMap, InvokeError>>& prior_failures, Rng& rng);

// Probe one tool for up to config.max_rounds rounds. Dependency parameters
// are pinned to the placeholder value during probing. A tool that never
// succeeds yields an entry with no validated templates, which is legal.
KnowledgeEntry explore_tool(const ToolWorld& world, int tool_id, const ExploreConfig& config,
                            Rng& rng);

// One explore_tool pass per tool, each with a private stream derived from
// (seed, tool_id); deterministic and order-independent.
KnowledgeBase build_knowledge_base(const ToolWorld& world, int max_rounds, std::uint64_t seed);

}  // namespace toolplan
