#include "toolplan/explorer.hpp"

#include <algorithm>
#include <stdexcept>

namespace toolplan {

namespace {

constexpr std::uint64_t kExploreTag = 0x6578706cULL;  // "expl"

std::vector<Value> pool_for(ValueType type) {
    std::vector<Value> pool;
    switch (type) {
        case ValueType::Integer:
            for (std::int64_t v : kIntegerProbePool) pool.emplace_back(v);
            break;
        case ValueType::Real:
            for (double v : kRealProbePool) pool.emplace_back(v);
            break;
        case ValueType::String:
            for (const auto& v : string_probe_pool()) pool.emplace_back(v);
            break;
    }
    return pool;
}

bool map_in_failures(const ArgumentMap& candidate,
                     const std::vector<std::pair<ArgumentMap, InvokeError>>& failures) {
    for (const auto& [failed, kind] : failures) {
        if (failed == candidate) return true;
    }
    return false;
}

}  // namespace

std::optional<ArgumentMap> propose_arguments(
    const std::vector<ParamSchema>& schema,
    const std::vector<std::pair<ArgumentMap, InvokeError>>& prior_failures, Rng& rng) {
    std::vector<const ParamSchema*> required;
    for (const auto& p : schema) {
        if (p.required) required.push_back(&p);
    }
    std::sort(required.begin(), required.end(),
              [](const ParamSchema* a, const ParamSchema* b) { return a->name < b->name; });

    if (prior_failures.empty()) {
        ArgumentMap candidate;
        for (const ParamSchema* p : required) {
            const auto pool = pool_for(p->declared_type);
            candidate[p->name] = pool[rng.uniform_int(static_cast<std::int64_t>(pool.size()))];
        }
        return candidate;
    }

    // Start from the most recent failure and vary one parameter at a time,
    // preferring values that no recorded failure has used for it.
    const ArgumentMap& last = prior_failures.back().first;
    ArgumentMap base;
    for (const ParamSchema* p : required) {
        const auto pool = pool_for(p->declared_type);
        const auto it = last.find(p->name);
        base[p->name] = it != last.end()
                            ? it->second
                            : pool[rng.uniform_int(static_cast<std::int64_t>(pool.size()))];
    }

    // The violating parameter is not reported, so rotate which one is varied:
    // alternating the swept coordinate across rounds resolves joint
    // constraints on several parameters within a small budget.
    for (std::size_t offset = 0; offset < required.size(); ++offset) {
        const ParamSchema* p =
            required[(prior_failures.size() + offset) % required.size()];
        std::vector<Value> untried;
        for (const Value& v : pool_for(p->declared_type)) {
            bool seen = false;
            for (const auto& [failed, kind] : prior_failures) {
                const auto it = failed.find(p->name);
                if (it != failed.end() && it->second == v) {
                    seen = true;
                    break;
                }
            }
            if (!seen) untried.push_back(v);
        }
        while (!untried.empty()) {
            const auto pick = rng.uniform_int(static_cast<std::int64_t>(untried.size()));
            ArgumentMap candidate = base;
            candidate[p->name] = untried[pick];
            if (!map_in_failures(candidate, prior_failures)) return candidate;
            untried.erase(untried.begin() + pick);
        }
    }

    // Every per-parameter pool has been seen in some failure; fall back to a
    // full sweep of the product space before declaring exhaustion.
    std::vector<std::vector<Value>> pools;
    pools.reserve(required.size());
    for (const ParamSchema* p : required) pools.push_back(pool_for(p->declared_type));

    std::vector<std::size_t> cursor(required.size(), 0);
    while (true) {
        ArgumentMap candidate;
        for (std::size_t i = 0; i < required.size(); ++i) {
            candidate[required[i]->name] = pools[i][cursor[i]];
        }
        if (!map_in_failures(candidate, prior_failures)) return candidate;

        std::size_t i = 0;
        for (; i < cursor.size(); ++i) {
            if (++cursor[i] < pools[i].size()) break;
            cursor[i] = 0;
        }
        if (i == cursor.size()) return std::nullopt;  // probe space exhausted
        if (cursor.empty()) return std::nullopt;
    }
}

KnowledgeEntry explore_tool(const ToolWorld& world, int tool_id, const ExploreConfig& config,
                            Rng& rng) {
    if (tool_id < 0 || tool_id >= world.num_tools()) {
        throw std::invalid_argument("tool_id does not exist in the world");
    }
    if (config.max_rounds < 1) throw std::invalid_argument("max_rounds must be positive");

    const ToolSpec& tool = world.tools[tool_id];
    const std::string dep_name = tool.dependency_param.value_or("");

    std::vector<ParamSchema> probe_schema;
    for (const auto& p : tool.params) {
        if (p.name != dep_name) probe_schema.push_back(p);
    }

    KnowledgeEntry entry;
    entry.tool_id = tool_id;

    std::vector<std::pair<ArgumentMap, InvokeError>> probe_failures;
    for (int round = 0; round < config.max_rounds; ++round) {
        const auto proposal = propose_arguments(probe_schema, probe_failures, rng);
        if (!proposal.has_value()) break;

        ArgumentMap args = *proposal;
        if (!dep_name.empty()) args[dep_name] = Value{kDependencySentinel};

        ++entry.rounds_used;
        const InvocationResult result = invoke_tool(world, ToolCall{tool.name, args});
        if (result.ok()) {
            if (std::find(entry.validated_templates.begin(), entry.validated_templates.end(),
                          args) == entry.validated_templates.end()) {
                entry.validated_templates.push_back(args);
            }
            if (config.stop_on_first_success ||
                static_cast<int>(entry.validated_templates.size()) >= config.template_cap) {
                break;
            }
        } else {
            entry.failures.emplace_back(args, *result.error);
            probe_failures.emplace_back(*proposal, *result.error);
        }
    }
    return entry;
}

KnowledgeBase build_knowledge_base(const ToolWorld& world, int max_rounds, std::uint64_t seed) {
    KnowledgeBase kb;
    kb.world_seed = world.seed;
    ExploreConfig config;
    config.max_rounds = max_rounds;
    for (int t = 0; t < world.num_tools(); ++t) {
        Rng rng(derive_seed(seed, kExploreTag, static_cast<std::uint64_t>(t)));
        kb.entries[t] = explore_tool(world, t, config, rng);
    }
    return kb;
}

}  // namespace toolplan
