#include "toolplan/toolworld.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace toolplan {

namespace {

constexpr std::uint64_t kWorldTag = 0x776f726c64ULL;   // "world"
constexpr std::uint64_t kTaskTag = 0x7461736bULL;      // "task"
constexpr std::uint64_t kEmbedTag = 0x656d62ULL;       // "emb"
constexpr std::uint64_t kOutputTag = 0x544f4f4cULL;    // "TOOL"

// Per-step increment of the chain-length feature coordinate. Sized so the
// length channel stays decodable above the noise floor without dominating
// the tool-signature coordinates.
constexpr double kLengthCoordinateStep = 0.5;

// 16 tokens, four per leading character; format constraints select leading
// characters, enum constraints select subsets, so payload density within the
// pool never drops below 3/16.
const std::vector<std::string> kStringPool = {
    "alpha", "amber", "apex",   "aria",
    "beta",  "blaze", "bronze", "brook",
    "cedar", "coral", "cove",   "crest",
    "delta", "dawn",  "drift",  "dusk",
};

const std::vector<std::string> kVerbPool = {
    "fetch", "parse", "rank", "merge", "score", "trace", "index", "filter",
    "join",  "split", "scan", "probe", "fold",  "diff",  "sum",   "group",
};

const std::vector<std::string> kNounPool = {
    "records", "units", "routes", "labels", "orders", "metrics", "events", "nodes",
    "frames",  "batches", "keys", "entries", "docs",  "spans",   "links",  "series",
};

const std::vector<std::string> kDescVocab = {
    "computes", "a", "derived", "quantity", "from", "the", "given", "inputs",
    "aggregates", "matching", "resource", "identifiers", "over", "one", "request",
    "returns", "numeric", "result", "for", "downstream", "use", "queries",
    "an", "internal", "catalog", "and", "reports", "its", "findings",
};

const std::vector<std::string> kParamNamePool = {
    "query", "unit", "count", "limit", "mode", "path", "target", "key",
    "window", "level", "format", "source", "tag", "size", "rate", "scope",
};

std::uint64_t tool_signature(const ToolSpec& tool) {
    // Canonical signature of the call shape: required parameter names in
    // lexicographic order together with their constraint classes. Every
    // successful call to a tool shares this signature, so outputs do not
    // depend on which valid argument values were chosen. Task answers stay
    // reproducible by any constraint-satisfying execution of the same chain.
    std::vector<const ParamSchema*> required;
    for (const auto& p : tool.params) {
        if (p.required) required.push_back(&p);
    }
    std::sort(required.begin(), required.end(),
              [](const ParamSchema* a, const ParamSchema* b) { return a->name < b->name; });
    std::uint64_t sig = 0x534947ULL;
    for (const ParamSchema* p : required) {
        sig = hash_combine(sig, hash_bytes(p->name));
        sig = hash_combine(sig, static_cast<std::uint64_t>(p->declared_type));
        for (const auto& c : tool.hidden_constraints) {
            if (c.param_name == p->name) {
                sig = hash_combine(sig, static_cast<std::uint64_t>(c.kind) + 7);
            }
        }
    }
    return sig;
}

std::vector<int> topological_order(const std::vector<std::vector<int>>& adj) {
    const int n = static_cast<int>(adj.size());
    std::vector<int> indegree(n, 0);
    for (const auto& succ : adj) {
        for (int v : succ) {
            if (v < 0 || v >= n) throw std::invalid_argument("chain_graph edge out of range");
            ++indegree[v];
        }
    }
    std::vector<int> order;
    order.reserve(n);
    std::vector<int> frontier;
    for (int v = 0; v < n; ++v) {
        if (indegree[v] == 0) frontier.push_back(v);
    }
    while (!frontier.empty()) {
        const int u = frontier.back();
        frontier.pop_back();
        order.push_back(u);
        for (int v : adj[u]) {
            if (--indegree[v] == 0) frontier.push_back(v);
        }
    }
    if (static_cast<int>(order.size()) != n) {
        throw std::invalid_argument("acyclicity violated");
    }
    return order;
}

// Longest path (in nodes) starting at each vertex.
std::vector<int> longest_from(const std::vector<std::vector<int>>& adj) {
    const auto order = topological_order(adj);
    std::vector<int> best(adj.size(), 1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        for (int v : adj[*it]) {
            best[*it] = std::max(best[*it], 1 + best[v]);
        }
    }
    return best;
}

}  // namespace

const std::vector<std::string>& string_probe_pool() { return kStringPool; }

bool HiddenConstraint::satisfied_by(const Value& v) const {
    switch (kind) {
        case Kind::EnumMembership: {
            const auto* s = std::get_if<std::string>(&v);
            if (s == nullptr) return false;
            return std::find(allowed_tokens.begin(), allowed_tokens.end(), *s) != allowed_tokens.end();
        }
        case Kind::IntegerRange: {
            const auto* i = std::get_if<std::int64_t>(&v);
            if (i == nullptr) return false;
            return lo <= *i && *i <= hi;
        }
        case Kind::StringFormat: {
            const auto* s = std::get_if<std::string>(&v);
            if (s == nullptr || s->empty()) return false;
            return first_chars.find((*s)[0]) != std::string::npos;
        }
    }
    return false;
}

const ParamSchema* ToolSpec::find_param(const std::string& param_name) const {
    for (const auto& p : params) {
        if (p.name == param_name) return &p;
    }
    return nullptr;
}

std::vector<int> Plan::tool_ids() const {
    std::vector<int> ids;
    ids.reserve(steps.size());
    for (const auto& s : steps) ids.push_back(s.tool_id);
    return ids;
}

std::vector<std::string> make_sub_query(int step_index, const std::string& tool_name) {
    return {"step", std::to_string(step_index + 1), "use", tool_name};
}

const ToolSpec* ToolWorld::find_tool(const std::string& name) const {
    for (const auto& t : tools) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

bool ToolWorld::has_edge(int from, int to) const {
    if (from < 0 || from >= num_tools()) return false;
    const auto& succ = chain_graph[from];
    return std::find(succ.begin(), succ.end(), to) != succ.end();
}

int ToolWorld::longest_chain() const {
    const auto best = longest_from(chain_graph);
    int overall = 0;
    for (int b : best) overall = std::max(overall, b);
    return overall;
}

const char* invoke_error_name(InvokeError e) {
    switch (e) {
        case InvokeError::UnknownTool: return "UnknownTool";
        case InvokeError::MissingParam: return "MissingParam";
        case InvokeError::TypeMismatch: return "TypeMismatch";
        case InvokeError::ConstraintViolation: return "ConstraintViolation";
        case InvokeError::DependencyUnmet: return "DependencyUnmet";
    }
    return "Unknown";
}

ToolWorld generate_world(const WorldConfig& config, std::uint64_t seed) {
    if (config.num_tools < 4) throw std::invalid_argument("num_tools must be at least 4");
    if (config.max_depth < 2) throw std::invalid_argument("max_depth must be at least 2");
    if (config.feature_dim < 1) throw std::invalid_argument("feature_dim must be positive");
    if (config.hidden_constraint_rate < 0.0 || config.hidden_constraint_rate > 1.0) {
        throw std::invalid_argument("hidden_constraint_rate must lie in [0, 1]");
    }
    if (config.max_depth > config.num_tools) {
        throw std::invalid_argument("cannot build a chain of the requested depth: max_depth exceeds num_tools");
    }

    Rng rng(derive_seed(seed, kWorldTag));
    const int n = config.num_tools;
    const int depth = config.max_depth;

    // The ecosystem is a set of disjoint tool pipelines whose lengths cycle
    // through max_depth, max_depth-1, ..., 2. Chains of every usable length
    // exist, so tasks can end at a pipeline's sink for any requested depth.
    // One tool never feeds two pipelines, which keeps the chain structure
    // separable for a small planner while still exercising multi-hop
    // dependencies end to end.
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);

    // One pipeline per usable length first (the deep pipelines carry the
    // most structure, so each gets the full share of its depth's tasks),
    // then short extra pipelines absorb the remaining tools.
    std::vector<std::vector<int>> chains;
    std::size_t cursor = 0;
    int next_len = depth;
    while (n - static_cast<int>(cursor) >= 2) {
        const int remaining = n - static_cast<int>(cursor);
        // Two-hop extras: the deeper the pipeline, the more structure its
        // tasks must teach, so longer lengths keep a single pipeline each.
        const int len = next_len >= 2 ? std::min(next_len, remaining) : std::min(2, remaining);
        if (next_len >= 2) --next_len;
        if (len < 2) break;
        std::vector<int> chain(perm.begin() + cursor, perm.begin() + cursor + len);
        chains.push_back(chain);
        cursor += len;
    }
    // Any remaining tool joins the first chain as an alternate entry point.
    std::vector<int> extra_roots;
    for (; cursor < static_cast<std::size_t>(n); ++cursor) extra_roots.push_back(perm[cursor]);

    std::vector<std::vector<int>> adj(n);
    std::vector<int> indeg(n, 0);
    auto add_edge = [&](int u, int v) {
        if (std::find(adj[u].begin(), adj[u].end(), v) != adj[u].end()) return;
        adj[u].push_back(v);
        ++indeg[v];
    };

    for (const auto& chain : chains) {
        for (std::size_t i = 0; i + 1 < chain.size(); ++i) add_edge(chain[i], chain[i + 1]);
    }
    for (std::size_t i = 0; i < extra_roots.size(); ++i) {
        const auto& host = chains[i % chains.size()];
        add_edge(extra_roots[i], host[1 % host.size()]);
    }
    for (auto& succ : adj) std::sort(succ.begin(), succ.end());

    ToolWorld world;
    world.seed = seed;
    world.feature_dim = config.feature_dim;
    world.chain_graph = adj;
    world.tools.resize(n);

    std::vector<std::string> used_names;
    for (int t = 0; t < n; ++t) {
        ToolSpec& tool = world.tools[t];
        tool.tool_id = t;
        tool.output_kind = ValueType::Integer;

        std::string name = kVerbPool[rng.uniform_int(kVerbPool.size())] + "_" +
                           kNounPool[rng.uniform_int(kNounPool.size())];
        while (std::find(used_names.begin(), used_names.end(), name) != used_names.end()) {
            name += "_" + std::to_string(t);
        }
        used_names.push_back(name);
        tool.name = name;

        const int desc_len = 5 + static_cast<int>(rng.uniform_int(5));
        for (int i = 0; i < desc_len; ++i) {
            tool.description.push_back(kDescVocab[rng.uniform_int(kDescVocab.size())]);
        }

        // First parameter is always required and constrainable (integer or
        // string); the rest add schema variety.
        std::vector<std::string> names(kParamNamePool);
        rng.shuffle(names);
        const int extra = static_cast<int>(rng.uniform_int(3));
        for (int p = 0; p <= extra; ++p) {
            ParamSchema schema;
            schema.name = names[p];
            if (p == 0) {
                schema.declared_type = rng.uniform() < 0.5 ? ValueType::Integer : ValueType::String;
                schema.required = true;
            } else {
                const double roll = rng.uniform();
                schema.declared_type = roll < 0.4   ? ValueType::Integer
                                       : roll < 0.65 ? ValueType::Real
                                                     : ValueType::String;
                schema.required = rng.uniform() < 0.8;
            }
            tool.params.push_back(schema);
        }
        if (indeg[t] > 0) {
            tool.params.push_back(ParamSchema{"input", ValueType::Integer, true});
            tool.dependency_param = "input";
        }

        if (rng.uniform() < config.hidden_constraint_rate) {
            // One constraint per tool: the ten-round exploration budget is
            // calibrated for discovering a single constrained parameter.
            std::vector<const ParamSchema*> eligible;
            for (const auto& p : tool.params) {
                if (p.required && p.name != "input" && p.declared_type != ValueType::Real) {
                    eligible.push_back(&p);
                }
            }
            const int how_many = 1;
            for (int c = 0; c < how_many; ++c) {
                const ParamSchema* target = eligible[c];
                HiddenConstraint constraint;
                constraint.param_name = target->name;
                if (target->declared_type == ValueType::Integer) {
                    // Window over the sorted probe pool; covers 2..4 of its 7
                    // values so discovery density stays >= 2/7.
                    std::vector<std::int64_t> pool(kIntegerProbePool.begin(), kIntegerProbePool.end());
                    std::sort(pool.begin(), pool.end());
                    const int width = 2 + static_cast<int>(rng.uniform_int(3));
                    const int start = static_cast<int>(rng.uniform_int(static_cast<std::int64_t>(pool.size()) - width + 1));
                    constraint.kind = HiddenConstraint::Kind::IntegerRange;
                    constraint.lo = pool[start];
                    constraint.hi = pool[start + width - 1];
                } else if (rng.uniform() < 0.6) {
                    // Enum payload of 4..8 pool tokens: density >= 1/4.
                    std::vector<std::string> shuffled(kStringPool);
                    rng.shuffle(shuffled);
                    const int size = 4 + static_cast<int>(rng.uniform_int(5));
                    constraint.kind = HiddenConstraint::Kind::EnumMembership;
                    constraint.allowed_tokens.assign(shuffled.begin(), shuffled.begin() + size);
                    std::sort(constraint.allowed_tokens.begin(), constraint.allowed_tokens.end());
                } else {
                    constraint.kind = HiddenConstraint::Kind::StringFormat;
                    const std::string chars = "abcd";
                    const int count = 1 + static_cast<int>(rng.uniform_int(2));
                    const int first = static_cast<int>(rng.uniform_int(4));
                    constraint.first_chars.push_back(chars[first]);
                    if (count == 2) {
                        constraint.first_chars.push_back(chars[(first + 1 + rng.uniform_int(3)) % 4]);
                    }
                }
                tool.hidden_constraints.push_back(constraint);
            }
        }
    }

    return world;
}

InvocationResult invoke_tool(const ToolWorld& world, const ToolCall& call,
                             const std::optional<Value>& upstream) {
    const ToolSpec* tool = world.find_tool(call.tool_name);
    if (tool == nullptr) return InvocationResult::failure(InvokeError::UnknownTool);

    const std::string dep_name = tool->dependency_param.value_or("");

    for (const auto& p : tool->params) {
        if (!p.required || p.name == dep_name) continue;
        if (call.arguments.find(p.name) == call.arguments.end()) {
            return InvocationResult::failure(InvokeError::MissingParam);
        }
    }

    // The dependency parameter binds from the call if present, otherwise from
    // the upstream value supplied by the environment.
    std::optional<Value> dep_value;
    if (!dep_name.empty()) {
        if (const auto it = call.arguments.find(dep_name); it != call.arguments.end()) {
            dep_value = it->second;
        } else if (upstream.has_value()) {
            dep_value = *upstream;
        }
    }

    for (const auto& [arg_name, arg_value] : call.arguments) {
        const ParamSchema* p = tool->find_param(arg_name);
        if (p == nullptr) continue;  // undeclared arguments are ignored
        if (!value_matches_type(arg_value, p->declared_type)) {
            return InvocationResult::failure(InvokeError::TypeMismatch);
        }
    }
    if (!dep_name.empty() && dep_value.has_value()) {
        const ParamSchema* p = tool->find_param(dep_name);
        if (p != nullptr && !value_matches_type(*dep_value, p->declared_type)) {
            return InvocationResult::failure(InvokeError::TypeMismatch);
        }
    }

    for (const auto& c : tool->hidden_constraints) {
        const auto it = call.arguments.find(c.param_name);
        if (it == call.arguments.end()) continue;
        if (!c.satisfied_by(it->second)) {
            return InvocationResult::failure(InvokeError::ConstraintViolation);
        }
    }

    if (!dep_name.empty() && !dep_value.has_value()) {
        const ParamSchema* p = tool->find_param(dep_name);
        if (p != nullptr && p->required) {
            return InvocationResult::failure(InvokeError::DependencyUnmet);
        }
    }

    const Value dep = dep_value.value_or(Value{kDependencySentinel});
    const std::uint64_t bits = derive_seed(world.seed, kOutputTag,
                                           static_cast<std::uint64_t>(tool->tool_id),
                                           tool_signature(*tool), hash_value(dep));
    return InvocationResult::success(Value{static_cast<std::int64_t>(bits >> 2)});
}

Value canonical_param_value(const ToolSpec& tool, const ParamSchema& param) {
    auto satisfies_all = [&](const Value& v) {
        for (const auto& c : tool.hidden_constraints) {
            if (c.param_name == param.name && !c.satisfied_by(v)) return false;
        }
        return true;
    };
    switch (param.declared_type) {
        case ValueType::Integer:
            for (std::int64_t v : kIntegerProbePool) {
                if (satisfies_all(Value{v})) return Value{v};
            }
            break;
        case ValueType::Real:
            for (double v : kRealProbePool) {
                if (satisfies_all(Value{v})) return Value{v};
            }
            break;
        case ValueType::String:
            for (const auto& v : string_probe_pool()) {
                if (satisfies_all(Value{v})) return Value{v};
            }
            break;
    }
    throw std::logic_error("no probe-pool value satisfies the constraints on parameter '" +
                           param.name + "' of tool '" + tool.name + "'");
}

ArgumentMap canonical_arguments(const ToolSpec& tool, const std::optional<Value>& upstream) {
    ArgumentMap args;
    const std::string dep_name = tool.dependency_param.value_or("");
    for (const auto& p : tool.params) {
        if (!p.required) continue;
        if (p.name == dep_name) {
            args[p.name] = upstream.value_or(Value{kDependencySentinel});
        } else {
            args[p.name] = canonical_param_value(tool, p);
        }
    }
    return args;
}

Value faithful_answer(const ToolWorld& world, const Plan& truth_plan) {
    if (truth_plan.empty()) throw std::invalid_argument("cannot execute an empty chain");
    std::optional<Value> upstream;
    for (const auto& step : truth_plan.steps) {
        if (step.tool_id < 0 || step.tool_id >= world.num_tools()) {
            throw std::invalid_argument("truth plan references an unknown tool");
        }
        const ToolSpec& tool = world.tools[step.tool_id];
        ToolCall call{tool.name, canonical_arguments(tool, upstream)};
        const InvocationResult result = invoke_tool(world, call, upstream);
        if (!result.ok()) {
            throw std::logic_error("faithful execution failed at tool '" + tool.name +
                                   "': " + invoke_error_name(*result.error));
        }
        upstream = result.output;
    }
    return *upstream;
}

namespace {

std::vector<double> unit_gaussian_vector(std::uint64_t seed, int dim) {
    Rng rng(seed);
    std::vector<double> v(dim);
    double norm = 0.0;
    for (double& x : v) {
        x = rng.gaussian();
        norm += x * x;
    }
    norm = std::sqrt(std::max(norm, 1e-12));
    for (double& x : v) x /= norm;
    return v;
}

// Signature of `tool` when it opens a chain. The opening signatures are
// pairwise orthogonalized (deterministic Gram-Schmidt over tool ids) up to
// the dimension budget, so distinct entry tools never bleed into each
// other's readouts.
std::vector<double> opening_signature(const ToolWorld& world, int tool, int dim) {
    std::vector<std::vector<double>> family;
    family.reserve(tool + 1);
    for (int t = 0; t <= tool; ++t) {
        auto v = unit_gaussian_vector(
            derive_seed(world.seed, kEmbedTag, std::uint64_t{0}, static_cast<std::uint64_t>(t)),
            dim);
        const std::size_t limit = std::min(family.size(), static_cast<std::size_t>(dim - 1));
        for (std::size_t f = 0; f < limit; ++f) {
            double dot = 0.0;
            for (int j = 0; j < dim; ++j) dot += v[j] * family[f][j];
            for (int j = 0; j < dim; ++j) v[j] -= dot * family[f][j];
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(std::max(norm, 1e-12));
        for (double& x : v) x /= norm;
        family.push_back(std::move(v));
    }
    return family.back();
}

}  // namespace

std::vector<double> plan_embedding(const ToolWorld& world, const std::vector<int>& tool_sequence) {
    // Coordinate 0 counts steps, so chain length stays readable from one
    // scalar. The rest of the vector sums unit-norm signatures keyed by
    // (position, tool). The opening position carries most of the weight and
    // its signatures are mutually orthogonal: selecting the right entry tool
    // is the only decision that must be read off the query alone, while
    // later steps can lean on the chain structure.
    const int dim = world.feature_dim;
    std::vector<double> features(dim, 0.0);

    for (std::size_t i = 0; i < tool_sequence.size(); ++i) {
        features[0] += kLengthCoordinateStep;
        if (dim < 2) continue;
        const double weight = i == 0 ? 1.6 : 0.6;
        const auto identity =
            i == 0 ? opening_signature(world, tool_sequence[0], dim - 1)
                   : unit_gaussian_vector(
                         derive_seed(world.seed, kEmbedTag, static_cast<std::uint64_t>(i),
                                     static_cast<std::uint64_t>(tool_sequence[i])), dim - 1);
        for (int j = 1; j < dim; ++j) {
            features[j] += weight * identity[j - 1];
        }
    }
    return features;
}

std::vector<Task> generate_tasks(const ToolWorld& world, const TaskGenConfig& config,
                                 std::uint64_t seed) {
    if (config.count <= 0) throw std::invalid_argument("task count must be positive");
    if (config.depth_min < 2) throw std::invalid_argument("depth_min must be at least 2");
    if (config.depth_min > config.depth_max) {
        throw std::invalid_argument("depth_min must not exceed depth_max");
    }
    if (config.noise_scale < 0.0) throw std::invalid_argument("noise_scale must be non-negative");
    const int usable_depth = world.longest_chain();
    if (config.depth_max > usable_depth) {
        throw std::invalid_argument("depth_max exceeds the world's longest chain");
    }

    const auto reach = longest_from(world.chain_graph);
    std::vector<int> indegree(world.num_tools(), 0);
    for (const auto& succ : world.chain_graph) {
        for (int v : succ) ++indegree[v];
    }

    std::vector<Task> tasks;
    tasks.reserve(config.count);
    for (int id = 0; id < config.count; ++id) {
        Rng rng(derive_seed(seed, kTaskTag, static_cast<std::uint64_t>(id)));
        const int m = config.depth_min +
                      static_cast<int>(rng.uniform_int(config.depth_max - config.depth_min + 1));

        // Chains run from a root to a sink whenever the graph offers a root
        // whose pipeline is exactly m hops deep, so each query's depth is a
        // property of the pipeline it exercises. Other graphs fall back to
        // any sufficiently deep start.
        std::vector<int> starts;
        for (int v = 0; v < world.num_tools(); ++v) {
            if (indegree[v] == 0 && reach[v] == m) starts.push_back(v);
        }
        if (starts.empty()) {
            for (int v = 0; v < world.num_tools(); ++v) {
                if (indegree[v] == 0 && reach[v] >= m) starts.push_back(v);
            }
        }
        if (starts.empty()) {
            for (int v = 0; v < world.num_tools(); ++v) {
                if (reach[v] >= m) starts.push_back(v);
            }
        }
        int node = starts[rng.uniform_int(static_cast<std::int64_t>(starts.size()))];

        std::vector<int> tool_sequence{node};
        for (int remaining = m - 1; remaining > 0; --remaining) {
            std::vector<int> options;
            for (int v : world.chain_graph[node]) {
                if (reach[v] >= remaining) options.push_back(v);
            }
            node = options[rng.uniform_int(static_cast<std::int64_t>(options.size()))];
            tool_sequence.push_back(node);
        }

        Task task;
        task.task_id = id;
        for (int i = 0; i < m; ++i) {
            task.truth_plan.steps.push_back(
                PlanStep{make_sub_query(i, world.tools[tool_sequence[i]].name), tool_sequence[i]});
        }
        task.features = plan_embedding(world, tool_sequence);
        for (double& f : task.features) f += config.noise_scale * rng.gaussian();
        task.answer = faithful_answer(world, task.truth_plan);
        tasks.push_back(std::move(task));
    }
    return tasks;
}

}  // namespace toolplan
