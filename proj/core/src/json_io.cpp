#include "toolplan/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace toolplan {

namespace {

using nlohmann::json;

void append_escaped(std::string& out, const std::string& s) {
    out.push_back('"');
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out.push_back(c);
                }
        }
    }
    out.push_back('"');
}

void append_int(std::string& out, std::int64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
    out += buf;
}

// 17 significant digits round-trip IEEE doubles exactly; a trailing ".0"
// keeps reals distinguishable from integers when parsed back.
void append_real(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    std::string s(buf);
    if (s.find_first_of(".eE") == std::string::npos &&
        s.find_first_of("0123456789") != std::string::npos) {
        s += ".0";
    }
    out += s;
}

void append_value(std::string& out, const Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) {
        append_int(out, *i);
    } else if (const auto* d = std::get_if<double>(&v)) {
        append_real(out, *d);
    } else {
        append_escaped(out, std::get<std::string>(v));
    }
}

void append_argument_map(std::string& out, const ArgumentMap& args) {
    out.push_back('{');
    bool first = true;
    for (const auto& [name, value] : args) {
        if (!first) out.push_back(',');
        first = false;
        append_escaped(out, name);
        out.push_back(':');
        append_value(out, value);
    }
    out.push_back('}');
}

void append_string_array(std::string& out, const std::vector<std::string>& items) {
    out.push_back('[');
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out.push_back(',');
        append_escaped(out, items[i]);
    }
    out.push_back(']');
}

const char* value_type_token(ValueType t) { return value_type_name(t); }

ValueType value_type_from_token(const std::string& token) {
    if (token == "integer") return ValueType::Integer;
    if (token == "real") return ValueType::Real;
    if (token == "string") return ValueType::String;
    throw std::runtime_error("unknown declared_type '" + token + "'");
}

const char* constraint_kind_token(HiddenConstraint::Kind k) {
    switch (k) {
        case HiddenConstraint::Kind::EnumMembership: return "enum_membership";
        case HiddenConstraint::Kind::IntegerRange: return "integer_range";
        case HiddenConstraint::Kind::StringFormat: return "string_format";
    }
    return "unknown";
}

HiddenConstraint::Kind constraint_kind_from_token(const std::string& token) {
    if (token == "enum_membership") return HiddenConstraint::Kind::EnumMembership;
    if (token == "integer_range") return HiddenConstraint::Kind::IntegerRange;
    if (token == "string_format") return HiddenConstraint::Kind::StringFormat;
    throw std::runtime_error("unknown constraint kind '" + token + "'");
}

const char* invoke_error_token(InvokeError e) { return invoke_error_name(e); }

InvokeError invoke_error_from_token(const std::string& token) {
    if (token == "UnknownTool") return InvokeError::UnknownTool;
    if (token == "MissingParam") return InvokeError::MissingParam;
    if (token == "TypeMismatch") return InvokeError::TypeMismatch;
    if (token == "ConstraintViolation") return InvokeError::ConstraintViolation;
    if (token == "DependencyUnmet") return InvokeError::DependencyUnmet;
    throw std::runtime_error("unknown invocation error '" + token + "'");
}

void append_task(std::string& out, const Task& task) {
    out += "{\"answer\":";
    append_value(out, task.answer);
    out += ",\"features\":[";
    for (std::size_t i = 0; i < task.features.size(); ++i) {
        if (i > 0) out.push_back(',');
        append_real(out, task.features[i]);
    }
    out += "],\"task_id\":";
    append_int(out, task.task_id);
    out += ",\"truth_plan\":[";
    for (int i = 0; i < task.truth_plan.size(); ++i) {
        if (i > 0) out.push_back(',');
        const PlanStep& step = task.truth_plan.steps[i];
        out += "{\"sub_query\":";
        append_string_array(out, step.sub_query);
        out += ",\"tool_id\":";
        append_int(out, step.tool_id);
        out.push_back('}');
    }
    out += "]}";
}

Value value_from_json(const json& j) {
    if (j.is_number_integer()) return Value{j.get<std::int64_t>()};
    if (j.is_number_float()) return Value{j.get<double>()};
    if (j.is_string()) return Value{j.get<std::string>()};
    throw std::runtime_error("argument values must be integers, reals, or strings");
}

ArgumentMap argument_map_from_json(const json& j) {
    if (!j.is_object()) throw std::runtime_error("argument map must be an object");
    ArgumentMap args;
    for (const auto& [key, value] : j.items()) args[key] = value_from_json(value);
    return args;
}

json parse(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw std::runtime_error("document is not valid JSON");
    return j;
}

void require_version(const json& j) {
    if (!j.contains("version") || !j["version"].is_number_integer() ||
        j["version"].get<int>() != 1) {
        throw std::runtime_error("document version must be 1");
    }
}

Task task_from_json(const json& j, const ToolWorld& world) {
    Task task;
    task.task_id = j.at("task_id").get<int>();
    task.answer = value_from_json(j.at("answer"));
    for (const auto& f : j.at("features")) task.features.push_back(f.get<double>());
    if (static_cast<int>(task.features.size()) != world.feature_dim) {
        throw std::runtime_error("task feature dimension does not match the world");
    }
    for (const auto& s : j.at("truth_plan")) {
        PlanStep step;
        step.tool_id = s.at("tool_id").get<int>();
        for (const auto& t : s.at("sub_query")) step.sub_query.push_back(t.get<std::string>());
        task.truth_plan.steps.push_back(step);
    }
    if (task.truth_plan.size() < 2) {
        throw std::runtime_error("truth plan must contain at least two steps");
    }
    for (int i = 0; i < task.truth_plan.size(); ++i) {
        const int tool = task.truth_plan.steps[i].tool_id;
        if (tool < 0 || tool >= world.num_tools()) {
            throw std::runtime_error("truth plan references an unknown tool");
        }
        if (i > 0 && !world.has_edge(task.truth_plan.steps[i - 1].tool_id, tool)) {
            throw std::runtime_error("truth plan is not a path in chain_graph");
        }
    }
    if (!(faithful_answer(world, task.truth_plan) == task.answer)) {
        throw std::runtime_error("task answer does not match faithful execution");
    }
    return task;
}

}  // namespace

std::string world_to_json(const ToolWorld& world, const std::vector<Task>* tasks) {
    std::string out;
    out += "{\"chain_graph\":[";
    for (int u = 0; u < world.num_tools(); ++u) {
        if (u > 0) out.push_back(',');
        out.push_back('[');
        for (std::size_t i = 0; i < world.chain_graph[u].size(); ++i) {
            if (i > 0) out.push_back(',');
            append_int(out, world.chain_graph[u][i]);
        }
        out.push_back(']');
    }
    out += "],\"feature_dim\":";
    append_int(out, world.feature_dim);
    out += ",\"seed\":";
    append_int(out, static_cast<std::int64_t>(world.seed));
    if (tasks != nullptr) {
        out += ",\"tasks\":[";
        for (std::size_t i = 0; i < tasks->size(); ++i) {
            if (i > 0) out.push_back(',');
            append_task(out, (*tasks)[i]);
        }
        out.push_back(']');
    }
    out += ",\"tools\":[";
    for (int t = 0; t < world.num_tools(); ++t) {
        if (t > 0) out.push_back(',');
        const ToolSpec& tool = world.tools[t];
        out.push_back('{');
        if (tool.dependency_param.has_value()) {
            out += "\"dependency_param\":";
            append_escaped(out, *tool.dependency_param);
            out.push_back(',');
        }
        out += "\"description\":";
        append_string_array(out, tool.description);
        out += ",\"hidden_constraints\":[";
        for (std::size_t c = 0; c < tool.hidden_constraints.size(); ++c) {
            if (c > 0) out.push_back(',');
            const HiddenConstraint& hc = tool.hidden_constraints[c];
            out += "{\"kind\":";
            append_escaped(out, constraint_kind_token(hc.kind));
            out += ",\"param_name\":";
            append_escaped(out, hc.param_name);
            out += ",\"payload\":{";
            switch (hc.kind) {
                case HiddenConstraint::Kind::EnumMembership:
                    out += "\"allowed\":";
                    append_string_array(out, hc.allowed_tokens);
                    break;
                case HiddenConstraint::Kind::IntegerRange:
                    out += "\"hi\":";
                    append_int(out, hc.hi);
                    out += ",\"lo\":";
                    append_int(out, hc.lo);
                    break;
                case HiddenConstraint::Kind::StringFormat:
                    out += "\"first_chars\":";
                    append_escaped(out, hc.first_chars);
                    break;
            }
            out += "}}";
        }
        out += "],\"name\":";
        append_escaped(out, tool.name);
        out += ",\"output_kind\":";
        append_escaped(out, value_type_token(tool.output_kind));
        out += ",\"params\":[";
        for (std::size_t p = 0; p < tool.params.size(); ++p) {
            if (p > 0) out.push_back(',');
            out += "{\"declared_type\":";
            append_escaped(out, value_type_token(tool.params[p].declared_type));
            out += ",\"name\":";
            append_escaped(out, tool.params[p].name);
            out += ",\"required\":";
            out += tool.params[p].required ? "true" : "false";
            out.push_back('}');
        }
        out += "],\"tool_id\":";
        append_int(out, tool.tool_id);
        out.push_back('}');
    }
    out += "],\"version\":1}";
    return out;
}

ToolWorld world_from_json(const std::string& text) {
    const json j = parse(text);
    require_version(j);

    ToolWorld world;
    world.seed = j.at("seed").get<std::uint64_t>();
    world.feature_dim = j.at("feature_dim").get<int>();
    if (world.feature_dim < 1) throw std::runtime_error("feature_dim must be positive");

    for (const auto& tj : j.at("tools")) {
        ToolSpec tool;
        tool.tool_id = tj.at("tool_id").get<int>();
        tool.name = tj.at("name").get<std::string>();
        tool.output_kind = value_type_from_token(tj.at("output_kind").get<std::string>());
        for (const auto& d : tj.at("description")) tool.description.push_back(d.get<std::string>());
        for (const auto& pj : tj.at("params")) {
            ParamSchema param;
            param.name = pj.at("name").get<std::string>();
            param.declared_type = value_type_from_token(pj.at("declared_type").get<std::string>());
            param.required = pj.at("required").get<bool>();
            for (const auto& existing : tool.params) {
                if (existing.name == param.name) {
                    throw std::runtime_error("duplicate parameter name '" + param.name + "'");
                }
            }
            tool.params.push_back(param);
        }
        if (tj.contains("dependency_param")) {
            tool.dependency_param = tj.at("dependency_param").get<std::string>();
            if (tool.find_param(*tool.dependency_param) == nullptr) {
                throw std::runtime_error("dependency_param must name a declared parameter");
            }
        }
        for (const auto& cj : tj.at("hidden_constraints")) {
            HiddenConstraint hc;
            hc.param_name = cj.at("param_name").get<std::string>();
            if (tool.find_param(hc.param_name) == nullptr) {
                throw std::runtime_error("hidden constraint references an undeclared parameter");
            }
            hc.kind = constraint_kind_from_token(cj.at("kind").get<std::string>());
            const json& payload = cj.at("payload");
            switch (hc.kind) {
                case HiddenConstraint::Kind::EnumMembership:
                    for (const auto& v : payload.at("allowed")) {
                        hc.allowed_tokens.push_back(v.get<std::string>());
                    }
                    if (hc.allowed_tokens.empty()) {
                        throw std::runtime_error("constraint payload is empty");
                    }
                    break;
                case HiddenConstraint::Kind::IntegerRange:
                    hc.lo = payload.at("lo").get<std::int64_t>();
                    hc.hi = payload.at("hi").get<std::int64_t>();
                    if (hc.lo > hc.hi) throw std::runtime_error("constraint payload is empty");
                    break;
                case HiddenConstraint::Kind::StringFormat:
                    hc.first_chars = payload.at("first_chars").get<std::string>();
                    if (hc.first_chars.empty()) {
                        throw std::runtime_error("constraint payload is empty");
                    }
                    break;
            }
            tool.hidden_constraints.push_back(hc);
        }
        world.tools.push_back(tool);
    }

    for (std::size_t a = 0; a < world.tools.size(); ++a) {
        for (std::size_t b = a + 1; b < world.tools.size(); ++b) {
            if (world.tools[a].name == world.tools[b].name) {
                throw std::runtime_error("duplicate tool name '" + world.tools[a].name + "'");
            }
        }
    }

    const auto& graph = j.at("chain_graph");
    if (static_cast<int>(graph.size()) != world.num_tools()) {
        throw std::runtime_error("chain_graph size does not match the tool count");
    }
    world.chain_graph.resize(world.num_tools());
    for (int u = 0; u < world.num_tools(); ++u) {
        for (const auto& v : graph[u]) {
            const int to = v.get<int>();
            if (to < 0 || to >= world.num_tools()) {
                throw std::runtime_error("chain_graph edge out of range");
            }
            world.chain_graph[u].push_back(to);
        }
    }

    try {
        world.longest_chain();
    } catch (const std::exception& ex) {
        throw std::runtime_error(ex.what());  // "acyclicity violated"
    }

    for (int t = 0; t < world.num_tools(); ++t) {
        bool connected = !world.chain_graph[t].empty();
        for (int u = 0; u < world.num_tools() && !connected; ++u) {
            connected = world.has_edge(u, t);
        }
        if (!connected) {
            throw std::runtime_error("tool '" + world.tools[t].name +
                                     "' is not reachable in any chain of length 2");
        }
    }
    return world;
}

std::vector<Task> tasks_from_json(const std::string& text) {
    const ToolWorld world = world_from_json(text);
    const json j = parse(text);
    if (!j.contains("tasks")) throw std::runtime_error("document carries no tasks");
    std::vector<Task> tasks;
    for (const auto& tj : j.at("tasks")) tasks.push_back(task_from_json(tj, world));
    return tasks;
}

std::string kb_to_json(const KnowledgeBase& kb) {
    std::string out = "{\"entries\":{";
    bool first = true;
    for (const auto& [tool_id, entry] : kb.entries) {
        if (!first) out.push_back(',');
        first = false;
        append_escaped(out, std::to_string(tool_id));
        out += ":{\"failures\":[";
        for (std::size_t i = 0; i < entry.failures.size(); ++i) {
            if (i > 0) out.push_back(',');
            out += "{\"arguments\":";
            append_argument_map(out, entry.failures[i].first);
            out += ",\"error\":";
            append_escaped(out, invoke_error_token(entry.failures[i].second));
            out.push_back('}');
        }
        out += "],\"rounds_used\":";
        append_int(out, entry.rounds_used);
        out += ",\"validated_templates\":[";
        for (std::size_t i = 0; i < entry.validated_templates.size(); ++i) {
            if (i > 0) out.push_back(',');
            append_argument_map(out, entry.validated_templates[i]);
        }
        out += "]}";
    }
    out += "},\"version\":1,\"world_seed\":";
    append_int(out, static_cast<std::int64_t>(kb.world_seed));
    out.push_back('}');
    return out;
}

KnowledgeBase kb_from_json(const std::string& text) {
    const json j = parse(text);
    require_version(j);
    KnowledgeBase kb;
    kb.world_seed = j.at("world_seed").get<std::uint64_t>();
    for (const auto& [key, ej] : j.at("entries").items()) {
        KnowledgeEntry entry;
        entry.tool_id = std::stoi(key);
        entry.rounds_used = ej.at("rounds_used").get<int>();
        if (entry.rounds_used < 0) throw std::runtime_error("rounds_used must be non-negative");
        for (const auto& t : ej.at("validated_templates")) {
            entry.validated_templates.push_back(argument_map_from_json(t));
        }
        for (const auto& f : ej.at("failures")) {
            entry.failures.emplace_back(argument_map_from_json(f.at("arguments")),
                                        invoke_error_from_token(f.at("error").get<std::string>()));
        }
        if (kb.entries.count(entry.tool_id) != 0) {
            throw std::runtime_error("duplicate knowledge entry for one tool");
        }
        kb.entries[entry.tool_id] = std::move(entry);
    }
    return kb;
}

std::string planner_to_json(const PlannerParams& params) {
    std::string out = "{\"feature_dim_total\":";
    append_int(out, params.feature_dim_total());
    out += ",\"max_steps\":";
    append_int(out, params.max_steps);
    out += ",\"num_tools\":";
    append_int(out, params.num_tools);
    out += ",\"version\":1,\"weights\":[";
    for (std::size_t i = 0; i < params.weights.data.size(); ++i) {
        if (i > 0) out.push_back(',');
        append_real(out, params.weights.data[i]);
    }
    out += "]}";
    return out;
}

PlannerParams planner_from_json(const std::string& text) {
    const json j = parse(text);
    require_version(j);
    PlannerParams params;
    const int total = j.at("feature_dim_total").get<int>();
    params.max_steps = j.at("max_steps").get<int>();
    params.num_tools = j.at("num_tools").get<int>();
    params.feature_dim = total - params.num_tools - params.max_steps;
    if (params.feature_dim < 1 || params.max_steps < 1 || params.num_tools < 1) {
        throw std::runtime_error("planner dimensions are inconsistent");
    }
    const auto& weights = j.at("weights");
    params.weights = Matrix(static_cast<std::size_t>(total),
                            static_cast<std::size_t>(params.num_actions()));
    if (weights.size() != params.weights.data.size()) {
        throw std::runtime_error("weight matrix size mismatch");
    }
    for (std::size_t i = 0; i < params.weights.data.size(); ++i) {
        params.weights.data[i] = weights[i].get<double>();
    }
    if (!params.weights.all_finite()) throw std::runtime_error("weights must be finite");
    return params;
}

std::string metrics_to_json(const Metrics& metrics) {
    std::string out = "{\"calls_attempted\":";
    append_int(out, metrics.calls_attempted);
    out += ",\"calls_errored\":";
    append_int(out, metrics.calls_errored);
    out += ",\"invocation_error_rate\":";
    append_real(out, metrics.invocation_error_rate);
    out += ",\"plan_exact_match_rate\":";
    append_real(out, metrics.plan_exact_match_rate);
    out += ",\"success_rate\":";
    append_real(out, metrics.success_rate);
    out += ",\"tasks_succeeded\":";
    append_int(out, metrics.tasks_succeeded);
    out += ",\"tasks_total\":";
    append_int(out, metrics.tasks_total);
    out += ",\"version\":1}";
    return out;
}

std::string ablation_report_to_json(const AblationReport& report) {
    std::string out = "{\"baseline\":";
    out += metrics_to_json(report.baseline);
    out += ",\"direction_holds\":";
    out += report.direction_holds ? "true" : "false";
    out += ",\"variant\":";
    out += metrics_to_json(report.variant);
    out += ",\"variant_name\":";
    append_escaped(out, ablation_variant_name(report.which));
    out += ",\"version\":1}";
    return out;
}

std::string plans_to_json(const std::vector<Plan>& plans) {
    std::string out = "{\"plans\":[";
    for (std::size_t i = 0; i < plans.size(); ++i) {
        if (i > 0) out.push_back(',');
        out.push_back('[');
        for (int s = 0; s < plans[i].size(); ++s) {
            if (s > 0) out.push_back(',');
            out += "{\"sub_query\":";
            append_string_array(out, plans[i].steps[s].sub_query);
            out += ",\"tool_id\":";
            append_int(out, plans[i].steps[s].tool_id);
            out.push_back('}');
        }
        out.push_back(']');
    }
    out += "],\"version\":1}";
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace toolplan
