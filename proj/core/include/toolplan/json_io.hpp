#pragma once

#include <string>
#include <vector>

#include "toolplan/explorer.hpp"
#include "toolplan/harness.hpp"
#include "toolplan/planner.hpp"
#include "toolplan/toolworld.hpp"

namespace toolplan {

// All documents are UTF-8 JSON with object keys emitted in lexicographic
// order and reals rendered with 17 significant digits, so identical inputs
// serialize byte-identically.

std::string world_to_json(const ToolWorld& world, const std::vector<Task>* tasks = nullptr);

// Throws std::runtime_error naming the violated invariant on bad documents.
ToolWorld world_from_json(const std::string& text);

// Reads the optional `tasks` array of a world document, validating each task
// against the world embedded in the same document.
std::vector<Task> tasks_from_json(const std::string& text);

std::string kb_to_json(const KnowledgeBase& kb);
KnowledgeBase kb_from_json(const std::string& text);

std::string planner_to_json(const PlannerParams& params);
PlannerParams planner_from_json(const std::string& text);

std::string metrics_to_json(const Metrics& metrics);
std::string ablation_report_to_json(const AblationReport& report);

std::string plans_to_json(const std::vector<Plan>& plans);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace toolplan
