#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tom/planner.hpp"
#include "tom/simworld.hpp"

namespace tom {

inline constexpr int kSchemaVersion = 1;

struct LoadOptions {
    bool lenient = false;  // warn on unknown keys instead of rejecting them
};

struct LoadedScene {
    Observation observation;
    std::string instruction;
    ControllerParams params;
    std::vector<std::string> warnings;
};

// Parses scene JSON text. `origin` names the source in error messages.
LoadedScene parse_scene(const std::string& text, const std::string& origin = "<scene>", const LoadOptions& opts = {});
LoadedScene load_scene(const std::filesystem::path& path, const LoadOptions& opts = {});

std::string scene_to_json(const Observation& obs, const std::string& instruction, int indent = 2);
void save_scene(const std::filesystem::path& path, const Observation& obs, const std::string& instruction);

// Applies a "params" object (scene section or standalone config file) on top of `params`.
void apply_params_json(const std::string& text, const std::string& origin, ControllerParams& params,
                       const LoadOptions& opts, std::vector<std::string>* warnings = nullptr);

std::string plan_to_json(const Plan& plan, int indent = 2);
Plan parse_plan_json(const std::string& text, const std::string& origin = "<plan>");
Plan load_plan(const std::filesystem::path& path);

// Accepts {"schema_version": 1, "tool": {...}} or a whole scene file, in which case
// `tool_id` picks the tool (optional when the scene has exactly one).
ToolSpec parse_tool_file(const std::string& text, const std::string& origin = "<tool>", const std::string& tool_id = "");
ToolSpec load_tool(const std::filesystem::path& path, const std::string& tool_id = "");

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace tom
