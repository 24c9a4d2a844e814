#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tom/geometry.hpp"

namespace tom {

enum class ArmId { Left, Right };
const char* to_string(ArmId arm);
std::optional<ArmId> parse_arm(std::string_view text);
inline ArmId other(ArmId arm) { return arm == ArmId::Left ? ArmId::Right : ArmId::Left; }

struct RobotSpec {
    ArmId id = ArmId::Left;
    Point2 base;
    double reach = 0.0;

    friend bool operator==(const RobotSpec&, const RobotSpec&) = default;
};

// Tool shape is in tool-local coordinates. home_pose is the world pose of the
// grasp point while the tool rests at home.
struct ToolSpec {
    std::string id;
    Polyline shape;
    Point2 grasp_point;
    Pose2 home_pose;
    bool hook = false;  // capable of stepping/dragging

    friend bool operator==(const ToolSpec&, const ToolSpec&) = default;
};

struct Manipulandum {
    std::string id = "block";
    Point2 center;
    double radius = 0.0;

    friend bool operator==(const Manipulandum&, const Manipulandum&) = default;
};

struct WallSet {
    std::vector<Segment2> segments;
    Point2 interior_hint;

    friend bool operator==(const WallSet&, const WallSet&) = default;
};

struct Observation {
    std::vector<RobotSpec> robots;
    std::vector<ToolSpec> tools;
    Manipulandum block;
    std::optional<WallSet> walls;
    std::optional<Point2> target;

    const RobotSpec* robot(ArmId id) const;
    const ToolSpec* tool(std::string_view id) const;

    friend bool operator==(const Observation&, const Observation&) = default;
};

void validate(const Observation& obs);

// World polyline of a tool placed with its grasp point at `ee`.
Polyline tool_world_shape(const ToolSpec& tool, const Pose2& ee);

struct PlanningRequest {
    std::string instruction;
    std::string canonical_instruction;  // trimmed, lowercased
    Observation observation;
    std::vector<std::pair<std::string, std::string>> embedded;

    // key=value lines, one per embedded entry.
    std::string embedded_text() const;
};

PlanningRequest embed(const std::string& instruction, const Observation& obs);

enum class FnKind { Grasp, Approach, Interact, Stepping, Pass, Release };
const char* to_string(FnKind kind);
std::optional<FnKind> parse_fn_kind(std::string_view text);

enum class GoalKind { Target, Handover };
const char* to_string(GoalKind goal);

struct MotionFunction {
    FnKind kind = FnKind::Grasp;
    ArmId arm = ArmId::Left;
    std::string tool;
    std::string object;       // Approach, Interact, Stepping, Pass
    GoalKind goal = GoalKind::Target;  // Interact only
    ArmId arm2 = ArmId::Left;  // Pass only

    friend bool operator==(const MotionFunction&, const MotionFunction&) = default;
};

MotionFunction make_grasp(ArmId arm, std::string tool);
MotionFunction make_approach(ArmId arm, std::string tool, std::string object);
MotionFunction make_interact(ArmId arm, std::string tool, std::string object, GoalKind goal);
MotionFunction make_stepping(ArmId arm, std::string tool, std::string object);
MotionFunction make_pass(ArmId from, std::string tool, std::string object, ArmId to);
MotionFunction make_release(ArmId arm, std::string tool);

struct Plan {
    std::vector<MotionFunction> steps;

    friend bool operator==(const Plan&, const Plan&) = default;
};

// Centroid of the intersection of two disks, or nullopt when they do not overlap.
std::optional<Point2> lens_centroid(Point2 c1, double r1, Point2 c2, double r2);
std::optional<Point2> handover_point(const Observation& obs);

// True when the block lies inside the convex hull of the wall endpoints.
bool block_confined(const Observation& obs);

Plan plan_rule_based(const PlanningRequest& req);

struct Violation {
    std::size_t step = 0;  // index into the plan; plan size for end-of-plan checks
    std::string code;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    std::vector<std::size_t> redundant_steps;
    bool terminal_reached = false;

    bool ok() const { return violations.empty() && redundant_steps.empty() && terminal_reached; }
    std::string summary() const;
};

ValidationReport validate_plan(const Plan& plan, const Observation& obs);

// Plan text in the function-call form `grasp(left, hook)`, one call per line.
std::string format_plan_text(const Plan& plan);
Plan parse_plan_text(const std::string& text);

struct WorkspaceBounds {
    double xmin = -0.8, xmax = 0.8, ymin = -0.2, ymax = 0.6;
};

struct Scenario {
    Observation observation;
    std::string instruction;
    Plan expected_plan;
    std::uint64_t seed = 0;
};

std::vector<Scenario> generate_scenarios(std::uint64_t seed, int count, const WorkspaceBounds& bounds = {});

// Mirror x -> -x, swapping arm identifiers.
Observation mirror(const Observation& obs);

struct BackendConfig {
    std::string endpoint;  // http://host:port/path
    std::string api_key;
    std::string model = "tom-planner";
    double timeout_s = 30.0;

    // Reads TOM_LLM_ENDPOINT and TOM_LLM_KEY.
    static BackendConfig from_env();
};

std::string build_prompt(const PlanningRequest& req);

struct LlmResult {
    Plan plan;
    std::string raw_text;
    ValidationReport report;
};

LlmResult plan_llm(const PlanningRequest& req, const BackendConfig& backend);

}  // namespace tom
