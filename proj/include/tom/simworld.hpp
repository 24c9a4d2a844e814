#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tom/controller.hpp"
#include "tom/manoeuvrability.hpp"
#include "tom/planner.hpp"

namespace tom {

struct ControllerParams {
    InteractStepParams interact;
    SteppingParams stepping;
    AnalysisParams analysis;
    double goal_tol = 0.005;
    int step_budget = 2000;       // frames per motion function
    int stepping_budget = 100;    // action steps for a stepping extraction
    double transit_step = 0.02;   // meters per frame while moving a lifted tool
    double transit_rot = 15.0 * kPi / 180.0;
    double extract_step = 0.01;   // meters per frame for the final straight drag
    double substep_len = 0.001;   // max tool-point travel between contact resolutions
    double contact_eps = 5e-4;
};

void validate(const ControllerParams& params);

// Per-arm controller memory set up by Approach.
struct ArmTask {
    ToolAnalysis analysis;
    bool stepping = false;
    GoalKind goal = GoalKind::Target;
};

struct WorldState {
    Observation observation;  // live copy; block center moves
    std::map<std::string, Pose2> tool_poses;  // world pose of each tool's grasp point
    std::map<ArmId, std::optional<std::string>> held;
    std::map<ArmId, Pose2> ee;
    std::map<ArmId, ArmTask> tasks;     // present while the arm's tool is lowered onto the table
    long time = 0;
    Point2 exit_point;                  // escape point for walled scenes without a target
    int grasps = 0;
    int releases = 0;

    std::optional<std::string> holder_tool(ArmId arm) const;
};

WorldState make_world(const Observation& obs);

struct Frame {
    long t = 0;
    Point2 obj;
    Pose2 ee_left;
    Pose2 ee_right;
    double error = 0.0;
    bool contact = false;  // block touches the tool at p* (within one object radius)
    std::optional<std::size_t> contact_segment;  // nearest touching segment, anywhere on the tool
    Side contact_side = Side::Left;
    std::string mode;
    int held_count = 0;
    std::map<std::string, Pose2> tool_poses;  // snapshot for rendering
};

struct RunLog {
    std::vector<Frame> frames;

    std::string to_csv() const;
};

// Moves the disk out of every penetrating segment along the deepest-penetration
// normal. prev decides the side when the center has crossed a segment line.
Point2 resolve_push(const std::vector<Segment2>& tool, Point2 center, double radius, Point2 prev,
                    const std::vector<Segment2>& walls = {});
Point2 resolve_push(const Polyline& tool_world, Point2 center, double radius, Point2 prev);

// Runs one motion function to completion, appending frames. `next` lets Approach
// prepare for the action that follows it.
void execute_motion_function(WorldState& world, const MotionFunction& fn, const ControllerParams& params,
                             RunLog& log, const MotionFunction* next = nullptr);

struct RunResult {
    RunLog log;
    WorldState final_state;
    bool completed = false;  // every step ran without error
    bool success = false;    // completed and the task goal was reached
    std::optional<ErrorCode> error;
    std::string message;
    std::size_t failed_step = 0;
    double wall_clock_s = 0.0;
};

RunResult run_plan(const Observation& obs, const Plan& plan, const ControllerParams& params = {});

// True once the block is outside the wall hull by at least its radius.
bool extracted(const Observation& obs);

struct SideKey {
    std::size_t segment = 0;
    Side side = Side::Left;

    friend auto operator<=>(const SideKey&, const SideKey&) = default;
};

struct Metrics {
    std::vector<double> error_series;
    std::vector<int> contact_series;
    std::map<SideKey, int> segment_contact_histogram;
    std::size_t steps = 0;
    double wall_clock_s = 0.0;
    int contact_transitions = 0;
};

Metrics metrics(const RunLog& log, double wall_clock_s = 0.0);

}  // namespace tom
