#pragma once

#include <vector>

#include "tom/affordance.hpp"
#include "tom/geometry.hpp"
#include "tom/manoeuvrability.hpp"

namespace tom {

struct Circle {
    Point2 center;
    double radius = 0.0;
};

// A tool as the controller sees it: analysed shape in tool-local coordinates and
// the grasp point in that frame. An end-effector pose maps local points to the
// world with the grasp point at the pose position.
struct GraspedTool {
    const ToolAnalysis* analysis = nullptr;
    Point2 grasp;  // tool-local

    Point2 to_world(const Pose2& ee, Point2 local) const { return ee.apply(Point2{} + (local - grasp)); }
    Vector2 to_world(const Pose2& ee, Vector2 local) const { return ee.apply(local); }
    Point2 p_star_world(const Pose2& ee) const { return to_world(ee, analysis->p_star); }
    Vector2 a_star_world(const Pose2& ee) const { return to_world(ee, analysis->a_star.direction); }
    // Grasp-to-p* lever arm.
    double lever() const { return distance(analysis->p_star, grasp); }
};

// Orientation that points the grasp->p* ray of the tool along `world_dir`.
double theta_pointing_lever(const GraspedTool& tool, Vector2 world_dir);
// Orientation that points the push normal at p* along `world_dir`.
double theta_pointing_affordance(const GraspedTool& tool, Vector2 world_dir);
// Pose that puts p* on `anchor` with the given orientation.
Pose2 pose_with_p_star_at(const GraspedTool& tool, Point2 anchor, double theta);

struct InteractPlan {
    Pose2 start_pose;
    Pose2 end_pose;
    Circle circle_start;
    Circle circle_end;
    double r = 0.0;
    // Orientation that drives the block at p* toward the goal.
    double push_theta = 0.0;
};

struct RobotArm {
    Point2 base;
    double reach = 0.0;
};

InteractPlan interact_poses(const GraspedTool& tool, Point2 p_obj, Point2 p_goal, const RobotArm& robot);

// J = |p*(pose) - p_obj| + |grasp(pose) - anchor|, the alignment objective.
double alignment_cost(const GraspedTool& tool, const Pose2& pose, Point2 p_obj, const Pose2& start_anchor);

// Exact minimizer of alignment_cost: p* pinned on p_obj, grasp on the nearest circle point.
Pose2 align_tool_pose(const GraspedTool& tool, Point2 p_obj, const Pose2& start_anchor);

struct InteractStepParams {
    double k_int = 0.2;
    double pos_tol = 0.002;
    double rot_rate = 15.0 * kPi / 180.0;
};

Pose2 interact_step(const Pose2& current, const InteractPlan& plan, const InteractStepParams& params);

// u(tau): 1 on even steps (reposition), 0 on odd steps (rotation-drag).
int step_trigger(long tau);

enum class RotationDirection { Clockwise, Anticlockwise };
const char* to_string(RotationDirection d);

double rotation_angle(double phi_tau, RotationDirection direction, double angle_obj, double angle_rot);

struct SteppingParams {
    double k = 0.5;
    double w = 0.5;
    double angle_rot = 10.0 * kPi / 180.0;
    double parallel_tol = 5.0 * kPi / 180.0;
    // Keep the (-r cos, +r sin) term verbatim, with phi measured clockwise-positive.
    bool strict_signs = true;
};

void validate(const SteppingParams& params);

struct SteppingState {
    long tau = 0;
    Pose2 ee_pose;
    double phi = 0.0;  // tool angle in the controller convention (see SteppingParams)
    Point2 obj;
    bool contact = false;
    double angle_obj = 0.0;
    RotationDirection direction = RotationDirection::Anticlockwise;
    // Orientation of a^tip relative to v^exit when stepping started (sign of the cross product).
    double initial_side = 1.0;
};

enum class StepMode { Reposition, RotationDrag };
const char* to_string(StepMode m);

struct SteppingCommand {
    Pose2 ee_pose;
    StepMode mode = StepMode::Reposition;
};

// Tip affordance used for stepping: terminal segment, side facing the grasp point.
AffordanceVector tip_affordance(const Polyline& tool, Point2 grasp);

// World direction of the tip affordance for a given pose.
Vector2 tip_direction_world(const GraspedTool& tool, const Pose2& ee);

// Angle at the grasp point between the object centre and the tool tip keypoint.
double object_angle(const Polyline& tool_local, const GraspedTool& tool, const Pose2& ee, Point2 p_obj);

// Controller angle phi for a pose under the chosen sign convention.
double controller_phi(const GraspedTool& tool, const Pose2& ee, bool strict_signs);

struct SteppingContext {
    const Polyline* tool_local = nullptr;
    GraspedTool tool;
    double contact_eps = 5e-4;
};

bool tool_touches(const Polyline& tool_world, Point2 center, double radius, double eps);

SteppingState stepping_init(const SteppingContext& ctx, const std::vector<Segment2>& walls, const ExitSpec& exit,
                            Point2 p_obj, const SteppingParams& params);

// True when a^tip is parallel to v^exit within tolerance, or has rotated past it.
bool stepping_aligned(const SteppingContext& ctx, const SteppingState& state, const ExitSpec& exit,
                      const SteppingParams& params);

std::pair<SteppingCommand, SteppingState> stepping_step(const SteppingContext& ctx, const SteppingState& state,
                                                        const ExitSpec& exit, const SteppingParams& params);

}  // namespace tom
