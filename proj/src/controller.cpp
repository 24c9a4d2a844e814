#include "tom/controller.hpp"

#include <algorithm>

namespace tom {

double theta_pointing_lever(const GraspedTool& tool, Vector2 world_dir) {
    const Vector2 lever_local = tool.analysis->p_star - tool.grasp;
    return normalize_angle(world_dir.angle() - lever_local.angle());
}

double theta_pointing_affordance(const GraspedTool& tool, Vector2 world_dir) {
    return normalize_angle(world_dir.angle() - tool.analysis->push_normal.angle());
}

Pose2 pose_with_p_star_at(const GraspedTool& tool, Point2 anchor, double theta) {
    const Vector2 lever_world = (tool.analysis->p_star - tool.grasp).rotated(theta);
    return make_pose(anchor - lever_world, theta);
}

InteractPlan interact_poses(const GraspedTool& tool, Point2 p_obj, Point2 p_goal, const RobotArm& robot) {
    if (distance(p_obj, p_goal) <= 1e-12) {
        throw Error(ErrorCode::InvalidParameter, "object already at goal; interact is degenerate");
    }
    const double r = tool.lever();
    if (r < tool.analysis->r_obj) {
        throw Error(ErrorCode::ToolTooShort, "grasp-to-p* distance is below the object radius");
    }
    InteractPlan plan;
    plan.r = r;
    plan.circle_start = {p_obj, r};
    plan.circle_end = {p_goal, r};

    const Point2 start = closest_point_on_circle(p_obj, r, robot.base);
    const Point2 end = closest_point_on_circle(p_goal, r, robot.base);
    plan.start_pose = make_pose(start, theta_pointing_lever(tool, p_obj - start));
    plan.end_pose = make_pose(end, theta_pointing_lever(tool, p_goal - end));
    plan.push_theta = theta_pointing_affordance(tool, p_goal - p_obj);

    if (distance(start, robot.base) > robot.reach) {
        throw Error(ErrorCode::Unreachable, "interact start pose lies outside the arm's reach");
    }
    return plan;
}

double alignment_cost(const GraspedTool& tool, const Pose2& pose, Point2 p_obj, const Pose2& start_anchor) {
    return distance(tool.p_star_world(pose), p_obj) + distance(pose.position, start_anchor.position);
}

Pose2 align_tool_pose(const GraspedTool& tool, Point2 p_obj, const Pose2& start_anchor) {
    const double r = tool.lever();
    if (distance(start_anchor.position, p_obj) <= 1e-15 || r <= 0.0) {
        // Every rotation is optimal; keep the anchor orientation.
        return pose_with_p_star_at(tool, p_obj, start_anchor.theta);
    }
    const Point2 grasp = closest_point_on_circle(p_obj, r, start_anchor.position);
    return make_pose(grasp, theta_pointing_lever(tool, p_obj - grasp));
}

Pose2 interact_step(const Pose2& current, const InteractPlan& plan, const InteractStepParams& params) {
    if (!(params.k_int > 0.0) || params.k_int > 1.0) {
        throw Error(ErrorCode::InvalidParameter, "k_int must lie in (0, 1]");
    }
    const Vector2 gap = plan.end_pose.position - current.position;
    if (gap.norm() > params.pos_tol) {
        return {current.position + params.k_int * gap, current.theta};
    }
    const double dtheta = normalize_angle(plan.end_pose.theta - current.theta);
    const double step = std::clamp(dtheta, -params.rot_rate, params.rot_rate);
    return make_pose(current.position, current.theta + step);
}

int step_trigger(long tau) {
    if (tau < 0) throw Error(ErrorCode::InvalidParameter, "action counter must be non-negative");
    return tau % 2 == 0 ? 1 : 0;
}

const char* to_string(RotationDirection d) {
    return d == RotationDirection::Clockwise ? "clockwise" : "anticlockwise";
}

double rotation_angle(double phi_tau, RotationDirection direction, double angle_obj, double angle_rot) {
    if (direction == RotationDirection::Anticlockwise) return normalize_angle(-angle_obj - angle_rot);
    return normalize_angle(-phi_tau + kPi - angle_obj - angle_rot);
}

void validate(const SteppingParams& p) {
    if (!(p.k > 0.0 && p.k <= 1.0)) throw Error(ErrorCode::InvalidParameter, "stepping k must lie in (0, 1]");
    if (!(p.w > 0.0 && p.w <= 1.0)) throw Error(ErrorCode::InvalidParameter, "stepping w must lie in (0, 1]");
    if (!(p.angle_rot > 0.0)) throw Error(ErrorCode::InvalidParameter, "rotation angle must be positive");
    if (!(p.parallel_tol >= 0.0)) throw Error(ErrorCode::InvalidParameter, "parallel tolerance must be >= 0");
}

const char* to_string(StepMode m) { return m == StepMode::Reposition ? "reposition" : "rotation-drag"; }

AffordanceVector tip_affordance(const Polyline& tool, Point2 grasp) {
    validate(tool);
    const std::size_t tip = tool.segment_count() - 1;
    const Segment2 s = tool.segment(tip);
    const auto [left, right] = segment_normal_pair(s);
    const bool left_faces_grasp = left.dot(grasp - s.mid()) >= 0.0;
    return {s.mid(), left_faces_grasp ? left : right, 0.5 * s.length(), tip, left_faces_grasp ? Side::Left : Side::Right};
}

Vector2 tip_direction_world(const GraspedTool& tool, const Pose2& ee) {
    return tool.to_world(ee, tool.analysis->a_star.direction);
}

double object_angle(const Polyline& tool_local, const GraspedTool& tool, const Pose2& ee, Point2 p_obj) {
    const Point2 tip = tool.to_world(ee, tool_local.points.back());
    const Vector2 to_obj = p_obj - ee.position;
    const Vector2 to_tip = tip - ee.position;
    if (to_obj.norm() <= 1e-12 || to_tip.norm() <= 1e-12) return 0.0;
    return angle_between(to_obj, to_tip);
}

double controller_phi(const GraspedTool& tool, const Pose2& ee, bool strict_signs) {
    const double alpha = (tool.p_star_world(ee) - ee.position).angle();
    return normalize_angle(strict_signs ? -alpha : alpha);
}

bool tool_touches(const Polyline& tool_world, Point2 center, double radius, double eps) {
    for (const auto& s : tool_world.segments()) {
        if (s.distance_to(center) <= radius + eps) return true;
    }
    return false;
}

SteppingState stepping_init(const SteppingContext& ctx, const std::vector<Segment2>& walls, const ExitSpec& exit,
                            Point2 p_obj, const SteppingParams& params) {
    validate(params);
    if (walls.empty()) throw Error(ErrorCode::InvalidParameter, "stepping needs at least one wall");
    const GraspedTool& tool = ctx.tool;
    const Polyline& shape = *ctx.tool_local;
    const Segment2& first = walls.front();
    validate(first);

    Vector2 inward = first.direction().perp_left();
    if (inward.dot(p_obj - first.a) < 0.0) inward = -inward;

    // s^tip parallel to the first wall, with a^tip facing away from it.
    const Vector2 tip_dir = shape.segment(shape.segment_count() - 1).direction();
    double theta = normalize_angle(first.direction().angle() - tip_dir.angle());
    if (tool.analysis->a_star.direction.rotated(theta).dot(inward) < 0.0) theta = normalize_angle(theta + kPi);

    SteppingState state;
    state.ee_pose = pose_with_p_star_at(tool, p_obj, theta);
    state.obj = p_obj;

    const Polyline world = transformed(Polyline{[&] {
        std::vector<Point2> pts;
        for (const auto& p : shape.points) pts.push_back(Point2{} + (p - tool.grasp));
        return pts;
    }()}, state.ee_pose);
    for (const auto& s : world.segments()) {
        for (const auto& w : walls) {
            if (segments_intersect(s, w)) {
                throw Error(ErrorCode::CannotEnter, "tool cannot be placed inside the wall opening without collision");
            }
        }
    }

    const Vector2 a_tip = tip_direction_world(tool, state.ee_pose);
    const double side = a_tip.cross(exit.direction);
    state.direction = side > 0.0 ? RotationDirection::Anticlockwise : RotationDirection::Clockwise;
    state.initial_side = side >= 0.0 ? 1.0 : -1.0;
    state.phi = controller_phi(tool, state.ee_pose, params.strict_signs);
    state.angle_obj = object_angle(shape, tool, state.ee_pose, p_obj);
    state.contact = tool_touches(world, p_obj, tool.analysis->r_obj, ctx.contact_eps);
    return state;
}

bool stepping_aligned(const SteppingContext& ctx, const SteppingState& state, const ExitSpec& exit,
                      const SteppingParams& params) {
    const Vector2 a_tip = tip_direction_world(ctx.tool, state.ee_pose);
    const double angle = angle_between(a_tip, exit.direction);
    if (angle <= params.parallel_tol) return true;
    const double side = a_tip.cross(exit.direction);
    return angle < kPi / 2 && side * state.initial_side < 0.0;
}

std::pair<SteppingCommand, SteppingState> stepping_step(const SteppingContext& ctx, const SteppingState& state,
                                                        const ExitSpec& exit, const SteppingParams& params) {
    validate(params);
    if (stepping_aligned(ctx, state, exit, params)) {
        throw Error(ErrorCode::AlreadyAligned, "tip affordance already parallel to the exit direction");
    }
    const GraspedTool& tool = ctx.tool;
    SteppingState next = state;
    SteppingCommand cmd;
    if (step_trigger(state.tau) == 1) {
        const Vector2 delta = params.k * (state.obj - tool.p_star_world(state.ee_pose));
        cmd.ee_pose = {state.ee_pose.position + delta, state.ee_pose.theta};
        cmd.mode = StepMode::Reposition;
    } else {
        const double r = tool.lever();
        const double phi = state.phi;
        const Point2 target = params.strict_signs
                                  ? state.obj + r * Vector2{-std::cos(phi), std::sin(phi)}
                                  : state.obj - r * Vector2{std::cos(phi), std::sin(phi)};
        const Vector2 delta = params.w * (target - state.ee_pose.position);
        const double dphi = rotation_angle(phi, state.direction, state.angle_obj, params.angle_rot);
        const double dtheta = params.strict_signs ? -dphi : dphi;
        cmd.ee_pose = make_pose(state.ee_pose.position + delta, state.ee_pose.theta + dtheta);
        cmd.mode = StepMode::RotationDrag;
        next.phi = normalize_angle(phi + dphi);
    }
    next.ee_pose = cmd.ee_pose;
    next.tau = state.tau + 1;
    return {cmd, next};
}

}  // namespace tom
