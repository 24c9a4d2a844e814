#include "tom/stock.hpp"

#include <algorithm>
#include <cstdio>

namespace tom::stock {

Polyline stick_shape() { return {{{0.0, 0.0}, {0.3, 0.0}}}; }
Polyline hook_shape() { return {{{0.0, 0.0}, {0.2, 0.0}, {0.2, 0.08}}}; }
// A polyline cannot branch, so the Y is a bent chain with a forked-looking tip.
Polyline y_tool_shape() { return {{{0.0, 0.0}, {0.16, 0.0}, {0.23, 0.06}, {0.23, 0.10}}}; }

ToolSpec stick(std::string id, Pose2 home) { return {std::move(id), stick_shape(), {0.0, 0.0}, home, false}; }
ToolSpec hook(std::string id, Pose2 home) { return {std::move(id), hook_shape(), {0.0, 0.0}, home, true}; }
ToolSpec y_tool(std::string id, Pose2 home) { return {std::move(id), y_tool_shape(), {0.0, 0.0}, home, false}; }

RobotSpec left_arm() { return {ArmId::Left, {-0.45, 0.0}, 0.55}; }
RobotSpec right_arm() { return {ArmId::Right, {0.45, 0.0}, 0.55}; }

namespace {

const Pose2 kRightHome{{0.35, -0.12}, kPi / 2};
const Pose2 kRightHome2{{0.55, -0.12}, kPi / 2};
const Pose2 kLeftHome{{-0.35, -0.12}, kPi / 2};

Observation base_scene() {
    Observation obs;
    obs.robots = {left_arm(), right_arm()};
    obs.block = {"block", {0.0, 0.0}, 0.03};
    return obs;
}

}  // namespace

NamedScene hook_right_to_left() {
    Observation obs = base_scene();
    obs.tools = {hook("hook", kRightHome)};
    obs.block.center = {0.40, 0.30};
    obs.target = Point2{0.22, 0.30};
    return {"hook_right_to_left", obs, "push the block to the left target"};
}

NamedScene stick_right_to_left() {
    Observation obs = base_scene();
    obs.tools = {stick("stick", kRightHome)};
    obs.block.center = {0.42, 0.28};
    obs.target = Point2{0.20, 0.32};
    return {"stick_right_to_left", obs, "push the block to the left target"};
}

NamedScene y_tool_bottom_to_top() {
    Observation obs = base_scene();
    obs.tools = {y_tool("ytool", kRightHome)};
    obs.block.center = {0.36, 0.16};
    obs.target = Point2{0.36, 0.38};
    return {"y_tool_bottom_to_top", obs, "push the block up to the target"};
}

NamedScene dual_arm_two_tools() {
    Observation obs = base_scene();
    obs.tools = {hook("hook", kRightHome2), stick("stick", kLeftHome)};
    obs.block.center = {0.75, 0.25};
    obs.target = Point2{-0.70, 0.25};
    return {"dual_arm_two_tools", obs, "move the block from the far right to the left target"};
}

NamedScene dual_arm_shared_tool() {
    Observation obs = base_scene();
    obs.tools = {stick("stick", kRightHome)};
    obs.block.center = {0.75, 0.25};
    obs.target = Point2{-0.70, 0.25};
    return {"dual_arm_shared_tool", obs, "move the block from the far right to the left target"};
}

NamedScene wall_corner(double angle_deg, Point2 apex) {
    const double a = angle_deg * kPi / 180.0;
    const Vector2 u1{0.0, 1.0};
    const Vector2 u2{std::sin(a), std::cos(a)};
    const double len = 0.22;
    // Block sits 6 cm off the first wall and clear of the second one.
    const double gap = 0.06;
    const double t = std::max(0.10, (0.07 + std::cos(a) * gap) / std::sin(a));
    const Point2 center = apex + Vector2{gap, t};

    Observation obs = base_scene();
    obs.tools = {hook("hook", kRightHome2)};
    obs.block.center = center;
    obs.walls = WallSet{{{apex, apex + len * u1}, {apex, apex + len * u2}}, center};
    char name[32];
    std::snprintf(name, sizeof name, "wall_corner_%g", angle_deg);
    return {name, obs, "drag the block out of the corner"};
}

std::vector<NamedScene> all_scenes() {
    return {hook_right_to_left(), stick_right_to_left(), y_tool_bottom_to_top(), dual_arm_two_tools(),
            dual_arm_shared_tool(), wall_corner(90.0), wall_corner(65.0)};
}

}  // namespace tom::stock
