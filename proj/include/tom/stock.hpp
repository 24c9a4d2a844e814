#pragma once

#include <string>
#include <vector>

#include "tom/planner.hpp"

namespace tom::stock {

// Tool shapes in tool-local coordinates; every stock tool is grasped at the origin.
Polyline stick_shape();
Polyline hook_shape();
Polyline y_tool_shape();

ToolSpec stick(std::string id, Pose2 home);
ToolSpec hook(std::string id, Pose2 home);
ToolSpec y_tool(std::string id, Pose2 home);

RobotSpec left_arm();
RobotSpec right_arm();

struct NamedScene {
    std::string name;
    Observation observation;
    std::string instruction;
};

NamedScene hook_right_to_left();
NamedScene stick_right_to_left();
NamedScene y_tool_bottom_to_top();
NamedScene dual_arm_two_tools();
NamedScene dual_arm_shared_tool();
// Two walls meeting at the given interior angle, block tucked into the corner.
NamedScene wall_corner(double angle_deg, Point2 apex = {0.20, 0.20});

std::vector<NamedScene> all_scenes();

}  // namespace tom::stock
