#pragma once

#include <string>
#include <vector>

#include "tom/geometry.hpp"

namespace tom {

enum class Side { Left, Right };

const char* to_string(Side side);

// Normal of a tool or wall segment, anchored at the segment midpoint and
// weighted by half of the segment length.
struct AffordanceVector {
    Point2 origin;
    Vector2 direction;  // unit
    double magnitude = 0.0;
    std::size_t segment_index = 0;
    Side side = Side::Left;

    Vector2 scaled() const { return magnitude * direction; }
    Point2 endpoint() const { return origin + scaled(); }

    friend bool operator==(const AffordanceVector&, const AffordanceVector&) = default;
};

struct AffordanceSet {
    std::vector<AffordanceVector> vectors;
    std::string tool_id;

    friend bool operator==(const AffordanceSet&, const AffordanceSet&) = default;
};

struct ExitSpec {
    Vector2 direction;  // unit
    double travel = 0.0;
    Point2 exit_point;
};

// Two vectors per segment, ordered by segment index with the left side first.
AffordanceSet compute_tool_affordances(const Polyline& tool, std::string tool_id = {});

// Minimizes the angle to v_target; ties go to the earliest vector in set order.
AffordanceVector select_affordance(const AffordanceSet& set, Vector2 v_target);

// One inward-facing vector per wall segment.
std::vector<AffordanceVector> compute_wall_affordances(const std::vector<Segment2>& walls, Point2 interior_hint);

ExitSpec compute_exit(const std::vector<Segment2>& walls, Point2 interior_hint, Point2 p_obj);

}  // namespace tom
