#include "tom/affordance.hpp"

#include <limits>

namespace tom {

const char* to_string(Side side) { return side == Side::Left ? "left" : "right"; }

AffordanceSet compute_tool_affordances(const Polyline& tool, std::string tool_id) {
    validate(tool);
    AffordanceSet set;
    set.tool_id = std::move(tool_id);
    set.vectors.reserve(2 * tool.segment_count());
    for (std::size_t i = 0; i < tool.segment_count(); ++i) {
        const Segment2 s = tool.segment(i);
        const auto [left, right] = segment_normal_pair(s);
        const double mag = 0.5 * s.length();
        set.vectors.push_back({s.mid(), left, mag, i, Side::Left});
        set.vectors.push_back({s.mid(), right, mag, i, Side::Right});
    }
    return set;
}

AffordanceVector select_affordance(const AffordanceSet& set, Vector2 v_target) {
    if (set.vectors.empty()) throw Error(ErrorCode::InvalidParameter, "empty affordance set");
    if (!(v_target.norm() > 0.0)) throw Error(ErrorCode::DegenerateVector, "zero target vector");

    // Set order already encodes the (segment_index, left-first) tie rule.
    const AffordanceVector* best = nullptr;
    double best_score = std::numeric_limits<double>::infinity();
    for (const auto& a : set.vectors) {
        const double score = angle_between(v_target, a.scaled());
        if (score < best_score) {
            best_score = score;
            best = &a;
        }
    }
    return *best;
}

std::vector<AffordanceVector> compute_wall_affordances(const std::vector<Segment2>& walls, Point2 interior_hint) {
    if (walls.empty()) throw Error(ErrorCode::InvalidParameter, "no wall segments");
    std::vector<AffordanceVector> out;
    out.reserve(walls.size());
    for (std::size_t i = 0; i < walls.size(); ++i) {
        const Segment2& w = walls[i];
        validate(w);
        const Vector2 dir = w.direction();
        const double side = dir.cross(interior_hint - w.a);
        if (std::abs(side) <= 1e-12 * std::max(1.0, w.length())) {
            throw Error(ErrorCode::AmbiguousInterior, "interior hint lies on wall " + std::to_string(i));
        }
        const Vector2 n = side > 0.0 ? dir.perp_left() : -dir.perp_left();
        out.push_back({w.mid(), n, 0.5 * w.length(), i, side > 0.0 ? Side::Left : Side::Right});
    }
    return out;
}

ExitSpec compute_exit(const std::vector<Segment2>& walls, Point2 interior_hint, Point2 p_obj) {
    Vector2 sum{};
    for (const auto& a : compute_wall_affordances(walls, interior_hint)) sum = sum + a.scaled();
    const double travel = sum.norm();
    double scale = 0.0;
    for (const auto& w : walls) scale = std::max(scale, w.length());
    if (travel <= 1e-9 * std::max(1.0, scale)) {
        throw Error(ErrorCode::NoExit, "wall affordances cancel out; no exit direction");
    }
    return {sum / travel, travel, p_obj + sum};
}

}  // namespace tom
