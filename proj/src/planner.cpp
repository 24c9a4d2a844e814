#include "tom/planner.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <regex>
#include <set>
#include <sstream>

namespace tom {

const char* to_string(ArmId arm) { return arm == ArmId::Left ? "left" : "right"; }

std::optional<ArmId> parse_arm(std::string_view text) {
    if (text == "left") return ArmId::Left;
    if (text == "right") return ArmId::Right;
    return std::nullopt;
}

const char* to_string(FnKind kind) {
    switch (kind) {
        case FnKind::Grasp: return "grasp";
        case FnKind::Approach: return "approach";
        case FnKind::Interact: return "interact";
        case FnKind::Stepping: return "stepping";
        case FnKind::Pass: return "pass";
        case FnKind::Release: return "release";
    }
    return "?";
}

std::optional<FnKind> parse_fn_kind(std::string_view text) {
    for (FnKind k : {FnKind::Grasp, FnKind::Approach, FnKind::Interact, FnKind::Stepping, FnKind::Pass,
                     FnKind::Release}) {
        if (text == to_string(k)) return k;
    }
    return std::nullopt;
}

const char* to_string(GoalKind goal) { return goal == GoalKind::Target ? "target" : "handover"; }

MotionFunction make_grasp(ArmId arm, std::string tool) { return {FnKind::Grasp, arm, std::move(tool), {}, {}, {}}; }
MotionFunction make_approach(ArmId arm, std::string tool, std::string object) {
    return {FnKind::Approach, arm, std::move(tool), std::move(object), {}, {}};
}
MotionFunction make_interact(ArmId arm, std::string tool, std::string object, GoalKind goal) {
    return {FnKind::Interact, arm, std::move(tool), std::move(object), goal, {}};
}
MotionFunction make_stepping(ArmId arm, std::string tool, std::string object) {
    return {FnKind::Stepping, arm, std::move(tool), std::move(object), {}, {}};
}
MotionFunction make_pass(ArmId from, std::string tool, std::string object, ArmId to) {
    return {FnKind::Pass, from, std::move(tool), std::move(object), {}, to};
}
MotionFunction make_release(ArmId arm, std::string tool) { return {FnKind::Release, arm, std::move(tool), {}, {}, {}}; }

const RobotSpec* Observation::robot(ArmId id) const {
    for (const auto& r : robots) {
        if (r.id == id) return &r;
    }
    return nullptr;
}

const ToolSpec* Observation::tool(std::string_view id) const {
    for (const auto& t : tools) {
        if (t.id == id) return &t;
    }
    return nullptr;
}

void validate(const Observation& obs) {
    std::set<ArmId> arms;
    for (const auto& r : obs.robots) {
        if (!arms.insert(r.id).second) {
            throw Error(ErrorCode::InvalidParameter, std::string("duplicate robot id '") + to_string(r.id) + "'");
        }
        if (!(r.reach > 0.0)) throw Error(ErrorCode::InvalidParameter, "robot reach must be positive");
        if (!is_finite(r.base)) throw Error(ErrorCode::InvalidParameter, "robot base must be finite");
    }
    std::set<std::string> ids;
    for (const auto& t : obs.tools) {
        if (t.id.empty()) throw Error(ErrorCode::InvalidParameter, "tool id must be non-empty");
        if (!ids.insert(t.id).second) throw Error(ErrorCode::InvalidParameter, "duplicate tool id '" + t.id + "'");
        validate(t.shape);
        if (!is_finite(t.grasp_point) || !is_finite(t.home_pose.position) || !std::isfinite(t.home_pose.theta)) {
            throw Error(ErrorCode::InvalidParameter, "tool '" + t.id + "' has non-finite grasp or home pose");
        }
    }
    if (!(obs.block.radius > 0.0)) throw Error(ErrorCode::InvalidParameter, "block radius must be positive");
    if (!is_finite(obs.block.center)) throw Error(ErrorCode::InvalidParameter, "block center must be finite");
    if (obs.walls) {
        if (obs.walls->segments.empty()) throw Error(ErrorCode::InvalidParameter, "wall set has no segments");
        for (const auto& w : obs.walls->segments) validate(w);
    }
    if (obs.target && !is_finite(*obs.target)) throw Error(ErrorCode::InvalidParameter, "target must be finite");
}

Polyline tool_world_shape(const ToolSpec& tool, const Pose2& ee) {
    Polyline out;
    out.points.reserve(tool.shape.points.size());
    for (const auto& p : tool.shape.points) out.points.push_back(ee.apply(Point2{} + (p - tool.grasp_point)));
    return out;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v == 0.0 ? 0.0 : v);  // no "-0.000000"
    return buf;
}

std::string fmt(Point2 p) { return fmt(p.x) + "," + fmt(p.y); }

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool reaches(const RobotSpec& r, Point2 p) { return distance(r.base, p) <= r.reach; }

}  // namespace

std::string PlanningRequest::embedded_text() const {
    std::string out;
    for (const auto& [k, v] : embedded) out += k + "=" + v + "\n";
    return out;
}

PlanningRequest embed(const std::string& instruction, const Observation& obs) {
    PlanningRequest req;
    req.instruction = instruction;
    req.canonical_instruction = trim(instruction);
    std::transform(req.canonical_instruction.begin(), req.canonical_instruction.end(),
                   req.canonical_instruction.begin(), [](unsigned char c) { return std::tolower(c); });
    if (req.canonical_instruction.empty()) throw Error(ErrorCode::UnderspecifiedTask, "instruction is empty");
    validate(obs);
    if (!obs.target && !obs.walls) {
        throw Error(ErrorCode::UnderspecifiedTask, "scene has neither a target nor walls to escape");
    }
    req.observation = obs;

    auto& e = req.embedded;
    e.emplace_back("instruction", req.canonical_instruction);
    for (const auto& r : obs.robots) {
        const std::string key = std::string("arm.") + to_string(r.id);
        e.emplace_back(key + ".base", fmt(r.base));
        e.emplace_back(key + ".reach", fmt(r.reach));
    }
    for (const auto& t : obs.tools) {
        const std::string key = "tool." + t.id;
        e.emplace_back(key + ".home", fmt(t.home_pose.position) + "," + fmt(t.home_pose.theta));
        std::string pts;
        for (const auto& p : tool_world_shape(t, t.home_pose).points) pts += (pts.empty() ? "" : ";") + fmt(p);
        e.emplace_back(key + ".keypoints", pts);
        e.emplace_back(key + ".hook", t.hook ? "1" : "0");
    }
    e.emplace_back("block.id", obs.block.id);
    e.emplace_back("p_obj", fmt(obs.block.center));
    e.emplace_back("block.radius", fmt(obs.block.radius));
    e.emplace_back("p_target", obs.target ? fmt(*obs.target) : "none");
    if (obs.walls) {
        for (std::size_t i = 0; i < obs.walls->segments.size(); ++i) {
            const auto& s = obs.walls->segments[i];
            e.emplace_back("wall." + std::to_string(i), fmt(s.a) + ";" + fmt(s.b));
        }
        e.emplace_back("wall.interior_hint", fmt(obs.walls->interior_hint));
    }
    return req;
}

std::optional<Point2> lens_centroid(Point2 c1, double r1, Point2 c2, double r2) {
    const double d = distance(c1, c2);
    if (d >= r1 + r2) return std::nullopt;
    if (d <= std::abs(r1 - r2)) return r1 <= r2 ? c1 : c2;
    const Vector2 u = (c2 - c1) / d;
    // Chord sits at distance a from c1 along u.
    const double a = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
    auto segment = [](double r, double cos_half) {
        const double alpha = std::acos(std::clamp(cos_half, -1.0, 1.0));
        const double area = 0.5 * r * r * (2.0 * alpha - std::sin(2.0 * alpha));
        const double s = std::sin(alpha);
        const double dist = area > 0.0 ? (2.0 * r * r * r * s * s * s) / (3.0 * area) : r;
        return std::pair{area, dist};
    };
    const auto [area1, dist1] = segment(r1, a / r1);        // cap of disk 1 facing c2
    const auto [area2, dist2] = segment(r2, (d - a) / r2);  // cap of disk 2 facing c1
    const Point2 g1 = c1 + dist1 * u;
    const Point2 g2 = c2 - dist2 * u;
    const double total = area1 + area2;
    return Point2{(area1 * g1.x + area2 * g2.x) / total, (area1 * g1.y + area2 * g2.y) / total};
}

std::optional<Point2> handover_point(const Observation& obs) {
    const RobotSpec* l = obs.robot(ArmId::Left);
    const RobotSpec* r = obs.robot(ArmId::Right);
    if (!l || !r) return std::nullopt;
    return lens_centroid(l->base, l->reach, r->base, r->reach);
}

bool block_confined(const Observation& obs) {
    if (!obs.walls) return false;
    std::vector<Point2> pts;
    for (const auto& s : obs.walls->segments) {
        pts.push_back(s.a);
        pts.push_back(s.b);
    }
    const auto hull = convex_hull(pts);
    if (hull.size() < 3) return false;
    return ClosedContour{hull}.contains(obs.block.center);
}

namespace {

const std::regex& action_words() {
    static const std::regex re(R"(\b(move|push|drag|pull|bring|get|take|extract|slide|deliver|pass)\b)");
    return re;
}

const RobotSpec* nearest_arm(Point2 p, const std::vector<const RobotSpec*>& pool) {
    const RobotSpec* best = nullptr;
    for (const auto* r : pool) {
        if (!best || distance(r->base, p) < distance(best->base, p)) best = r;
    }
    return best;
}

const ToolSpec* nearest_tool(const Observation& obs, const RobotSpec& arm, bool need_hook,
                             const std::string& exclude = {}) {
    const ToolSpec* best = nullptr;
    for (const auto& t : obs.tools) {
        if (need_hook && !t.hook) continue;
        if (t.id == exclude) continue;
        if (!best || distance(t.home_pose.position, arm.base) < distance(best->home_pose.position, arm.base)) {
            best = &t;
        }
    }
    return best;
}

}  // namespace

Plan plan_rule_based(const PlanningRequest& req) {
    const Observation& obs = req.observation;
    if (!std::regex_search(req.canonical_instruction, action_words())) {
        throw Error(ErrorCode::UnderspecifiedTask, "instruction names no supported action (move/push/drag/...)");
    }
    if (obs.tools.empty()) throw Error(ErrorCode::Infeasible, "no tool available");
    if (obs.robots.empty()) throw Error(ErrorCode::Infeasible, "no robot arm available");

    const Point2 block = obs.block.center;
    const std::string& m = obs.block.id;
    std::vector<const RobotSpec*> block_arms;
    for (const auto& r : obs.robots) {
        if (reaches(r, block)) block_arms.push_back(&r);
    }
    if (block_arms.empty()) throw Error(ErrorCode::Infeasible, "no arm can reach the block");

    Plan plan;
    auto& s = plan.steps;

    if (block_confined(obs)) {
        std::vector<const RobotSpec*> pool;
        for (const auto* r : block_arms) {
            if (!obs.target || reaches(*r, *obs.target)) pool.push_back(r);
        }
        if (pool.empty()) throw Error(ErrorCode::Infeasible, "no arm reaches both the confined block and the target");
        const RobotSpec* arm = nearest_arm(block, pool);
        const ToolSpec* tool = nearest_tool(obs, *arm, true);
        if (!tool) throw Error(ErrorCode::Infeasible, "confined block needs a hook-class tool");
        s.push_back(make_grasp(arm->id, tool->id));
        s.push_back(make_approach(arm->id, tool->id, m));
        s.push_back(make_stepping(arm->id, tool->id, m));
        if (obs.target) s.push_back(make_interact(arm->id, tool->id, m, GoalKind::Target));
        s.push_back(make_release(arm->id, tool->id));
        return plan;
    }

    if (!obs.target) throw Error(ErrorCode::UnderspecifiedTask, "block is not confined and no target is given");
    const Point2 target = *obs.target;

    std::vector<const RobotSpec*> both;
    for (const auto* r : block_arms) {
        if (reaches(*r, target)) both.push_back(r);
    }
    if (!both.empty()) {
        const RobotSpec* arm = nearest_arm(block, both);
        const ToolSpec* tool = nearest_tool(obs, *arm, false);
        s.push_back(make_grasp(arm->id, tool->id));
        s.push_back(make_approach(arm->id, tool->id, m));
        s.push_back(make_interact(arm->id, tool->id, m, GoalKind::Target));
        s.push_back(make_release(arm->id, tool->id));
        return plan;
    }

    const RobotSpec* a = nearest_arm(block, block_arms);
    const RobotSpec* b = obs.robot(other(a->id));
    if (!b || !reaches(*b, target)) throw Error(ErrorCode::Infeasible, "no arm can reach the target");
    if (!handover_point(obs)) throw Error(ErrorCode::Infeasible, "arm workspaces do not overlap; no handover zone");

    const ToolSpec* ta = nearest_tool(obs, *a, false);
    if (obs.tools.size() >= 2) {
        const ToolSpec* tb = nearest_tool(obs, *b, false, ta->id);
        s.push_back(make_grasp(a->id, ta->id));
        s.push_back(make_grasp(b->id, tb->id));
        s.push_back(make_approach(a->id, ta->id, m));
        s.push_back(make_interact(a->id, ta->id, m, GoalKind::Handover));
        s.push_back(make_pass(a->id, ta->id, m, b->id));
        s.push_back(make_approach(b->id, tb->id, m));
        s.push_back(make_interact(b->id, tb->id, m, GoalKind::Target));
        s.push_back(make_release(a->id, ta->id));
        s.push_back(make_release(b->id, tb->id));
    } else {
        s.push_back(make_grasp(a->id, ta->id));
        s.push_back(make_approach(a->id, ta->id, m));
        s.push_back(make_interact(a->id, ta->id, m, GoalKind::Handover));
        s.push_back(make_pass(a->id, ta->id, m, b->id));
        s.push_back(make_release(a->id, ta->id));
        s.push_back(make_grasp(b->id, ta->id));
        s.push_back(make_approach(b->id, ta->id, m));
        s.push_back(make_interact(b->id, ta->id, m, GoalKind::Target));
        s.push_back(make_release(b->id, ta->id));
    }
    return plan;
}

namespace {

enum class Region { Confined, Free, Handover, Target };

// Abstract world used to check plans without simulating them.
struct AbstractState {
    std::map<std::string, std::optional<ArmId>> holder;
    Region region = Region::Free;
    std::set<ArmId> owners;  // arms able to act on the block where it is now
    std::map<ArmId, bool> approached;
};

struct Replay {
    std::vector<Violation> violations;
    bool terminal = false;
};

Replay replay(const Plan& plan, const Observation& obs) {
    Replay out;
    AbstractState st;
    for (const auto& t : obs.tools) st.holder[t.id] = std::nullopt;
    st.region = block_confined(obs) ? Region::Confined : Region::Free;
    auto owners_at = [&](Point2 p) {
        std::set<ArmId> o;
        for (const auto& r : obs.robots) {
            if (reaches(r, p)) o.insert(r.id);
        }
        return o;
    };
    st.owners = owners_at(obs.block.center);
    const auto handover = handover_point(obs);

    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        const MotionFunction& f = plan.steps[i];
        auto flag = [&](const std::string& code, const std::string& msg) {
            out.violations.push_back({i, code, msg});
        };
        if (i > 0 && plan.steps[i - 1] == f) flag("duplicate-step", "step repeats the previous one");
        bool bad_ref = false;
        if (!obs.robot(f.arm)) {
            flag("unknown-arm", std::string("arm '") + to_string(f.arm) + "' not in scene");
            bad_ref = true;
        }
        const ToolSpec* tool = obs.tool(f.tool);
        if (!tool) {
            flag("unknown-tool", "tool '" + f.tool + "' not in scene");
            bad_ref = true;
        }
        const bool uses_object = f.kind != FnKind::Grasp && f.kind != FnKind::Release;
        if (uses_object && f.object != obs.block.id) {
            flag("unknown-object", "object '" + f.object + "' not in scene");
            bad_ref = true;
        }
        if (bad_ref) continue;

        const auto held_by = st.holder[f.tool];
        const bool holds = held_by && *held_by == f.arm;
        switch (f.kind) {
            case FnKind::Grasp: {
                if (held_by) {
                    flag("tool-busy", "tool '" + f.tool + "' is already held");
                    break;
                }
                bool arm_busy = false;
                for (const auto& [id, h] : st.holder) arm_busy = arm_busy || (h && *h == f.arm);
                if (arm_busy) {
                    flag("arm-busy", std::string("arm '") + to_string(f.arm) + "' already holds a tool");
                    break;
                }
                st.holder[f.tool] = f.arm;
                break;
            }
            case FnKind::Approach:
                if (!holds) { flag("tool-not-held", "approach with a tool the arm does not hold"); break; }
                if (!st.owners.count(f.arm)) { flag("not-owner", "block is out of this arm's reach"); break; }
                st.approached[f.arm] = true;
                break;
            case FnKind::Interact:
                if (!holds) { flag("tool-not-held", "interact with a tool the arm does not hold"); break; }
                if (!st.approached[f.arm]) { flag("not-approached", "interact before approach"); break; }
                if (!st.owners.count(f.arm)) { flag("not-owner", "block is out of this arm's reach"); break; }
                if (st.region == Region::Confined) { flag("confined", "block is still confined by walls"); break; }
                if (f.goal == GoalKind::Target) {
                    if (!obs.target) { flag("no-target", "scene has no target"); break; }
                    const RobotSpec* r = obs.robot(f.arm);
                    if (!reaches(*r, *obs.target)) { flag("target-unreachable", "target out of reach"); break; }
                    st.region = Region::Target;
                    st.owners = owners_at(*obs.target);
                } else {
                    if (!handover) { flag("no-handover-zone", "arm workspaces do not overlap"); break; }
                    st.region = Region::Handover;
                    st.owners = {f.arm};
                }
                break;
            case FnKind::Stepping:
                if (!holds) { flag("tool-not-held", "stepping with a tool the arm does not hold"); break; }
                if (!st.approached[f.arm]) { flag("not-approached", "stepping before approach"); break; }
                if (!obs.walls) { flag("no-walls", "stepping needs walls"); break; }
                if (!tool->hook) { flag("not-hook", "stepping needs a hook-class tool"); break; }
                if (st.region != Region::Confined) { flag("not-confined", "block is not confined"); break; }
                st.region = Region::Free;
                break;
            case FnKind::Pass:
                if (!handover) { flag("no-handover-zone", "arm workspaces do not overlap"); break; }
                if (!holds) { flag("tool-not-held", "pass with a tool the arm does not hold"); break; }
                if (f.arm2 == f.arm) { flag("self-pass", "pass to the same arm"); break; }
                if (!obs.robot(f.arm2)) { flag("unknown-arm", "receiving arm not in scene"); break; }
                if (st.region != Region::Handover || !st.owners.count(f.arm)) {
                    flag("not-at-handover", "block is not at the handover zone under this arm");
                    break;
                }
                st.owners = {f.arm2};
                st.approached[f.arm] = false;
                break;
            case FnKind::Release:
                if (!holds) { flag("tool-not-held", "release of a tool the arm does not hold"); break; }
                st.holder[f.tool] = std::nullopt;
                st.approached[f.arm] = false;
                break;
        }
    }
    for (const auto& [id, h] : st.holder) {
        if (h) out.violations.push_back({plan.steps.size(), "tool-not-released", "tool '" + id + "' still held"});
    }
    out.terminal = obs.target ? st.region == Region::Target : st.region != Region::Confined;
    if (!out.terminal) {
        out.violations.push_back({plan.steps.size(), "terminal-not-reached", "plan does not complete the task"});
    }
    return out;
}

}  // namespace

std::string ValidationReport::summary() const {
    std::ostringstream os;
    if (ok()) return "ok";
    for (const auto& v : violations) os << "step " << v.step << ": " << v.code << " (" << v.message << ")\n";
    for (auto i : redundant_steps) os << "step " << i << ": redundant\n";
    return os.str();
}

ValidationReport validate_plan(const Plan& plan, const Observation& obs) {
    ValidationReport report;
    const Replay base = replay(plan, obs);
    report.violations = base.violations;
    report.terminal_reached = base.terminal;
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        Plan reduced = plan;
        reduced.steps.erase(reduced.steps.begin() + static_cast<std::ptrdiff_t>(i));
        const Replay r = replay(reduced, obs);
        if (r.violations.empty() && r.terminal) report.redundant_steps.push_back(i);
    }
    return report;
}

Observation mirror(const Observation& obs) {
    auto m = [](Point2 p) { return Point2{-p.x, p.y}; };
    Observation out = obs;
    for (auto& r : out.robots) {
        r.id = other(r.id);
        r.base = m(r.base);
    }
    std::sort(out.robots.begin(), out.robots.end(), [](const RobotSpec& a, const RobotSpec& b) { return a.id < b.id; });
    for (auto& t : out.tools) {
        for (auto& p : t.shape.points) p = m(p);
        t.grasp_point = m(t.grasp_point);
        t.home_pose = make_pose(m(t.home_pose.position), -t.home_pose.theta);
    }
    out.block.center = m(out.block.center);
    if (out.walls) {
        for (auto& s : out.walls->segments) s = {m(s.a), m(s.b)};
        out.walls->interior_hint = m(out.walls->interior_hint);
    }
    if (out.target) out.target = m(*out.target);
    return out;
}

}  // namespace tom
