#include "tom/simworld.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

namespace tom {

void validate(const ControllerParams& p) {
    if (!(p.goal_tol > 0.0)) throw Error(ErrorCode::InvalidParameter, "goal_tol must be positive");
    if (p.step_budget < 1) throw Error(ErrorCode::InvalidParameter, "step budget must be at least 1");
    if (p.stepping_budget < 1) throw Error(ErrorCode::InvalidParameter, "stepping budget must be at least 1");
    if (!(p.transit_step > 0.0) || !(p.transit_rot > 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "transit rates must be positive");
    }
    if (!(p.extract_step > 0.0)) throw Error(ErrorCode::InvalidParameter, "extract step must be positive");
    if (!(p.substep_len > 0.0)) throw Error(ErrorCode::InvalidParameter, "substep length must be positive");
    validate(p.stepping);
}

std::optional<std::string> WorldState::holder_tool(ArmId arm) const {
    const auto it = held.find(arm);
    return it == held.end() ? std::nullopt : it->second;
}

WorldState make_world(const Observation& obs) {
    validate(obs);
    WorldState w;
    w.observation = obs;
    for (const auto& t : obs.tools) w.tool_poses[t.id] = t.home_pose;
    for (const auto& r : obs.robots) {
        w.held[r.id] = std::nullopt;
        w.ee[r.id] = make_pose(r.base, 0.0);
    }
    w.exit_point = obs.block.center;
    if (obs.walls) w.exit_point = compute_exit(obs.walls->segments, obs.walls->interior_hint, obs.block.center).exit_point;
    return w;
}

namespace {

struct Push {
    Vector2 normal;
    double depth = 0.0;
};

std::optional<Push> penetration(const Segment2& s, Point2 c, double r, Point2 prev) {
    const Vector2 d = s.b - s.a;
    const double len = d.norm();
    if (len <= 1e-15) return std::nullopt;
    const double t = std::clamp((c - s.a).dot(d) / (len * len), 0.0, 1.0);
    const Point2 q = s.a + t * d;
    const double side_now = d.cross(c - s.a);
    const double side_prev = d.cross(prev - s.a);
    const Vector2 unit_left = d.perp_left() / len;
    if (t > 0.0 && t < 1.0 && side_now * side_prev < 0.0) {
        // Center tunnelled through the segment; restore it on the side it came from.
        return Push{side_prev > 0.0 ? unit_left : -unit_left, std::abs(side_now) / len + r};
    }
    const double dist = distance(c, q);
    if (dist >= r) return std::nullopt;
    if (dist <= 1e-12) return Push{side_prev >= 0.0 ? unit_left : -unit_left, r};
    return Push{(c - q) / dist, r - dist};
}

}  // namespace

namespace {

// Smallest displacement d with n_i . d >= depth_i for every contact, by enumerating
// the active sets of a 2-D problem (none, one or two tight constraints).
std::optional<Vector2> min_displacement(const std::vector<Push>& cs) {
    auto feasible = [&](Vector2 d) {
        for (const auto& c : cs) {
            if (c.normal.dot(d) < c.depth - 1e-12) return false;
        }
        return true;
    };
    std::optional<Vector2> best;
    auto offer = [&](Vector2 d) {
        if (feasible(d) && (!best || d.norm() < best->norm())) best = d;
    };
    offer({0.0, 0.0});
    for (const auto& c : cs) offer(c.depth * c.normal);
    for (std::size_t i = 0; i < cs.size(); ++i) {
        for (std::size_t j = i + 1; j < cs.size(); ++j) {
            const Vector2 a = cs[i].normal, b = cs[j].normal;
            const double det = a.cross(b);
            if (std::abs(det) < 1e-12) continue;
            offer({(cs[i].depth * b.dy - cs[j].depth * a.dy) / det, (a.dx * cs[j].depth - b.dx * cs[i].depth) / det});
        }
    }
    return best;
}

}  // namespace

Point2 resolve_push(const std::vector<Segment2>& tool, Point2 center, double radius, Point2 prev,
                    const std::vector<Segment2>& walls) {
    if (!(radius > 0.0)) throw Error(ErrorCode::InvalidParameter, "object radius must be positive");
    for (const auto& s : tool) {
        if (!is_finite(s.a) || !is_finite(s.b)) throw Error(ErrorCode::InvalidParameter, "tool pose is not finite");
    }
    std::vector<Segment2> all = tool;
    all.insert(all.end(), walls.begin(), walls.end());

    // Quasi-static projection: move the disk the least distance that clears every
    // contact at once, re-linearizing round by round.
    Point2 c = center;
    for (int round = 0; round < 8; ++round) {
        double deepest = 0.0;
        std::vector<Push> contacts;
        for (const auto& s : all) {
            if (const auto p = penetration(s, c, radius, prev)) {
                deepest = std::max(deepest, p->depth);
                contacts.push_back(*p);
            }
        }
        if (deepest <= 1e-12) return c;
        // Near misses become constraints too so the move cannot dig into them.
        for (const auto& s : all) {
            if (penetration(s, c, radius, prev)) continue;
            if (const auto p = penetration(s, c, radius + 2.0 * deepest, prev)) {
                contacts.push_back({p->normal, p->depth - 2.0 * deepest});
            }
        }
        const auto d = min_displacement(contacts);
        if (!d) break;
        c = c + *d;
    }
    for (const auto& s : all) {
        const auto p = penetration(s, c, radius, prev);
        if (p && p->depth > 1e-6) throw Error(ErrorCode::ContactJam, "object is jammed; contact resolution did not converge");
    }
    return c;
}

Point2 resolve_push(const Polyline& tool_world, Point2 center, double radius, Point2 prev) {
    return resolve_push(tool_world.segments(), center, radius, prev);
}

bool extracted(const Observation& obs) {
    if (!obs.walls) return true;
    std::vector<Point2> pts;
    for (const auto& s : obs.walls->segments) {
        pts.push_back(s.a);
        pts.push_back(s.b);
    }
    const auto hull = convex_hull(pts);
    if (hull.size() < 3) return true;
    const ClosedContour c{hull};
    return !c.contains(obs.block.center) && c.distance_to_boundary(obs.block.center) >= obs.block.radius;
}

namespace {

class Executor {
public:
    Executor(WorldState& w, const ControllerParams& p, RunLog& log) : w_(w), p_(p), log_(log) {}

    void run(const MotionFunction& fn, const MotionFunction* next) {
        budget_used_ = 0;
        switch (fn.kind) {
            case FnKind::Grasp: grasp(fn); break;
            case FnKind::Approach: approach(fn, next); break;
            case FnKind::Interact: interact(fn.arm, fn.tool, goal_point(fn.goal), "interact"); break;
            case FnKind::Stepping: stepping(fn); break;
            case FnKind::Pass: pass(fn); break;
            case FnKind::Release: release(fn); break;
        }
    }

private:
    WorldState& w_;
    const ControllerParams& p_;
    RunLog& log_;
    int budget_used_ = 0;

    const Observation& obs() const { return w_.observation; }
    Point2 obj() const { return w_.observation.block.center; }
    double radius() const { return w_.observation.block.radius; }

    const ToolSpec& tool_spec(const std::string& id) const {
        const ToolSpec* t = obs().tool(id);
        if (!t) throw Error(ErrorCode::InvalidPlan, "unknown tool '" + id + "'");
        return *t;
    }

    void require_holds(ArmId arm, const std::string& tool) const {
        const auto h = w_.holder_tool(arm);
        if (!h || *h != tool) {
            throw Error(ErrorCode::InvalidPlan, std::string("arm '") + to_string(arm) + "' does not hold '" + tool + "'");
        }
    }

    GraspedTool grasped(ArmId arm) const {
        const ArmTask& task = w_.tasks.at(arm);
        const auto tool = *w_.holder_tool(arm);
        return GraspedTool{&task.analysis, tool_spec(tool).grasp_point};
    }

    Point2 goal_point(GoalKind g) const {
        if (g == GoalKind::Target) {
            if (!obs().target) throw Error(ErrorCode::InvalidPlan, "interact to target, but the scene has no target");
            return *obs().target;
        }
        const auto h = handover_point(obs());
        if (!h) throw Error(ErrorCode::InvalidPlan, "no handover zone between the arms");
        return *h;
    }

    const RobotSpec& robot(ArmId arm) const {
        const RobotSpec* r = obs().robot(arm);
        if (!r) throw Error(ErrorCode::InvalidPlan, std::string("arm '") + to_string(arm) + "' not in scene");
        return *r;
    }

    // Segments of every tool currently lowered onto the table.
    std::vector<Segment2> lowered_segments(std::optional<std::pair<ArmId, Pose2>> override_pose = {}) const {
        std::vector<Segment2> segs;
        for (const auto& [arm, task] : w_.tasks) {
            const auto tool = w_.holder_tool(arm);
            if (!tool) continue;
            const Pose2 pose = override_pose && override_pose->first == arm ? override_pose->second : w_.ee.at(arm);
            for (const auto& s : tool_world_shape(tool_spec(*tool), pose).segments()) segs.push_back(s);
        }
        return segs;
    }

    std::vector<Segment2> walls() const {
        return obs().walls ? obs().walls->segments : std::vector<Segment2>{};
    }

    RobotArm arm_of(ArmId id) const {
        const RobotSpec& r = robot(id);
        return {r.base, r.reach};
    }

    void set_ee(ArmId arm, const Pose2& pose) {
        w_.ee[arm] = pose;
        if (const auto t = w_.holder_tool(arm)) w_.tool_poses[*t] = pose;
    }

    // Moves an arm to `target`, sweeping a lowered tool in small increments so the
    // disk is pushed continuously rather than tunnelled through.
    void move_arm(ArmId arm, const Pose2& target) {
        const auto tool = w_.holder_tool(arm);
        if (!tool || !w_.tasks.count(arm)) {
            set_ee(arm, target);
            return;
        }
        const Pose2 from = w_.ee.at(arm);
        const ToolSpec& spec = tool_spec(*tool);
        double span = 0.0;
        for (const auto& q : spec.shape.points) span = std::max(span, distance(q, spec.grasp_point));
        const double dth = normalize_angle(target.theta - from.theta);
        const double travel = distance(from.position, target.position) + std::abs(dth) * span;
        const int n = std::clamp(static_cast<int>(std::ceil(travel / p_.substep_len)), 1, 20000);
        const auto wall_segs = walls();
        Pose2 reached = from;
        for (int i = 1; i <= n; ++i) {
            const double s = static_cast<double>(i) / n;
            const Pose2 pose = i == n ? target : Pose2{lerp(from.position, target.position, s), from.theta + s * dth};
            const Point2 prev = obj();
            try {
                w_.observation.block.center =
                    resolve_push(lowered_segments(std::pair{arm, pose}), prev, radius(), prev, wall_segs);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::ContactJam) throw;
                // Block wedged against a wall: the arm stalls where it last moved freely.
                break;
            }
            reached = pose;
        }
        set_ee(arm, reached);
    }

    double error() const {
        return distance(obj(), obs().target ? *obs().target : w_.exit_point);
    }

    void frame(const std::string& mode) {
        Frame f;
        f.t = w_.time++;
        f.obj = obj();
        if (w_.ee.count(ArmId::Left)) f.ee_left = w_.ee.at(ArmId::Left);
        if (w_.ee.count(ArmId::Right)) f.ee_right = w_.ee.at(ArmId::Right);
        f.error = error();
        double best = radius() + p_.contact_eps;
        for (const auto& [arm, task] : w_.tasks) {
            const auto tool = w_.holder_tool(arm);
            if (!tool) continue;
            const ToolSpec& spec = tool_spec(*tool);
            const Polyline world = tool_world_shape(spec, w_.ee.at(arm));
            bool touching = false;
            for (std::size_t i = 0; i < world.segment_count(); ++i) {
                const Segment2 s = world.segment(i);
                const double d = s.distance_to(obj());
                if (d <= best) {
                    best = d;
                    touching = true;
                    f.contact_segment = i;
                    f.contact_side = s.direction().cross(obj() - s.a) >= 0.0 ? Side::Left : Side::Right;
                }
            }
            // The indicator tracks contact at the high-manoeuvrability region, not anywhere on the tool.
            const Point2 p_star = GraspedTool{&task.analysis, spec.grasp_point}.p_star_world(w_.ee.at(arm));
            if (touching && distance(p_star, obj()) <= radius()) f.contact = true;
        }
        f.mode = mode;
        for (const auto& [arm, t] : w_.held) f.held_count += t ? 1 : 0;
        f.tool_poses = w_.tool_poses;
        log_.frames.push_back(f);
    }

    void tick(const std::string& mode, int budget) {
        frame(mode);
        if (++budget_used_ > budget) {
            throw Error(ErrorCode::Timeout, "step budget of " + std::to_string(budget) + " frames exhausted during " + mode);
        }
    }

    // Lifted transit: no contact while moving.
    void transit(ArmId arm, const Pose2& target, const std::string& mode) {
        const Pose2 from = w_.ee.at(arm);
        const double dth = normalize_angle(target.theta - from.theta);
        const double d = distance(from.position, target.position);
        const int n = std::max(1, static_cast<int>(std::ceil(std::max(d / p_.transit_step, std::abs(dth) / p_.transit_rot))));
        for (int i = 1; i <= n; ++i) {
            const double s = static_cast<double>(i) / n;
            set_ee(arm, i == n ? target : Pose2{lerp(from.position, target.position, s), from.theta + s * dth});
            tick(mode, p_.step_budget);
        }
    }

    // Rotates the tool about the block, keeping p* on the block center.
    void orbit(ArmId arm, double theta_goal, const std::string& mode, int budget) {
        const GraspedTool tool = grasped(arm);
        double theta = w_.ee.at(arm).theta;
        while (true) {
            const double rest = normalize_angle(theta_goal - theta);
            if (std::abs(rest) <= 1e-12) break;
            theta += std::clamp(rest, -p_.interact.rot_rate, p_.interact.rot_rate);
            move_arm(arm, pose_with_p_star_at(tool, obj(), theta));
            tick(mode, budget);
        }
    }

    void grasp(const MotionFunction& fn) {
        const ToolSpec& t = tool_spec(fn.tool);
        robot(fn.arm);
        for (const auto& [arm, h] : w_.held) {
            if (h && *h == fn.tool) throw Error(ErrorCode::InvalidPlan, "tool '" + fn.tool + "' is already held");
        }
        if (w_.holder_tool(fn.arm)) throw Error(ErrorCode::InvalidPlan, "arm already holds a tool");
        w_.held[fn.arm] = fn.tool;
        w_.grasps++;
        set_ee(fn.arm, w_.tool_poses.at(t.id));
        tick("grasp", p_.step_budget);
    }

    void release(const MotionFunction& fn) {
        require_holds(fn.arm, fn.tool);
        const ToolSpec& t = tool_spec(fn.tool);
        w_.tasks.erase(fn.arm);
        set_ee(fn.arm, t.home_pose);
        w_.tool_poses[t.id] = t.home_pose;
        w_.held[fn.arm] = std::nullopt;
        w_.releases++;
        tick("release", p_.step_budget);
    }

    void approach(const MotionFunction& fn, const MotionFunction* next) {
        require_holds(fn.arm, fn.tool);
        const ToolSpec& spec = tool_spec(fn.tool);
        const RobotSpec& arm = robot(fn.arm);
        w_.tasks.erase(fn.arm);

        ArmTask task;
        task.stepping = next && next->kind == FnKind::Stepping && next->arm == fn.arm;
        Pose2 start;
        if (task.stepping) {
            if (!obs().walls) throw Error(ErrorCode::InvalidPlan, "stepping needs walls");
            task.analysis = analyze_tool_for(spec.shape, radius(), tip_affordance(spec.shape, spec.grasp_point), p_.analysis);
            const SteppingContext ctx{&spec.shape, GraspedTool{&task.analysis, spec.grasp_point}, p_.contact_eps};
            const ExitSpec exit = compute_exit(obs().walls->segments, obs().walls->interior_hint, obj());
            start = stepping_init(ctx, obs().walls->segments, exit, obj(), p_.stepping).ee_pose;
        } else {
            if (next && next->arm == fn.arm && next->kind == FnKind::Interact) task.goal = next->goal;
            else if (next && next->arm == fn.arm && next->kind == FnKind::Pass) task.goal = GoalKind::Handover;
            else task.goal = obs().target ? GoalKind::Target : GoalKind::Handover;
            const Point2 goal = goal_point(task.goal);
            const Vector2 v_local = (goal - obj()).rotated(-w_.ee.at(fn.arm).theta);
            task.analysis = analyze_tool(spec.shape, radius(), v_local, p_.analysis);
            start = interact_poses(GraspedTool{&task.analysis, spec.grasp_point}, obj(), goal, RobotArm{arm.base, arm.reach}).start_pose;
        }
        transit(fn.arm, start, "approach");
        w_.tasks[fn.arm] = std::move(task);
        // Lowering the tool; p* sits on the offset contour so this only grazes the block.
        move_arm(fn.arm, start);
        tick("approach", p_.step_budget);
    }

    void interact(ArmId arm_id, const std::string& tool, Point2 goal, const std::string& mode) {
        require_holds(arm_id, tool);
        if (!w_.tasks.count(arm_id)) throw Error(ErrorCode::InvalidPlan, "interact before approach");
        if (distance(obj(), goal) <= p_.goal_tol) {
            tick(mode, p_.step_budget);
            return;
        }
        const GraspedTool gt = grasped(arm_id);
        const InteractPlan plan = interact_poses(gt, obj(), goal, arm_of(arm_id));
        orbit(arm_id, plan.push_theta, "orbit", p_.step_budget);

        InteractPlan live = plan;
        while (distance(obj(), goal) > p_.goal_tol) {
            const Pose2 ee = w_.ee.at(arm_id);
            live.end_pose = make_pose(ee.position + (goal - obj()), plan.push_theta);
            move_arm(arm_id, interact_step(ee, live, p_.interact));
            tick(mode, p_.step_budget);
        }
    }

    void pass(const MotionFunction& fn) {
        robot(fn.arm2);
        interact(fn.arm, fn.tool, goal_point(GoalKind::Handover), "pass");
        w_.tasks.erase(fn.arm);
        tick("pass", p_.step_budget);
    }

    void stepping(const MotionFunction& fn) {
        require_holds(fn.arm, fn.tool);
        if (!w_.tasks.count(fn.arm) || !w_.tasks.at(fn.arm).stepping) {
            throw Error(ErrorCode::InvalidPlan, "stepping needs a preceding approach for stepping");
        }
        const ToolSpec& spec = tool_spec(fn.tool);
        const SteppingContext ctx{&spec.shape, grasped(fn.arm), p_.contact_eps};
        const auto& wall_segs = obs().walls->segments;
        const ExitSpec exit = compute_exit(wall_segs, obs().walls->interior_hint, obj());
        const int budget = p_.stepping_budget;

        SteppingState state = stepping_init(ctx, wall_segs, exit, obj(), p_.stepping);
        state.ee_pose = w_.ee.at(fn.arm);
        while (!extracted(obs())) {
            state.obj = obj();
            state.angle_obj = object_angle(spec.shape, ctx.tool, state.ee_pose, obj());
            state.contact = tool_touches(tool_world_shape(spec, state.ee_pose), obj(), radius(), p_.contact_eps);
            if (stepping_aligned(ctx, state, exit, p_.stepping)) break;
            const auto [cmd, next] = stepping_step(ctx, state, exit, p_.stepping);
            move_arm(fn.arm, cmd.ee_pose);
            tick(to_string(cmd.mode), budget);
            state = next;
            state.ee_pose = w_.ee.at(fn.arm);
        }
        if (extracted(obs())) return;

        // Finish the turn exactly, then drag straight out along the exit direction.
        const Vector2 a_tip = tip_direction_world(ctx.tool, w_.ee.at(fn.arm));
        const double turn = std::atan2(a_tip.cross(exit.direction), a_tip.dot(exit.direction));
        orbit(fn.arm, w_.ee.at(fn.arm).theta + turn, "align", budget);
        while (!extracted(obs())) {
            const Pose2 ee = w_.ee.at(fn.arm);
            move_arm(fn.arm, {ee.position + p_.extract_step * exit.direction, ee.theta});
            tick("extract", budget);
        }
    }
};

}  // namespace

void execute_motion_function(WorldState& world, const MotionFunction& fn, const ControllerParams& params,
                             RunLog& log, const MotionFunction* next) {
    Executor(world, params, log).run(fn, next);
}

RunResult run_plan(const Observation& obs, const Plan& plan, const ControllerParams& params) {
    validate(params);
    const ValidationReport report = validate_plan(plan, obs);
    if (!report.violations.empty()) {
        throw Error(ErrorCode::InvalidPlan, "plan failed validation:\n" + report.summary());
    }
    const auto t0 = std::chrono::steady_clock::now();
    RunResult out;
    WorldState world = make_world(obs);
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        const MotionFunction* next = i + 1 < plan.steps.size() ? &plan.steps[i + 1] : nullptr;
        try {
            execute_motion_function(world, plan.steps[i], params, out.log, next);
        } catch (const Error& e) {
            out.error = e.code();
            out.message = "step " + std::to_string(i) + " (" + to_string(plan.steps[i].kind) + "): " + e.what();
            out.failed_step = i;
            break;
        }
    }
    out.completed = !out.error.has_value();
    const Observation& live = world.observation;
    const bool goal = live.target ? distance(live.block.center, *live.target) <= params.goal_tol : extracted(live);
    out.success = out.completed && goal;
    out.final_state = std::move(world);
    out.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

std::string RunLog::to_csv() const {
    std::string out = "t,obj_x,obj_y,ee_left_x,ee_left_y,ee_left_th,ee_right_x,ee_right_y,ee_right_th,error_m,contact,seg_idx,mode\n";
    char buf[512];
    auto z = [](double v) { return v == 0.0 ? 0.0 : v; };
    for (const auto& f : frames) {
        std::snprintf(buf, sizeof buf, "%ld,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%d,%d,%s\n", f.t, z(f.obj.x),
                      z(f.obj.y), z(f.ee_left.position.x), z(f.ee_left.position.y), z(f.ee_left.theta),
                      z(f.ee_right.position.x), z(f.ee_right.position.y), z(f.ee_right.theta), z(f.error),
                      f.contact ? 1 : 0, f.contact_segment ? static_cast<int>(*f.contact_segment) : -1, f.mode.c_str());
        out += buf;
    }
    return out;
}

Metrics metrics(const RunLog& log, double wall_clock_s) {
    if (log.frames.empty()) throw Error(ErrorCode::InvalidParameter, "empty run log");
    Metrics m;
    m.steps = log.frames.size();
    m.wall_clock_s = wall_clock_s;
    for (std::size_t i = 0; i < log.frames.size(); ++i) {
        const Frame& f = log.frames[i];
        m.error_series.push_back(f.error);
        m.contact_series.push_back(f.contact ? 1 : 0);
        if (f.contact_segment) m.segment_contact_histogram[{*f.contact_segment, f.contact_side}]++;
        if (i > 0 && f.contact != log.frames[i - 1].contact) m.contact_transitions++;
    }
    return m;
}

}  // namespace tom
