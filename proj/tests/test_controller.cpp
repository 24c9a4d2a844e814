#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "tom/affordance.hpp"
#include "tom/controller.hpp"
#include "tom/stock.hpp"

using namespace tom;

namespace {

bool throws_code(ErrorCode code, auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code() == code;
    }
    return false;
}

// Hand-built analysis: only the fields the controller reads.
ToolAnalysis manual_analysis(Point2 p_star, Vector2 a_dir, double r_obj = 0.03) {
    ToolAnalysis a;
    a.p_star = p_star;
    a.a_star = {p_star, a_dir, 0.1, 0, Side::Left};
    a.push_normal = a_dir;
    a.r_obj = r_obj;
    return a;
}

const double kTol = 1e-9;

}  // namespace

TEST_SUITE("interact poses") {
    const ToolAnalysis stick = manual_analysis({0.15, 0.0}, {0, 1});
    const GraspedTool tool{&stick, {0, 0}};

    TEST_CASE("lever of a mid-point p* on a 0.3 m stick held at the end") {
        CHECK(tool.lever() == doctest::Approx(0.15));
    }

    TEST_CASE("start pose is the circle point nearest the base") {
        const Point2 obj{0.3, 0}, goal{-0.3, 0}, base{0, -0.5};
        const InteractPlan plan = interact_poses(tool, obj, goal, {base, 2.0});
        // Projection oracle: centre + r * unit(base - centre).
        const double d = oracle::dist(base, obj);
        const Point2 expect{obj.x + 0.15 * (base.x - obj.x) / d, obj.y + 0.15 * (base.y - obj.y) / d};
        CHECK(oracle::dist(plan.start_pose.position, expect) < 1e-12);
        CHECK(std::abs(oracle::dist(plan.start_pose.position, obj) - 0.15) < 1e-6);
        CHECK(std::abs(oracle::dist(plan.end_pose.position, goal) - 0.15) < 1e-6);
        CHECK(plan.circle_start.radius == plan.r);
        CHECK(plan.circle_end.radius == plan.r);
        CHECK(oracle::dist(tool.p_star_world(plan.start_pose), obj) < 1e-12);
        CHECK(oracle::dist(tool.p_star_world(plan.end_pose), goal) < 1e-12);
        // The push normal faces the goal.
        const Vector2 n = Vector2{0, 1}.rotated(plan.push_theta);
        CHECK(n.dx == doctest::Approx(-1.0));
        CHECK(n.dy == doctest::Approx(0.0).epsilon(1e-12));
    }

    TEST_CASE("degenerate and infeasible requests") {
        CHECK(throws_code(ErrorCode::InvalidParameter, [&] { interact_poses(tool, {0.3, 0}, {0.3, 0}, {{0, -0.5}, 2}); }));
        CHECK(throws_code(ErrorCode::Unreachable, [&] { interact_poses(tool, {0.3, 0}, {-0.3, 0}, {{0, -0.5}, 0.2}); }));
        const ToolAnalysis fat = manual_analysis({0.15, 0.0}, {0, 1}, 0.2);
        CHECK(throws_code(ErrorCode::ToolTooShort,
                          [&] { interact_poses(GraspedTool{&fat, {0, 0}}, {0.3, 0}, {-0.3, 0}, {{0, -0.5}, 2}); }));
    }

    TEST_CASE("start and end lie on their circles for random inputs") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-0.5, 0.5);
        for (int trial = 0; trial < 200; ++trial) {
            const Point2 obj{u(rng), u(rng)}, goal{u(rng), u(rng)}, base{u(rng), u(rng) - 0.6};
            if (oracle::dist(obj, goal) < 1e-3 || oracle::dist(obj, base) < 1e-3 || oracle::dist(goal, base) < 1e-3) continue;
            const InteractPlan plan = interact_poses(tool, obj, goal, {base, 10});
            CHECK(std::abs(oracle::dist(plan.start_pose.position, obj) - plan.r) < 1e-6);
            CHECK(std::abs(oracle::dist(plan.end_pose.position, goal) - plan.r) < 1e-6);
        }
    }
}

TEST_SUITE("align_tool_pose") {
    const ToolAnalysis hook = manual_analysis({0.2, 0.05}, {-1, 0});
    const GraspedTool tool{&hook, {0.02, 0.0}};

    // Sweep of rigid placements with p* pinned on the object, one per degree.
    double sweep_min(Point2 obj, const Pose2& anchor) {
        double best = 1e300;
        for (int deg = 0; deg < 360; ++deg) {
            const double th = deg * kPi / 180.0;
            const Vector2 lever = (hook.p_star - tool.grasp).rotated(th);
            const Pose2 p{obj - lever, th};
            best = std::min(best, alignment_cost(tool, p, obj, anchor));
        }
        return best;
    }

    TEST_CASE("p* lands on the object") {
        const Point2 obj{0.1, 0.2};
        const Pose2 pose = align_tool_pose(tool, obj, {{0.4, -0.3}, 0.7});
        CHECK(oracle::dist(tool.p_star_world(pose), obj) < kTol);
    }

    TEST_CASE("never worse than a one-degree sweep") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-1, 1);
        for (int trial = 0; trial < 100; ++trial) {
            const Point2 obj{u(rng), u(rng)};
            const Pose2 anchor{{u(rng), u(rng)}, u(rng)};
            const Pose2 pose = align_tool_pose(tool, obj, anchor);
            const double j = alignment_cost(tool, pose, obj, anchor);
            CHECK(j <= sweep_min(obj, anchor) + 1e-12);
            // One degree of slack bounds how far the sweep can undercut the optimum from above.
            CHECK(sweep_min(obj, anchor) - j <= tool.lever() * kPi / 180.0 + 1e-12);
        }
    }

    TEST_CASE("diametrically opposite anchor") {
        const Point2 obj{0, 0};
        const Pose2 anchor{{-0.5, 0}, 0};
        const Pose2 pose = align_tool_pose(tool, obj, anchor);
        CHECK(pose.position.x == doctest::Approx(-tool.lever()));
        CHECK(pose.position.y == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(alignment_cost(tool, pose, obj, anchor) == doctest::Approx(0.5 - tool.lever()));
    }

    TEST_CASE("repeat calls agree") {
        const Pose2 a = align_tool_pose(tool, {0.3, 0.1}, {{0, -0.4}, 1.0});
        const Pose2 b = align_tool_pose(tool, {0.3, 0.1}, {{0, -0.4}, 1.0});
        CHECK(a.position.x == b.position.x);
        CHECK(a.position.y == b.position.y);
        CHECK(a.theta == b.theta);
    }
}

TEST_SUITE("interact_step") {
    InteractPlan plan_to(Pose2 end) {
        InteractPlan p;
        p.end_pose = end;
        return p;
    }

    TEST_CASE("k = 1 lands on the end position") {
        const Pose2 next = interact_step({{0, 0}, 0.3}, plan_to({{0.2, 0.1}, 0}), {1.0, 0.002, 0.2});
        CHECK(next.position.x == doctest::Approx(0.2));
        CHECK(next.position.y == doctest::Approx(0.1));
        CHECK(next.theta == doctest::Approx(0.3));
    }

    TEST_CASE("k = 0.5 halves a 0.2 m gap") {
        const Pose2 next = interact_step({{0, 0}, 0}, plan_to({{0.2, 0}, 0}), {0.5, 0.002, 0.2});
        CHECK(next.position.x == doctest::Approx(0.1));
    }

    TEST_CASE("at the end position it only rotates, capped by the rate") {
        const Pose2 next = interact_step({{0.2, 0}, 0}, plan_to({{0.2, 0}, 1.0}), {0.5, 0.002, 0.25});
        CHECK(next.position.x == 0.2);
        CHECK(next.theta == doctest::Approx(0.25));
        const Pose2 close = interact_step({{0.2, 0}, 0.9}, plan_to({{0.2, 0}, 1.0}), {0.5, 0.002, 0.25});
        CHECK(close.theta == doctest::Approx(1.0));
    }

    TEST_CASE("contraction toward the end position") {
        std::mt19937_64 rng(12);
        std::uniform_real_distribution<double> u(-1, 1), k(0.01, 1.0);
        for (int trial = 0; trial < 300; ++trial) {
            const Pose2 cur{{u(rng), u(rng)}, u(rng)};
            const Pose2 end{{u(rng), u(rng)}, u(rng)};
            const double kk = k(rng);
            const double before = oracle::dist(cur.position, end.position);
            if (before <= 0.002) continue;
            const Pose2 next = interact_step(cur, plan_to(end), {kk, 0.002, 0.2});
            CHECK(oracle::dist(next.position, end.position) == doctest::Approx((1 - kk) * before).epsilon(1e-9));
            CHECK(next.theta == cur.theta);
        }
    }

    TEST_CASE("gain outside (0, 1] is rejected") {
        CHECK(throws_code(ErrorCode::InvalidParameter, [] { interact_step({}, plan_to({{1, 0}, 0}), {0.0, 0.002, 0.2}); }));
        CHECK(throws_code(ErrorCode::InvalidParameter, [] { interact_step({}, plan_to({{1, 0}, 0}), {1.5, 0.002, 0.2}); }));
    }
}

TEST_SUITE("stepping primitives") {
    TEST_CASE("step trigger parity") {
        CHECK(step_trigger(0) == 1);
        CHECK(step_trigger(1) == 0);
        CHECK(step_trigger(7) == 0);
        for (long t = 0; t < 1000; ++t) CHECK(step_trigger(t) + step_trigger(t + 1) == 1);
        CHECK(throws_code(ErrorCode::InvalidParameter, [] { step_trigger(-1); }));
    }

    TEST_CASE("rotation angle substitutions") {
        CHECK(rotation_angle(0.4, RotationDirection::Anticlockwise, kPi / 6, kPi / 36) == doctest::Approx(-7 * kPi / 36));
        CHECK(rotation_angle(0.0, RotationDirection::Clockwise, kPi / 6, kPi / 36) == doctest::Approx(29 * kPi / 36));
        CHECK(rotation_angle(1.0, RotationDirection::Anticlockwise, 0.5, 0.0) == doctest::Approx(-0.5));
    }

    TEST_CASE("clockwise branch ignores full turns of phi") {
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> u(-kPi, kPi), a(0, kPi);
        for (int trial = 0; trial < 200; ++trial) {
            const double phi = u(rng), obj = a(rng), rot = a(rng) / 10;
            const double base = rotation_angle(phi, RotationDirection::Clockwise, obj, rot);
            for (int k : {-2, -1, 1, 3}) {
                const double shifted = rotation_angle(phi + 2 * kPi * k, RotationDirection::Clockwise, obj, rot);
                CHECK(std::abs(normalize_angle(shifted - base)) < 1e-9);
            }
            CHECK(base > -kPi);
            CHECK(base <= kPi);
        }
    }

    TEST_CASE("parameter validation") {
        CHECK_NOTHROW(validate(SteppingParams{}));
        SteppingParams p;
        p.k = 0;
        CHECK(throws_code(ErrorCode::InvalidParameter, [&] { validate(p); }));
        p = {};
        p.w = 1.2;
        CHECK(throws_code(ErrorCode::InvalidParameter, [&] { validate(p); }));
        p = {};
        p.angle_rot = 0;
        CHECK(throws_code(ErrorCode::InvalidParameter, [&] { validate(p); }));
    }

    TEST_CASE("tip affordance faces the grasp side") {
        const Polyline hook = stock::hook_shape();
        const AffordanceVector tip = tip_affordance(hook, {0, 0});
        CHECK(tip.segment_index == 1);
        CHECK(tip.direction.dx == doctest::Approx(-1.0));
        CHECK(tip.magnitude == doctest::Approx(0.04));
    }
}

TEST_SUITE("stepping_step") {
    // Lever of 0.1 along +x from the grasp, tip affordance along +y.
    const ToolAnalysis lever = manual_analysis({0.1, 0.0}, {0, 1});
    const Polyline bar{{{0, 0}, {0.1, 0}}};
    const SteppingContext ctx{&bar, GraspedTool{&lever, {0, 0}}, 5e-4};
    const ExitSpec exit_x{{1, 0}, 0.2, {0.4, 0.1}};

    SteppingState state_at(long tau, Pose2 ee, Point2 obj) {
        SteppingState s;
        s.tau = tau;
        s.ee_pose = ee;
        s.obj = obj;
        s.phi = controller_phi(ctx.tool, ee, true);
        s.angle_obj = 0.3;
        s.direction = RotationDirection::Anticlockwise;
        s.initial_side = -1.0;  // a_tip = +y, exit = +x
        return s;
    }

    TEST_CASE("reposition moves k of the gap with theta fixed") {
        // p* = ee + (0.1, 0); object 0.02 further along x.
        const SteppingState s = state_at(0, {{0.05, 0.1}, 0}, {0.17, 0.1});
        SteppingParams p;
        p.k = 0.5;
        const auto [cmd, next] = stepping_step(ctx, s, exit_x, p);
        CHECK(cmd.mode == StepMode::Reposition);
        CHECK(cmd.ee_pose.position.x - 0.05 == doctest::Approx(0.01));
        CHECK(cmd.ee_pose.position.y == doctest::Approx(0.1));
        CHECK(cmd.ee_pose.theta == 0.0);
        CHECK(next.tau == 1);
    }

    TEST_CASE("rotation-drag term with phi = 0") {
        const SteppingState s = state_at(1, {{0.05, 0.1}, 0}, {0.2, 0.1});
        REQUIRE(s.phi == doctest::Approx(0.0));
        SteppingParams p;
        p.w = 1.0;
        const auto [cmd, next] = stepping_step(ctx, s, exit_x, p);
        CHECK(cmd.mode == StepMode::RotationDrag);
        CHECK(cmd.ee_pose.position.x - 0.05 == doctest::Approx(0.05));
        CHECK(cmd.ee_pose.position.y - 0.1 == doctest::Approx(0.0).epsilon(1e-12));
        const double dphi = rotation_angle(0.0, s.direction, s.angle_obj, p.angle_rot);
        CHECK(normalize_angle(next.phi - s.phi) == doctest::Approx(dphi));
        CHECK(normalize_angle(cmd.ee_pose.theta - s.ee_pose.theta) == doctest::Approx(-dphi));
        CHECK(next.tau == 2);
    }

    TEST_CASE("guard fires when the tip is already parallel to the exit") {
        const ExitSpec up{{0, 1}, 0.2, {0.2, 0.3}};
        const SteppingState s = state_at(0, {{0.05, 0.1}, 0}, {0.2, 0.1});
        CHECK(stepping_aligned(ctx, s, up, {}));
        CHECK(throws_code(ErrorCode::AlreadyAligned, [&] { stepping_step(ctx, s, up, {}); }));
        const ExitSpec near{Vector2{std::sin(0.03), std::cos(0.03)}, 0.2, {0.2, 0.3}};
        CHECK(throws_code(ErrorCode::AlreadyAligned, [&] { stepping_step(ctx, s, near, {}); }));
    }

    TEST_CASE("commands alternate between translation and rotation") {
        SteppingState s = state_at(0, {{0.05, 0.1}, 0.2}, {0.2, 0.12});
        s.direction = RotationDirection::Clockwise;
        s.initial_side = -1.0;
        const ExitSpec far{{-1, 0}, 0.2, {0, 0}};
        SteppingParams p;
        p.angle_rot = 0.01;
        for (int i = 0; i < 6; ++i) {
            if (stepping_aligned(ctx, s, far, p)) break;
            const auto [cmd, next] = stepping_step(ctx, s, far, p);
            if (s.tau % 2 == 0) {
                CHECK(cmd.ee_pose.theta == s.ee_pose.theta);
            } else {
                const double dphi = rotation_angle(s.phi, s.direction, s.angle_obj, p.angle_rot);
                CHECK(std::abs(normalize_angle(cmd.ee_pose.theta - s.ee_pose.theta + dphi)) < 1e-9);
            }
            CHECK(next.tau == s.tau + 1);
            s = next;
            s.phi = controller_phi(ctx.tool, s.ee_pose, true);
        }
    }
}

TEST_SUITE("stepping_init") {
    const Polyline hook = stock::hook_shape();
    const double r_obj = 0.03;
    const std::vector<Segment2> u_wall{{{0, 0}, {0.4, 0}}, {{0, 0}, {0, 0.3}}, {{0.4, 0}, {0.4, 0.3}}};
    const Point2 block{0.2, 0.04};

    ToolAnalysis analysis_for_hook() {
        return analyze_tool_for(hook, r_obj, tip_affordance(hook, {0, 0}));
    }

    TEST_CASE("U-wall: tip parallel to the bottom wall, p* on the block") {
        const ToolAnalysis a = analysis_for_hook();
        const SteppingContext ctx{&hook, GraspedTool{&a, {0, 0}}, 5e-4};
        const ExitSpec exit = compute_exit(u_wall, {0.2, 0.1}, block);
        const SteppingState s = stepping_init(ctx, u_wall, exit, block, {});
        const Point2 t0 = ctx.tool.to_world(s.ee_pose, hook.points[1]);
        const Point2 t1 = ctx.tool.to_world(s.ee_pose, hook.points[2]);
        const double cross = (t1.x - t0.x) * 0.0 - (t1.y - t0.y) * 0.4;
        CHECK(std::abs(cross) < 1e-9);
        CHECK(oracle::dist(ctx.tool.p_star_world(s.ee_pose), block) < 1e-9);
        CHECK(s.tau == 0);
        CHECK(s.angle_obj >= 0.0);
        CHECK(s.angle_obj <= kPi);
        // Tip affordance faces away from the bottom wall.
        CHECK(tip_direction_world(ctx.tool, s.ee_pose).dy > 0.0);
        const double side = tip_direction_world(ctx.tool, s.ee_pose).cross(exit.direction);
        CHECK((s.direction == RotationDirection::Anticlockwise) == (side > 0.0));
    }

    TEST_CASE("direction follows the sign of cross(a_tip, v_exit)") {
        const ToolAnalysis a = analysis_for_hook();
        const SteppingContext ctx{&hook, GraspedTool{&a, {0, 0}}, 5e-4};
        const std::vector<Segment2> floor{{{-1, 0}, {1, 0}}};
        for (const double ang : {0.3, -0.3, 1.2, -1.2}) {
            const ExitSpec ex{Vector2{std::cos(ang), std::sin(ang)}, 0.3, {0, 0}};
            const SteppingState s = stepping_init(ctx, floor, ex, block, {});
            const double side = tip_direction_world(ctx.tool, s.ee_pose).cross(ex.direction);
            CHECK((s.direction == RotationDirection::Anticlockwise) == (side > 0.0));
        }
    }

    TEST_CASE("tool wider than the opening cannot enter") {
        const ToolAnalysis a = analysis_for_hook();
        const SteppingContext ctx{&hook, GraspedTool{&a, {0, 0}}, 5e-4};
        // 8 cm slot: the block fits, the 8 cm tip plus the shank offset does not.
        const std::vector<Segment2> slot{{{0.16, 0}, {0.24, 0}}, {{0.16, 0}, {0.16, 0.4}}, {{0.24, 0}, {0.24, 0.4}}};
        const Point2 small{0.2, 0.04};
        const ExitSpec exit = compute_exit(slot, {0.2, 0.1}, small);
        CHECK(throws_code(ErrorCode::CannotEnter, [&] { stepping_init(ctx, slot, exit, small, {}); }));
    }
}
