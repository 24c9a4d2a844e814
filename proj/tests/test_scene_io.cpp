#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "tom/scene_io.hpp"
#include "tom/stock.hpp"

using namespace tom;
namespace fs = std::filesystem;

namespace {

// Runs fn and returns the error it throws; fails the test if none.
Error caught(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e;
    }
    FAIL("expected an error");
    return Error(ErrorCode::InvalidParameter, "");
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

const char* kMinimal = R"({
  "schema_version": 1,
  "instruction": "push the block left",
  "scene": {
    "robots": [{"id": "right", "base": [0.45, 0.0], "reach": 0.55}],
    "tools": [{"id": "stick", "shape": [[0, 0], [0.3, 0]], "grasp_point": [0, 0],
               "home_pose": {"x": 0.35, "y": -0.12, "theta_deg": 90}}],
    "block": {"center": [0.4, 0.3], "radius": 0.03},
    "target": [0.25, 0.3]
  }
})";

std::string with(std::string text, const std::string& from, const std::string& to) {
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

fs::path scratch() {
    fs::create_directories(SCRATCH_DIR);
    return SCRATCH_DIR;
}

}  // namespace

TEST_SUITE("scene files") {
    TEST_CASE("minimal scene") {
        const LoadedScene s = parse_scene(kMinimal);
        CHECK(s.observation.robots.size() == 1);
        CHECK(s.observation.tools.size() == 1);
        CHECK(s.instruction == "push the block left");
        CHECK(s.observation.block.id == "block");
        CHECK(s.observation.tools[0].home_pose.theta == doctest::Approx(kPi / 2));
        CHECK(s.observation.target.has_value());
        CHECK_FALSE(s.observation.walls.has_value());
        CHECK(s.warnings.empty());
    }

    TEST_CASE("missing radius names the field") {
        const Error e = caught([] { parse_scene(with(kMinimal, R"(, "radius": 0.03)", "")); });
        CHECK(e.code() == ErrorCode::SchemaError);
        CHECK(contains(e.what(), "scene.block.radius"));
    }

    TEST_CASE("duplicate tool ids") {
        const std::string dup = with(kMinimal, R"("target")",
                                     R"("tools_extra": 0, "target")");
        // Unknown key first: strict mode rejects it.
        CHECK(caught([&] { parse_scene(dup); }).code() == ErrorCode::SchemaError);
        const std::string two = with(kMinimal, R"("theta_deg": 90}}])",
                                     R"("theta_deg": 90}}, {"id": "stick", "shape": [[0, 0], [0.2, 0]], "grasp_point": [0, 0],
                                         "home_pose": {"x": 0.3, "y": -0.12, "theta": 0}}])");
        const Error e = caught([&] { parse_scene(two); });
        CHECK(e.code() == ErrorCode::SchemaError);
        CHECK(contains(e.what(), "stick"));
    }

    TEST_CASE("lenient mode turns unknown keys into warnings") {
        const std::string extra = with(kMinimal, R"("instruction")", R"("colour": "red", "instruction")");
        const Error e = caught([&] { parse_scene(extra); });
        CHECK(contains(e.what(), "colour"));
        const LoadedScene s = parse_scene(extra, "<scene>", LoadOptions{true});
        REQUIRE(s.warnings.size() == 1);
        CHECK(contains(s.warnings[0], "colour"));
    }

    TEST_CASE("syntax errors carry line and column") {
        const std::string broken = "{\n  \"schema_version\": 1,\n  \"scene\": {\n    \"block\": [1, 2,,]\n  }\n}\n";
        const Error e = caught([&] { parse_scene(broken, "broken.json"); });
        CHECK(e.code() == ErrorCode::ParseError);
        CHECK(contains(e.what(), "broken.json:4:"));
    }

    TEST_CASE("schema version is checked") {
        CHECK(caught([] { parse_scene(with(kMinimal, R"("schema_version": 1)", R"("schema_version": 2)")); }).code() ==
              ErrorCode::SchemaError);
    }

    TEST_CASE("angle given twice is rejected") {
        const std::string both = with(kMinimal, R"("theta_deg": 90)", R"("theta_deg": 90, "theta": 1.0)");
        CHECK(caught([&] { parse_scene(both); }).code() == ErrorCode::SchemaError);
    }

    TEST_CASE("semantic problems are schema errors") {
        CHECK(caught([] { parse_scene(with(kMinimal, R"("radius": 0.03)", R"("radius": -1)")); }).code() ==
              ErrorCode::SchemaError);
        CHECK(caught([] { parse_scene(with(kMinimal, R"("id": "right")", R"("id": "middle")")); }).code() ==
              ErrorCode::SchemaError);
    }

    TEST_CASE("missing file is an I/O error") {
        CHECK(caught([] { load_scene("/nonexistent/dir/scene.json"); }).code() == ErrorCode::IoError);
    }

    TEST_CASE("params block overrides defaults") {
        const std::string p = with(kMinimal, R"("schema_version": 1,)",
                                   R"("schema_version": 1, "params": {"goal_tol": 0.002, "interact": {"k_int": 0.4},
                                      "stepping": {"angle_rot_deg": 5}},)");
        const LoadedScene s = parse_scene(p);
        CHECK(s.params.goal_tol == 0.002);
        CHECK(s.params.interact.k_int == 0.4);
        CHECK(s.params.stepping.angle_rot == doctest::Approx(5 * kPi / 180));
        const std::string bad = with(kMinimal, R"("schema_version": 1,)", R"("schema_version": 1, "params": {"goal_tol": 0},)");
        const Error e = caught([&] { parse_scene(bad); });
        CHECK(e.code() == ErrorCode::SchemaError);
        CHECK(contains(e.what(), "goal_tol"));
    }

    TEST_CASE("standalone params file") {
        ControllerParams p;
        apply_params_json(R"({"schema_version": 1, "params": {"step_budget": 50}})", "cfg", p, {});
        CHECK(p.step_budget == 50);
        apply_params_json(R"({"transit_step": 0.05})", "cfg", p, {});
        CHECK(p.transit_step == 0.05);
        CHECK(p.step_budget == 50);
    }

    TEST_CASE("every shipped scene loads") {
        int n = 0;
        for (const auto& entry : fs::directory_iterator(SCENES_DIR)) {
            const std::string name = entry.path().filename().string();
            if (name.rfind("tool_", 0) == 0) {
                CHECK_NOTHROW(load_tool(entry.path()));
            } else {
                CHECK_NOTHROW(load_scene(entry.path()));
            }
            ++n;
        }
        CHECK(n >= 10);
    }

    TEST_CASE("stock scenes round-trip") {
        for (const auto& s : stock::all_scenes()) {
            const std::string text = scene_to_json(s.observation, s.instruction);
            const LoadedScene back = parse_scene(text);
            CHECK_MESSAGE(back.observation == s.observation, s.name);
            CHECK(back.instruction == s.instruction);
            CHECK(scene_to_json(back.observation, back.instruction) == text);
        }
    }

    TEST_CASE("generated scenarios round-trip through files") {
        const fs::path dir = scratch();
        for (const auto& sc : generate_scenarios(3, 25)) {
            save_scene(dir / "rt.json", sc.observation, sc.instruction);
            const LoadedScene back = load_scene(dir / "rt.json");
            CHECK(back.observation == sc.observation);
        }
    }
}

TEST_SUITE("plan files") {
    TEST_CASE("round trip") {
        for (const auto& s : stock::all_scenes()) {
            const Plan p = plan_rule_based(embed(s.instruction, s.observation));
            CHECK(parse_plan_json(plan_to_json(p)) == p);
        }
    }

    TEST_CASE("malformed plans") {
        CHECK(caught([] { parse_plan_json(R"({"schema_version": 1, "steps": [{"fn": "dance", "arm": "left", "tool": "x"}]})"); })
                  .code() == ErrorCode::SchemaError);
        CHECK(caught([] { parse_plan_json(R"({"schema_version": 1, "steps": [{"fn": "grasp", "arm": "left"}]})"); }).code() ==
              ErrorCode::SchemaError);
        CHECK(caught([] { parse_plan_json("[1, 2"); }).code() == ErrorCode::ParseError);
    }

    TEST_CASE("file round trip") {
        const fs::path f = scratch() / "plan.json";
        const auto s = stock::dual_arm_shared_tool();
        const Plan p = plan_rule_based(embed(s.instruction, s.observation));
        write_text_file(f, plan_to_json(p));
        CHECK(load_plan(f) == p);
    }
}

TEST_SUITE("tool files") {
    TEST_CASE("standalone tool with defaults") {
        const ToolSpec t = parse_tool_file(R"({"schema_version": 1, "tool": {"shape": [[0.1, 0], [0.3, 0], [0.3, 0.1]]}})");
        CHECK(t.id == "tool");
        CHECK(t.grasp_point == Point2{0.1, 0});
        CHECK(t.shape.points.size() == 3);
    }

    TEST_CASE("tool picked out of a scene") {
        const std::string text = scene_to_json(stock::dual_arm_two_tools().observation, "x");
        CHECK(parse_tool_file(text, "s", "stick").id == "stick");
        CHECK(caught([&] { parse_tool_file(text, "s"); }).code() == ErrorCode::SchemaError);
        CHECK(caught([&] { parse_tool_file(text, "s", "spoon"); }).code() == ErrorCode::SchemaError);
    }

    TEST_CASE("degenerate tool shape") {
        CHECK(caught([] { parse_tool_file(R"({"schema_version": 1, "tool": {"shape": [[0, 0]]}})"); }).code() ==
              ErrorCode::SchemaError);
    }
}
