#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kScenes = SCENES_DIR;

fs::path scratch(const std::string& name) {
    const fs::path p = fs::path(SCRATCH_DIR) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// Runs tomctl with the given argument string; stdout goes to `out` when provided.
int tomctl(const std::string& args, const fs::path& out = "/dev/null", const std::string& env = "") {
    const std::string cmd = env + " \"" TOMCTL_PATH "\" " + args + " > \"" + out.string() + "\" 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string scene(const std::string& name) { return "\"" + (kScenes / (name + ".json")).string() + "\""; }

}  // namespace

TEST_CASE("analyze prints p* and a*") {
    const fs::path dir = scratch("analyze");
    REQUIRE(tomctl("analyze " + scene("tool_stick") + " --v-target 0 1 --svg " + (dir / "h.svg").string() + " --pgm " +
                       (dir / "g.pgm").string(),
                   dir / "out.json") == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "out.json"));
    CHECK(j.contains("p_star"));
    CHECK(j["a_star"]["direction"][1].get<double>() == doctest::Approx(1.0));
    CHECK(fs::file_size(dir / "h.svg") > 0);
    CHECK(slurp(dir / "g.pgm").rfind("P5\n", 0) == 0);
}

TEST_CASE("plan and run succeed on a stock scene") {
    const fs::path dir = scratch("run");
    REQUIRE(tomctl("plan " + scene("hook_right_to_left") + " -o " + (dir / "plan.json").string()) == 0);
    REQUIRE(tomctl("run " + scene("hook_right_to_left") + " --plan " + (dir / "plan.json").string() + " --out " +
                   (dir / "out").string() + " --svg-every 50") == 0);
    const std::string csv = slurp(dir / "out" / "run.csv");
    CHECK(csv.rfind("t,obj_x,obj_y,ee_left_x,ee_left_y,ee_left_th,ee_right_x,ee_right_y,ee_right_th,error_m,contact,seg_idx,mode\n", 0) == 0);
    const auto m = nlohmann::json::parse(slurp(dir / "out" / "metrics.json"));
    CHECK(m["schema_version"] == 1);
    CHECK(m["success"] == true);
    CHECK(m["final_error"].get<double>() <= 0.005);
    CHECK(fs::exists(dir / "out" / "trajectory.svg"));
    CHECK(fs::exists(dir / "out" / "frames" / "frame_00000.svg"));
}

TEST_CASE("global flags work after the subcommand") {
    const fs::path dir = scratch("gen");
    CHECK(tomctl("gen --count 5 --out " + (dir / "a").string() + " --seed 4") == 0);
    const auto summary = nlohmann::json::parse(slurp(dir / "a" / "summary.json"));
    CHECK(summary["seed"] == 4);
    CHECK(summary["pass"] == 5);
}

TEST_CASE("usage and input errors exit 2") {
    const fs::path dir = scratch("usage");
    CHECK(tomctl("") == 2);
    CHECK(tomctl("frobnicate") == 2);
    CHECK(tomctl("analyze " + scene("tool_stick") + " --grid-cell 0") == 2);
    CHECK(tomctl("gen --count 0 --out " + (dir / "g").string()) == 2);
    spit(dir / "broken.json", "{\"schema_version\": 1, \"scene\": {");
    CHECK(tomctl("plan " + (dir / "broken.json").string()) == 2);
    CHECK(tomctl("run " + scene("hook_right_to_left") + " --plan x --backend rules --out " + (dir / "o").string()) == 2);
}

TEST_CASE("geometry errors exit 3") {
    CHECK(tomctl("analyze " + scene("tool_stick") + " --v-target 0 0") == 3);
}

TEST_CASE("missing files exit 4") {
    CHECK(tomctl("plan /nonexistent/scene.json") == 4);
    CHECK(tomctl("analyze /nonexistent/tool.json") == 4);
}

TEST_CASE("unreachable block exits 5") {
    const fs::path dir = scratch("infeasible");
    auto j = nlohmann::json::parse(slurp(kScenes / "hook_right_to_left.json"));
    j["scene"]["block"]["center"] = {2.5, 2.5};
    spit(dir / "far.json", j.dump(2));
    CHECK(tomctl("plan " + (dir / "far.json").string()) == 5);
    CHECK(tomctl("run " + (dir / "far.json").string() + " --out " + (dir / "o").string()) == 5);
}

TEST_CASE("missing LLM backend exits 6") {
    CHECK(tomctl("plan " + scene("hook_right_to_left") + " --backend llm", "/dev/null", "env -u TOM_LLM_ENDPOINT") == 6);
    CHECK(tomctl("plan " + scene("hook_right_to_left") + " --backend llm", "/dev/null",
                 "env TOM_LLM_ENDPOINT=http://127.0.0.1:1/none") == 6);
}

TEST_CASE("exhausted step budget exits 7") {
    const fs::path dir = scratch("timeout");
    spit(dir / "cfg.json", R"({"schema_version": 1, "params": {"goal_tol": 1e-9, "step_budget": 200}})");
    CHECK(tomctl("--config " + (dir / "cfg.json").string() + " run " + scene("hook_right_to_left") + " --out " +
                 (dir / "o").string()) == 7);
    const auto m = nlohmann::json::parse(slurp(dir / "o" / "metrics.json"));
    CHECK(m["completed"] == false);
    CHECK(fs::exists(dir / "o" / "run.csv"));
}
