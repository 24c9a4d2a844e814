#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "tom/manoeuvrability.hpp"
#include "tom/planner.hpp"
#include "tom/render.hpp"
#include "tom/scene_io.hpp"
#include "tom/simworld.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tom;

namespace {

enum Exit : int {
    kOk = 0,
    kGoalMissed = 1,
    kUsage = 2,
    kGeometry = 3,
    kIo = 4,
    kInfeasible = 5,
    kBackend = 6,
    kTimeout = 7,
};

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidParameter:
        case ErrorCode::ParseError:
        case ErrorCode::SchemaError:
        case ErrorCode::MalformedPlanText:
        case ErrorCode::InvalidPlan:
        case ErrorCode::UnderspecifiedTask:
            return kUsage;
        case ErrorCode::DegenerateVector:
        case ErrorCode::DegenerateContour:
        case ErrorCode::AmbiguousProjection:
        case ErrorCode::AmbiguousInterior:
        case ErrorCode::NoExit:
        case ErrorCode::OutOfGrid:
        case ErrorCode::NoCandidate:
        case ErrorCode::AlreadyAligned:
        case ErrorCode::ContactJam:
            return kGeometry;
        case ErrorCode::IoError:
            return kIo;
        case ErrorCode::Infeasible:
        case ErrorCode::Unreachable:
        case ErrorCode::ToolTooShort:
        case ErrorCode::CannotEnter:
            return kInfeasible;
        case ErrorCode::BackendUnavailable:
            return kBackend;
        case ErrorCode::Timeout:
            return kTimeout;
    }
    return kUsage;
}

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    bool verbose = false;
    bool lenient = false;
};

Globals g;

void note(const std::string& msg) {
    if (g.verbose) std::cerr << "tomctl: " << msg << "\n";
}

// Defaults, then the scene's params block, then --config.
void apply_config(ControllerParams& params) {
    if (g.config.empty()) return;
    std::vector<std::string> warnings;
    apply_params_json(read_text_file(g.config), g.config, params, {g.lenient}, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    note("applied config " + g.config);
}

LoadedScene load_scene_checked(const std::string& path) {
    LoadedScene s = load_scene(path, {g.lenient});
    for (const auto& w : s.warnings) std::cerr << "warning: " << w << "\n";
    apply_config(s.params);
    return s;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create directory '" + dir.string() + "': " + ec.message());
}

json point_json(Point2 p) { return json::array({p.x, p.y}); }

json report_json(const ValidationReport& r) {
    json v = json::array();
    for (const auto& x : r.violations) v.push_back({{"step", x.step}, {"code", x.code}, {"message", x.message}});
    return {{"ok", r.ok()}, {"violations", v}, {"redundant_steps", r.redundant_steps}, {"terminal_reached", r.terminal_reached}};
}

struct PlanOutcome {
    Plan plan;
    std::optional<LlmResult> llm;
};

PlanOutcome make_plan(const Observation& obs, const std::string& instruction, const std::string& backend) {
    const PlanningRequest req = embed(instruction, obs);
    PlanOutcome out;
    if (backend == "llm") {
        const BackendConfig cfg = BackendConfig::from_env();
        note("querying planner backend at " + (cfg.endpoint.empty() ? std::string("<unset>") : cfg.endpoint));
        out.llm = plan_llm(req, cfg);
        out.plan = out.llm->plan;
        return out;
    }
    out.plan = plan_rule_based(req);
    const ValidationReport report = validate_plan(out.plan, obs);
    if (!report.ok()) throw Error(ErrorCode::InvalidPlan, "rule-based plan failed validation: " + report.summary());
    return out;
}

// analyze ------------------------------------------------------------------

struct AnalyzeArgs {
    std::string tool_file;
    std::string tool_id;
    double r_obj = 0.03;
    std::vector<double> v_target{0.0, 1.0};
    double grid_cell = 0.002;
    int grid_size = 0;
    std::string svg;
    std::string pgm;
    double scale = 2000.0;
    int repeat = 1;
};

int cmd_analyze(const AnalyzeArgs& a) {
    const ToolSpec tool = load_tool(a.tool_file, a.tool_id);
    if (!(a.grid_cell > 0.0)) throw Error(ErrorCode::InvalidParameter, "--grid-cell must be positive");
    if (!(a.r_obj > 0.0)) throw Error(ErrorCode::InvalidParameter, "--r-obj must be positive");
    if (a.grid_size < 0) throw Error(ErrorCode::InvalidParameter, "--grid-size must be non-negative");
    if (a.repeat < 1) throw Error(ErrorCode::InvalidParameter, "--repeat must be at least 1");

    ControllerParams params;
    apply_config(params);
    AnalysisParams ap = params.analysis;
    ap.cell_size = a.grid_cell;
    if (a.grid_size > 0) {
        // Square N x N grid over the same window the fitted grid would use.
        const GridSpec fit = grid_for_tool(tool.shape, a.grid_cell, ap.grid_margin + a.r_obj);
        const double side = std::max(fit.width, fit.height) * fit.cell_size;
        GridSpec spec;
        spec.cell_size = side / a.grid_size;
        spec.width = spec.height = a.grid_size;
        spec.origin = {fit.origin.x + 0.5 * (fit.width * fit.cell_size - side),
                       fit.origin.y + 0.5 * (fit.height * fit.cell_size - side)};
        ap.grid = spec;
    }

    const Vector2 v{a.v_target[0], a.v_target[1]};
    ToolAnalysis result;
    std::vector<double> times;
    for (int i = 0; i < a.repeat; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        result = analyze_tool(tool.shape, a.r_obj, v, ap);
        times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    std::sort(times.begin(), times.end());
    const double p50 = times[times.size() / 2];
    note("analysis p50 " + std::to_string(p50 * 1e3) + " ms over " + std::to_string(a.repeat) + " run(s)");

    if (!a.svg.empty()) write_render({a.svg, RenderKind::GridHeatmap, a.scale}, svg_grid_heatmap(tool.shape, result, a.scale));
    if (!a.pgm.empty()) write_text_file(a.pgm, pgm_grid(result.grid));

    json keypoints = json::array(), filtered = json::array();
    for (const auto& p : result.keypoints) keypoints.push_back(point_json(p));
    for (const auto& p : result.filtered) filtered.push_back(point_json(p));
    const AffordanceVector& s = result.a_star;
    json out = {
        {"tool", tool.id},
        {"r_obj", a.r_obj},
        {"p_star", point_json(result.p_star)},
        {"a_star",
         {{"origin", point_json(s.origin)},
          {"direction", json::array({s.direction.dx, s.direction.dy})},
          {"magnitude", s.magnitude},
          {"segment", s.segment_index},
          {"side", to_string(s.side)}}},
        {"keypoints", keypoints},
        {"filtered", filtered},
        {"grid",
         {{"width", result.grid.spec.width},
          {"height", result.grid.spec.height},
          {"cell_size", result.grid.spec.cell_size},
          {"origin", point_json(result.grid.spec.origin)}}},
    };
    if (a.repeat > 1) out["timing_p50_s"] = p50;
    std::cout << out.dump(2) << "\n";
    return kOk;
}

// plan ---------------------------------------------------------------------

struct PlanArgs {
    std::string scene;
    std::string instruction;
    std::string backend = "rules";
    std::string out;
};

int cmd_plan(const PlanArgs& a) {
    const LoadedScene scene = load_scene_checked(a.scene);
    const std::string instruction = a.instruction.empty() ? scene.instruction : a.instruction;
    const PlanOutcome outcome = make_plan(scene.observation, instruction, a.backend);
    const std::string plan_text = plan_to_json(outcome.plan);
    if (!a.out.empty()) write_text_file(a.out, plan_text);
    if (outcome.llm) {
        const json out = {{"plan", json::parse(plan_text)},
                          {"validation", report_json(outcome.llm->report)},
                          {"raw_text", outcome.llm->raw_text}};
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << plan_text;
    }
    note("plan has " + std::to_string(outcome.plan.steps.size()) + " steps");
    return kOk;
}

// run ----------------------------------------------------------------------

struct RunArgs {
    std::string scene;
    std::string plan;
    std::string backend = "rules";
    std::string instruction;
    std::string out;
    int svg_every = 0;
    double scale = 800.0;
};

json metrics_json(const RunResult& r, const ControllerParams& params) {
    const Metrics m = metrics(r.log, r.wall_clock_s);
    json hist = json::array();
    for (const auto& [key, count] : m.segment_contact_histogram) {
        hist.push_back({{"segment", key.segment}, {"side", to_string(key.side)}, {"count", count}});
    }
    json out = {
        {"schema_version", kSchemaVersion},
        {"completed", r.completed},
        {"success", r.success},
        {"final_error", m.error_series.empty() ? 0.0 : m.error_series.back()},
        {"goal_tol", params.goal_tol},
        {"steps", m.steps},
        {"wall_clock_s", m.wall_clock_s},
        {"contact_transitions", m.contact_transitions},
        {"segment_contact_histogram", hist},
        {"error_series", m.error_series},
        {"contact_series", m.contact_series},
    };
    if (r.error) {
        out["error"] = {{"code", std::string(to_string(*r.error))}, {"message", r.message}, {"step", r.failed_step}};
    }
    if (g.seed) out["seed"] = *g.seed;
    return out;
}

int cmd_run(const RunArgs& a) {
    if (a.svg_every < 0) throw Error(ErrorCode::InvalidParameter, "--svg-every must be non-negative");
    if (!(a.scale > 0.0)) throw Error(ErrorCode::InvalidParameter, "--scale must be positive");
    const LoadedScene scene = load_scene_checked(a.scene);
    validate(scene.params);
    Plan plan;
    if (!a.plan.empty()) {
        plan = load_plan(a.plan);
    } else {
        plan = make_plan(scene.observation, a.instruction.empty() ? scene.instruction : a.instruction, a.backend).plan;
    }
    const fs::path out_dir = a.out;
    ensure_dir(out_dir);

    const RunResult r = run_plan(scene.observation, plan, scene.params);
    note("run finished: " + std::to_string(r.log.frames.size()) + " frames, success=" + (r.success ? "yes" : "no"));

    // Artifacts are written even for failed runs so partial progress can be inspected.
    write_text_file(out_dir / "run.csv", r.log.to_csv());
    if (!r.log.frames.empty()) write_text_file(out_dir / "metrics.json", metrics_json(r, scene.params).dump(2) + "\n");
    write_render({out_dir / "trajectory.svg", RenderKind::TrajectoryOverlay, a.scale},
                 svg_trajectory_overlay(scene.observation, r.log, a.scale));
    if (a.svg_every > 0) {
        const fs::path frames_dir = out_dir / "frames";
        ensure_dir(frames_dir);
        const Bounds view = scene_bounds(scene.observation, &r.log);
        for (std::size_t i = 0; i < r.log.frames.size(); i += static_cast<std::size_t>(a.svg_every)) {
            char name[32];
            std::snprintf(name, sizeof name, "frame_%05zu.svg", i);
            write_render({frames_dir / name, RenderKind::SceneFrame, a.scale},
                         svg_scene_frame(scene.observation, r.log.frames[i], a.scale, view));
        }
    }

    if (r.error) {
        std::cerr << "error [" << to_string(*r.error) << "]: " << r.message << "\n";
        return exit_code_for(*r.error);
    }
    if (!r.success) {
        std::cerr << "error: plan completed but the goal was not reached\n";
        return kGoalMissed;
    }
    return kOk;
}

// gen ----------------------------------------------------------------------

struct GenArgs {
    int count = 10;
    std::string out;
};

int cmd_gen(const GenArgs& a) {
    if (a.count < 1) throw Error(ErrorCode::InvalidParameter, "--count must be at least 1");
    const std::uint64_t seed = g.seed.value_or(1);
    const fs::path out_dir = a.out;
    ensure_dir(out_dir);
    const std::vector<Scenario> scenarios = generate_scenarios(seed, a.count);

    int pass = 0;
    json failures = json::array();
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        const Scenario& s = scenarios[i];
        char stem[32];
        std::snprintf(stem, sizeof stem, "%04zu", i);
        json scene = json::parse(scene_to_json(s.observation, s.instruction));
        scene["seed"] = s.seed;
        write_text_file(out_dir / (std::string("scenario_") + stem + ".json"), scene.dump(2) + "\n");
        write_text_file(out_dir / (std::string("plan_") + stem + ".json"), plan_to_json(s.expected_plan));

        // The planner runs fresh from the embedding, so this checks more than the stored plan.
        try {
            const Plan plan = plan_rule_based(embed(s.instruction, s.observation));
            const ValidationReport report = validate_plan(plan, s.observation);
            if (report.ok() && plan == s.expected_plan) {
                ++pass;
            } else {
                failures.push_back({{"index", i}, {"reason", report.ok() ? "plan differs from expected" : report.summary()}});
            }
        } catch (const Error& e) {
            failures.push_back({{"index", i}, {"reason", e.what()}});
        }
    }
    const json summary = {{"schema_version", kSchemaVersion}, {"seed", seed},       {"count", a.count},
                          {"pass", pass},                    {"fail", a.count - pass}, {"failures", failures}};
    write_text_file(out_dir / "summary.json", summary.dump(2) + "\n");
    std::cout << summary.dump() << "\n";
    return pass == a.count ? kOk : kInfeasible;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tool-use manipulation toolkit: analysis, planning and simulation"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", "tomctl 1.0");
    app.add_option("--config", g.config, "JSON file with controller parameter overrides");
    app.add_option("--seed", g.seed, "Random seed (scenario generation)");
    app.add_flag("-v,--verbose", g.verbose, "Log progress to stderr");
    app.add_flag("--lenient", g.lenient, "Warn on unknown JSON keys instead of rejecting them");

    AnalyzeArgs aa;
    auto* analyze = app.add_subcommand("analyze", "Affordance and manoeuvrability analysis of a tool");
    analyze->add_option("tool", aa.tool_file, "Tool JSON file (or a scene file)")->required();
    analyze->add_option("--tool-id", aa.tool_id, "Tool to analyze when the file is a scene");
    analyze->add_option("--r-obj", aa.r_obj, "Object radius in meters");
    analyze->add_option("--v-target", aa.v_target, "Desired push direction x y")->expected(2);
    analyze->add_option("--grid-cell", aa.grid_cell, "Grid cell size in meters");
    analyze->add_option("--grid-size", aa.grid_size, "Force an N x N grid (overrides --grid-cell)");
    analyze->add_option("--svg", aa.svg, "Write the grid heatmap as SVG");
    analyze->add_option("--pgm", aa.pgm, "Write the grid heatmap as PGM");
    analyze->add_option("--scale", aa.scale, "SVG pixels per meter");
    analyze->add_option("--repeat", aa.repeat, "Repeat the analysis and report the median time");

    PlanArgs pa;
    auto* plan = app.add_subcommand("plan", "Decompose the scene instruction into motion functions");
    plan->add_option("scene", pa.scene, "Scene JSON file")->required();
    plan->add_option("--instruction", pa.instruction, "Override the scene's instruction");
    plan->add_option("--backend", pa.backend, "Planner backend")->check(CLI::IsMember({"rules", "llm"}));
    plan->add_option("-o,--out", pa.out, "Also write the plan JSON here");

    RunArgs ra;
    auto* run = app.add_subcommand("run", "Plan (or load a plan) and execute it in the simulator");
    run->add_option("scene", ra.scene, "Scene JSON file")->required();
    auto* plan_opt = run->add_option("--plan", ra.plan, "Plan JSON file");
    run->add_option("--backend", ra.backend, "Planner backend when no --plan is given")
        ->check(CLI::IsMember({"rules", "llm"}))
        ->excludes(plan_opt);
    run->add_option("--instruction", ra.instruction, "Override the scene's instruction");
    run->add_option("--out", ra.out, "Output directory")->required();
    run->add_option("--svg-every", ra.svg_every, "Write a frame SVG every N frames (0 = none)");
    run->add_option("--scale", ra.scale, "SVG pixels per meter");

    GenArgs ga;
    auto* gen = app.add_subcommand("gen", "Generate random planning scenarios with expected plans");
    gen->add_option("--count", ga.count, "Number of scenarios");
    gen->add_option("--out", ga.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*analyze) return cmd_analyze(aa);
        if (*plan) return cmd_plan(pa);
        if (*run) return cmd_run(ra);
        if (*gen) return cmd_gen(ga);
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
