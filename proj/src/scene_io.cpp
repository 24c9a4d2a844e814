#include "tom/scene_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace tom {

using nlohmann::json;

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw Error(ErrorCode::IoError, "failed reading '" + path.string() + "'");
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

namespace {

json parse_json(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into a line/column pair.
        std::size_t line = 1, col = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw Error(ErrorCode::ParseError,
                    origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON (" + e.what() + ")");
    }
}

class Reader {
public:
    Reader(std::string origin, const LoadOptions& opts, std::vector<std::string>* warnings)
        : origin_(std::move(origin)), opts_(opts), warnings_(warnings) {}

    [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
        throw Error(ErrorCode::SchemaError, origin_ + ": " + path + ": " + msg);
    }

    void object(const json& v, const std::string& path) const {
        if (!v.is_object()) fail(path, "expected an object");
    }

    void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) const {
        const std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [key, _] : obj.items()) {
            if (ok.count(key)) continue;
            const std::string where = path.empty() ? key : path + "." + key;
            if (!opts_.lenient) fail(where, "unknown key");
            if (warnings_) warnings_->push_back(origin_ + ": " + where + ": unknown key ignored");
        }
    }

    const json& require(const json& obj, const std::string& path, const char* key) const {
        if (!obj.contains(key)) fail(path.empty() ? key : path + "." + key, "missing required field");
        return obj.at(key);
    }

    double number(const json& v, const std::string& path) const {
        if (!v.is_number()) fail(path, "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail(path, "expected a finite number");
        return x;
    }

    int integer(const json& v, const std::string& path) const {
        if (!v.is_number_integer()) fail(path, "expected an integer");
        return v.get<int>();
    }

    bool boolean(const json& v, const std::string& path) const {
        if (!v.is_boolean()) fail(path, "expected true or false");
        return v.get<bool>();
    }

    std::string string(const json& v, const std::string& path) const {
        if (!v.is_string()) fail(path, "expected a string");
        return v.get<std::string>();
    }

    Point2 point(const json& v, const std::string& path) const {
        if (!v.is_array() || v.size() != 2) fail(path, "expected [x, y]");
        return {number(v[0], path + "[0]"), number(v[1], path + "[1]")};
    }

    // Radian key or its "_deg" twin; never both.
    std::optional<double> angle(const json& obj, const std::string& path, const std::string& key) const {
        const std::string deg = key + "_deg";
        const bool has_rad = obj.contains(key), has_deg = obj.contains(deg);
        if (has_rad && has_deg) fail(path + "." + key, "give either '" + key + "' or '" + deg + "', not both");
        if (has_rad) return number(obj.at(key), path + "." + key);
        if (has_deg) return number(obj.at(deg), path + "." + deg) * kPi / 180.0;
        return std::nullopt;
    }

    Pose2 pose(const json& v, const std::string& path) const {
        object(v, path);
        check_keys(v, path, {"x", "y", "theta", "theta_deg"});
        const auto th = angle(v, path, "theta");
        if (!th) fail(path + ".theta", "missing required field");
        return {{number(require(v, path, "x"), path + ".x"), number(require(v, path, "y"), path + ".y")}, *th};
    }

private:
    std::string origin_;
    const LoadOptions& opts_;
    std::vector<std::string>* warnings_;
};

void read_schema_version(const Reader& r, const json& doc) {
    const json& v = r.require(doc, "", "schema_version");
    if (r.integer(v, "schema_version") != kSchemaVersion) {
        r.fail("schema_version", "unsupported version " + v.dump() + " (expected " + std::to_string(kSchemaVersion) + ")");
    }
}

ToolSpec read_tool(const Reader& r, const json& j, const std::string& p, bool full) {
    r.object(j, p);
    r.check_keys(j, p, {"id", "shape", "grasp_point", "home_pose", "hook"});
    ToolSpec t;
    t.id = full || j.contains("id") ? r.string(r.require(j, p, "id"), p + ".id") : "tool";
    if (t.id.empty()) r.fail(p + ".id", "must be non-empty");
    const json& shape = r.require(j, p, "shape");
    if (!shape.is_array() || shape.size() < 2) r.fail(p + ".shape", "expected at least two [x, y] points");
    for (std::size_t k = 0; k < shape.size(); ++k) {
        t.shape.points.push_back(r.point(shape[k], p + ".shape[" + std::to_string(k) + "]"));
    }
    try {
        validate(t.shape);
    } catch (const Error& e) {
        r.fail(p + ".shape", e.what());
    }
    // Standalone tool files may omit placement; grasp defaults to the first vertex.
    t.grasp_point = full || j.contains("grasp_point") ? r.point(r.require(j, p, "grasp_point"), p + ".grasp_point")
                                                     : t.shape.points.front();
    if (full || j.contains("home_pose")) t.home_pose = r.pose(r.require(j, p, "home_pose"), p + ".home_pose");
    if (j.contains("hook")) t.hook = r.boolean(j.at("hook"), p + ".hook");
    return t;
}

Observation read_observation(const Reader& r, const json& scene) {
    const std::string sp = "scene";
    r.object(scene, sp);
    r.check_keys(scene, sp, {"robots", "tools", "block", "walls", "target"});
    Observation obs;

    const json& robots = r.require(scene, sp, "robots");
    if (!robots.is_array()) r.fail(sp + ".robots", "expected an array");
    for (std::size_t i = 0; i < robots.size(); ++i) {
        const std::string p = sp + ".robots[" + std::to_string(i) + "]";
        const json& j = robots[i];
        r.object(j, p);
        r.check_keys(j, p, {"id", "base", "reach"});
        RobotSpec rs;
        const std::string id = r.string(r.require(j, p, "id"), p + ".id");
        const auto arm = parse_arm(id);
        if (!arm) r.fail(p + ".id", "robot id must be 'left' or 'right'");
        rs.id = *arm;
        rs.base = r.point(r.require(j, p, "base"), p + ".base");
        rs.reach = r.number(r.require(j, p, "reach"), p + ".reach");
        if (!(rs.reach > 0.0)) r.fail(p + ".reach", "must be positive");
        for (const auto& other : obs.robots) {
            if (other.id == rs.id) r.fail(p + ".id", "duplicate robot id '" + id + "'");
        }
        obs.robots.push_back(rs);
    }

    const json& tools = r.require(scene, sp, "tools");
    if (!tools.is_array()) r.fail(sp + ".tools", "expected an array");
    for (std::size_t i = 0; i < tools.size(); ++i) {
        const std::string p = sp + ".tools[" + std::to_string(i) + "]";
        const json& j = tools[i];
        r.object(j, p);
        ToolSpec t = read_tool(r, j, p, true);
        for (const auto& other : obs.tools) {
            if (other.id == t.id) r.fail(p + ".id", "duplicate tool id '" + t.id + "'");
        }
        obs.tools.push_back(std::move(t));
    }

    const std::string bp = sp + ".block";
    const json& block = r.require(scene, sp, "block");
    r.object(block, bp);
    r.check_keys(block, bp, {"id", "center", "radius"});
    if (block.contains("id")) obs.block.id = r.string(block.at("id"), bp + ".id");
    obs.block.center = r.point(r.require(block, bp, "center"), bp + ".center");
    obs.block.radius = r.number(r.require(block, bp, "radius"), bp + ".radius");
    if (!(obs.block.radius > 0.0)) r.fail(bp + ".radius", "must be positive");

    if (scene.contains("walls")) {
        const std::string wp = sp + ".walls";
        const json& walls = scene.at("walls");
        r.object(walls, wp);
        r.check_keys(walls, wp, {"segments", "interior_hint"});
        WallSet ws;
        const json& segs = r.require(walls, wp, "segments");
        if (!segs.is_array() || segs.empty()) r.fail(wp + ".segments", "expected a non-empty array");
        for (std::size_t k = 0; k < segs.size(); ++k) {
            const std::string p = wp + ".segments[" + std::to_string(k) + "]";
            if (!segs[k].is_array() || segs[k].size() != 2) r.fail(p, "expected [[x, y], [x, y]]");
            Segment2 s{r.point(segs[k][0], p + "[0]"), r.point(segs[k][1], p + "[1]")};
            if (s.length() <= 1e-9) r.fail(p, "wall segment has zero length");
            ws.segments.push_back(s);
        }
        ws.interior_hint = r.point(r.require(walls, wp, "interior_hint"), wp + ".interior_hint");
        obs.walls = std::move(ws);
    }
    if (scene.contains("target")) obs.target = r.point(scene.at("target"), sp + ".target");
    return obs;
}

void read_params(const Reader& r, const json& j, const std::string& path, ControllerParams& p) {
    r.object(j, path);
    r.check_keys(j, path, {"goal_tol", "step_budget", "stepping_budget", "transit_step", "transit_rot", "transit_rot_deg",
                           "extract_step", "substep_len", "contact_eps", "interact", "stepping", "analysis"});
    auto num = [&](const json& o, const std::string& base, const char* key, double& out) {
        if (o.contains(key)) out = r.number(o.at(key), base + "." + key);
    };
    auto integer = [&](const json& o, const std::string& base, const char* key, int& out) {
        if (o.contains(key)) out = r.integer(o.at(key), base + "." + key);
    };
    auto ang = [&](const json& o, const std::string& base, const char* key, double& out) {
        if (const auto a = r.angle(o, base, key)) out = *a;
    };
    num(j, path, "goal_tol", p.goal_tol);
    integer(j, path, "step_budget", p.step_budget);
    integer(j, path, "stepping_budget", p.stepping_budget);
    num(j, path, "transit_step", p.transit_step);
    ang(j, path, "transit_rot", p.transit_rot);
    num(j, path, "extract_step", p.extract_step);
    num(j, path, "substep_len", p.substep_len);
    num(j, path, "contact_eps", p.contact_eps);
    if (j.contains("interact")) {
        const std::string ip = path + ".interact";
        const json& o = j.at("interact");
        r.object(o, ip);
        r.check_keys(o, ip, {"k_int", "pos_tol", "rot_rate", "rot_rate_deg"});
        num(o, ip, "k_int", p.interact.k_int);
        num(o, ip, "pos_tol", p.interact.pos_tol);
        ang(o, ip, "rot_rate", p.interact.rot_rate);
    }
    if (j.contains("stepping")) {
        const std::string stp = path + ".stepping";
        const json& o = j.at("stepping");
        r.object(o, stp);
        r.check_keys(o, stp, {"k", "w", "angle_rot", "angle_rot_deg", "parallel_tol", "parallel_tol_deg", "strict_signs"});
        num(o, stp, "k", p.stepping.k);
        num(o, stp, "w", p.stepping.w);
        ang(o, stp, "angle_rot", p.stepping.angle_rot);
        ang(o, stp, "parallel_tol", p.stepping.parallel_tol);
        if (o.contains("strict_signs")) {
            p.stepping.strict_signs = r.boolean(o.at("strict_signs"), stp + ".strict_signs");
        }
    }
    if (j.contains("analysis")) {
        const std::string ap = path + ".analysis";
        const json& o = j.at("analysis");
        r.object(o, ap);
        r.check_keys(o, ap, {"cell_size", "sigma_frac", "kappa_thresh_factor", "rdp_eps_factor", "cluster_eps_factor",
                             "cluster_min_pts", "smoothing_window", "resample_step", "arc_tol", "grid_margin"});
        auto& a = p.analysis;
        num(o, ap, "cell_size", a.cell_size);
        num(o, ap, "sigma_frac", a.sigma_frac);
        num(o, ap, "kappa_thresh_factor", a.kappa_thresh_factor);
        num(o, ap, "rdp_eps_factor", a.rdp_eps_factor);
        num(o, ap, "cluster_eps_factor", a.cluster_eps_factor);
        integer(o, ap, "cluster_min_pts", a.cluster_min_pts);
        integer(o, ap, "smoothing_window", a.smoothing_window);
        num(o, ap, "resample_step", a.resample_step);
        num(o, ap, "arc_tol", a.arc_tol);
        num(o, ap, "grid_margin", a.grid_margin);
    }
    try {
        validate(p);
    } catch (const Error& e) {
        r.fail(path, e.what());
    }
}

json point_json(Point2 p) { return json::array({p.x, p.y}); }

}  // namespace

LoadedScene parse_scene(const std::string& text, const std::string& origin, const LoadOptions& opts) {
    LoadedScene out;
    const json doc = parse_json(text, origin);
    const Reader r(origin, opts, &out.warnings);
    r.object(doc, "(root)");
    r.check_keys(doc, "", {"schema_version", "scene", "instruction", "params", "seed"});
    read_schema_version(r, doc);
    out.observation = read_observation(r, r.require(doc, "", "scene"));
    if (doc.contains("instruction")) out.instruction = r.string(doc.at("instruction"), "instruction");
    if (doc.contains("params")) read_params(r, doc.at("params"), "params", out.params);
    try {
        validate(out.observation);
    } catch (const Error& e) {
        r.fail("scene", e.what());
    }
    return out;
}

LoadedScene load_scene(const std::filesystem::path& path, const LoadOptions& opts) {
    return parse_scene(read_text_file(path), path.string(), opts);
}

void apply_params_json(const std::string& text, const std::string& origin, ControllerParams& params,
                       const LoadOptions& opts, std::vector<std::string>* warnings) {
    const json doc = parse_json(text, origin);
    const Reader r(origin, opts, warnings);
    r.object(doc, "(root)");
    // Config files may wrap the overrides in {"schema_version": 1, "params": {...}}.
    if (doc.contains("params")) {
        r.check_keys(doc, "", {"schema_version", "params"});
        if (doc.contains("schema_version")) read_schema_version(r, doc);
        read_params(r, doc.at("params"), "params", params);
    } else {
        read_params(r, doc, "(root)", params);
    }
}

std::string scene_to_json(const Observation& obs, const std::string& instruction, int indent) {
    json scene;
    json robots = json::array();
    for (const auto& r : obs.robots) robots.push_back({{"id", to_string(r.id)}, {"base", point_json(r.base)}, {"reach", r.reach}});
    scene["robots"] = robots;
    json tools = json::array();
    for (const auto& t : obs.tools) {
        json shape = json::array();
        for (const auto& p : t.shape.points) shape.push_back(point_json(p));
        tools.push_back({{"id", t.id},
                         {"shape", shape},
                         {"grasp_point", point_json(t.grasp_point)},
                         {"home_pose", {{"x", t.home_pose.position.x}, {"y", t.home_pose.position.y}, {"theta", t.home_pose.theta}}},
                         {"hook", t.hook}});
    }
    scene["tools"] = tools;
    scene["block"] = {{"id", obs.block.id}, {"center", point_json(obs.block.center)}, {"radius", obs.block.radius}};
    if (obs.walls) {
        json segs = json::array();
        for (const auto& s : obs.walls->segments) segs.push_back(json::array({point_json(s.a), point_json(s.b)}));
        scene["walls"] = {{"segments", segs}, {"interior_hint", point_json(obs.walls->interior_hint)}};
    }
    if (obs.target) scene["target"] = point_json(*obs.target);
    const json doc = {{"schema_version", kSchemaVersion}, {"scene", scene}, {"instruction", instruction}};
    return doc.dump(indent) + "\n";
}

void save_scene(const std::filesystem::path& path, const Observation& obs, const std::string& instruction) {
    write_text_file(path, scene_to_json(obs, instruction));
}

std::string plan_to_json(const Plan& plan, int indent) {
    json steps = json::array();
    for (const auto& f : plan.steps) {
        json s = {{"fn", to_string(f.kind)}, {"arm", to_string(f.arm)}, {"tool", f.tool}};
        if (f.kind != FnKind::Grasp && f.kind != FnKind::Release) s["object"] = f.object;
        if (f.kind == FnKind::Interact) s["goal"] = to_string(f.goal);
        if (f.kind == FnKind::Pass) s["to"] = to_string(f.arm2);
        steps.push_back(s);
    }
    const json doc = {{"schema_version", kSchemaVersion}, {"steps", steps}};
    return doc.dump(indent) + "\n";
}

Plan parse_plan_json(const std::string& text, const std::string& origin) {
    const json doc = parse_json(text, origin);
    const LoadOptions strict;
    const Reader r(origin, strict, nullptr);
    r.object(doc, "(root)");
    r.check_keys(doc, "", {"schema_version", "steps"});
    read_schema_version(r, doc);
    const json& steps = r.require(doc, "", "steps");
    if (!steps.is_array()) r.fail("steps", "expected an array");
    Plan plan;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const std::string p = "steps[" + std::to_string(i) + "]";
        const json& j = steps[i];
        r.object(j, p);
        r.check_keys(j, p, {"fn", "arm", "tool", "object", "goal", "to"});
        MotionFunction f;
        const std::string fn = r.string(r.require(j, p, "fn"), p + ".fn");
        const auto kind = parse_fn_kind(fn);
        if (!kind) r.fail(p + ".fn", "unknown motion function '" + fn + "'");
        f.kind = *kind;
        const std::string arm = r.string(r.require(j, p, "arm"), p + ".arm");
        if (!parse_arm(arm)) r.fail(p + ".arm", "arm must be 'left' or 'right'");
        f.arm = *parse_arm(arm);
        f.tool = r.string(r.require(j, p, "tool"), p + ".tool");
        if (f.kind != FnKind::Grasp && f.kind != FnKind::Release) f.object = r.string(r.require(j, p, "object"), p + ".object");
        if (f.kind == FnKind::Interact) {
            const std::string goal = r.string(r.require(j, p, "goal"), p + ".goal");
            if (goal == "target") f.goal = GoalKind::Target;
            else if (goal == "handover") f.goal = GoalKind::Handover;
            else r.fail(p + ".goal", "goal must be 'target' or 'handover'");
        }
        if (f.kind == FnKind::Pass) {
            const std::string to = r.string(r.require(j, p, "to"), p + ".to");
            if (!parse_arm(to)) r.fail(p + ".to", "arm must be 'left' or 'right'");
            f.arm2 = *parse_arm(to);
        }
        plan.steps.push_back(std::move(f));
    }
    return plan;
}

Plan load_plan(const std::filesystem::path& path) { return parse_plan_json(read_text_file(path), path.string()); }

ToolSpec parse_tool_file(const std::string& text, const std::string& origin, const std::string& tool_id) {
    const json doc = parse_json(text, origin);
    const LoadOptions strict;
    const Reader r(origin, strict, nullptr);
    r.object(doc, "(root)");
    if (doc.contains("scene")) {
        const LoadedScene scene = parse_scene(text, origin, strict);
        const auto& tools = scene.observation.tools;
        if (tool_id.empty()) {
            if (tools.size() != 1) r.fail("scene.tools", "scene has " + std::to_string(tools.size()) + " tools; name one");
            return tools.front();
        }
        if (const ToolSpec* t = scene.observation.tool(tool_id)) return *t;
        r.fail("scene.tools", "no tool with id '" + tool_id + "'");
    }
    r.check_keys(doc, "", {"schema_version", "tool"});
    read_schema_version(r, doc);
    ToolSpec t = read_tool(r, r.require(doc, "", "tool"), "tool", false);
    if (!tool_id.empty() && t.id != tool_id) r.fail("tool.id", "expected tool '" + tool_id + "', found '" + t.id + "'");
    return t;
}

ToolSpec load_tool(const std::filesystem::path& path, const std::string& tool_id) {
    return parse_tool_file(read_text_file(path), path.string(), tool_id);
}

}  // namespace tom
