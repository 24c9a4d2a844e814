#include "tom/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

#include "tom/scene_io.hpp"

namespace tom {

const char* to_string(RenderKind kind) {
    switch (kind) {
        case RenderKind::SceneFrame: return "scene_frame";
        case RenderKind::GridHeatmap: return "grid_heatmap";
        case RenderKind::TrajectoryOverlay: return "trajectory_overlay";
    }
    return "scene_frame";
}

std::optional<RenderKind> parse_render_kind(std::string_view text) {
    for (auto k : {RenderKind::SceneFrame, RenderKind::GridHeatmap, RenderKind::TrajectoryOverlay}) {
        if (text == to_string(k)) return k;
    }
    return std::nullopt;
}

void validate(const RenderSpec& spec) {
    if (!(spec.scale > 0.0) || !std::isfinite(spec.scale)) {
        throw Error(ErrorCode::InvalidParameter, "render scale must be a positive number of pixels per meter");
    }
    if (spec.output.empty()) throw Error(ErrorCode::InvalidParameter, "render output path is empty");
}

void Bounds::include(Point2 p) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
}

void Bounds::include(Point2 p, double r) {
    include(Point2{p.x - r, p.y - r});
    include(Point2{p.x + r, p.y + r});
}

Bounds Bounds::padded(double margin) const {
    return {min_x - margin, min_y - margin, max_x + margin, max_y + margin};
}

namespace {

Bounds empty_bounds() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {inf, inf, -inf, -inf};
}

void include_tools(Bounds& b, const Observation& obs, const std::map<std::string, Pose2>& poses) {
    for (const auto& t : obs.tools) {
        const auto it = poses.find(t.id);
        const Pose2 pose = it == poses.end() ? t.home_pose : it->second;
        for (const auto& p : tool_world_shape(t, pose).points) b.include(p);
    }
}

// Maps world meters to SVG pixels with y pointing up.
class Canvas {
public:
    Canvas(const Bounds& view, double scale) : view_(view), scale_(scale) {
        width_ = std::max(1.0, std::ceil((view.max_x - view.min_x) * scale));
        height_ = std::max(1.0, std::ceil((view.max_y - view.min_y) * scale));
        out_ += fmt("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                    width_, height_, width_, height_);
        out_ += fmt("<rect x=\"0\" y=\"0\" width=\"%.0f\" height=\"%.0f\" fill=\"#ffffff\"/>\n", width_, height_);
    }

    double x(double wx) const { return (wx - view_.min_x) * scale_; }
    double y(double wy) const { return (view_.max_y - wy) * scale_; }

    void line(Point2 a, Point2 b, const char* stroke, double width, const char* extra = "") {
        out_ += fmt("<line x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\" stroke=\"%s\" stroke-width=\"%.2f\"%s/>\n", x(a.x),
                    y(a.y), x(b.x), y(b.y), stroke, width, extra);
    }

    void polyline(const std::vector<Point2>& pts, const char* stroke, double width, const char* extra = "") {
        if (pts.empty()) return;
        std::string d;
        for (const auto& p : pts) d += fmt("%.3f,%.3f ", x(p.x), y(p.y));
        d.pop_back();
        out_ += fmt("<polyline points=\"%s\" fill=\"none\" stroke=\"%s\" stroke-width=\"%.2f\" stroke-linejoin=\"round\"%s/>\n",
                    d.c_str(), stroke, width, extra);
    }

    void circle(Point2 c, double r_world, const char* fill, const char* stroke, double width, const char* extra = "") {
        out_ += fmt("<circle cx=\"%.3f\" cy=\"%.3f\" r=\"%.3f\" fill=\"%s\" stroke=\"%s\" stroke-width=\"%.2f\"%s/>\n", x(c.x),
                    y(c.y), r_world * scale_, fill, stroke, width, extra);
    }

    void dot(Point2 c, double r_px, const char* fill) {
        out_ += fmt("<circle cx=\"%.3f\" cy=\"%.3f\" r=\"%.2f\" fill=\"%s\"/>\n", x(c.x), y(c.y), r_px, fill);
    }

    void cross(Point2 c, double half_px, const char* stroke) {
        const double cx = x(c.x), cy = y(c.y);
        out_ += fmt("<path d=\"M%.3f %.3fL%.3f %.3fM%.3f %.3fL%.3f %.3f\" stroke=\"%s\" stroke-width=\"1.5\"/>\n", cx - half_px,
                    cy - half_px, cx + half_px, cy + half_px, cx - half_px, cy + half_px, cx + half_px, cy - half_px, stroke);
    }

    void rect_px(double px, double py, double w, double h, const char* fill) {
        out_ += fmt("<rect x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" height=\"%.3f\" fill=\"%s\"/>\n", px, py, w, h, fill);
    }

    void text(double px, double py, const std::string& s) {
        out_ += fmt("<text x=\"%.1f\" y=\"%.1f\" font-family=\"monospace\" font-size=\"12\" fill=\"#222222\">", px, py);
        for (char c : s) {
            switch (c) {
                case '<': out_ += "&lt;"; break;
                case '>': out_ += "&gt;"; break;
                case '&': out_ += "&amp;"; break;
                default: out_ += c;
            }
        }
        out_ += "</text>\n";
    }

    void raw(const std::string& s) { out_ += s; }
    std::string finish() { return out_ + "</svg>\n"; }

    template <typename... Args>
    static std::string fmt(const char* f, Args... args) {
        const int n = std::snprintf(nullptr, 0, f, args...);
        std::string s(static_cast<std::size_t>(n), '\0');
        std::snprintf(s.data(), s.size() + 1, f, args...);
        // "-0.000" and "0.000" must not differ between runs that land on either side of zero.
        for (std::size_t pos = 0; (pos = s.find("-0.", pos)) != std::string::npos;) {
            std::size_t end = pos + 3;
            while (end < s.size() && s[end] == '0') ++end;
            if (end < s.size() && std::isdigit(static_cast<unsigned char>(s[end]))) {
                pos = end;
                continue;
            }
            s.erase(pos, 1);
        }
        return s;
    }

private:
    Bounds view_;
    double scale_;
    double width_ = 1.0, height_ = 1.0;
    std::string out_;
};

constexpr std::array<const char*, 2> kToolColors{"#1f5fa8", "#b3541e"};

void draw_static(Canvas& c, const Observation& obs) {
    for (const auto& r : obs.robots) {
        c.circle(r.base, r.reach, "none", "#c8c8c8", 1.0, " class=\"reach\" stroke-dasharray=\"4 4\"");
        c.dot(r.base, 4.0, "#555555");
    }
    if (obs.walls) {
        for (const auto& s : obs.walls->segments) c.line(s.a, s.b, "#333333", 4.0, " class=\"wall\" stroke-linecap=\"round\"");
    }
    if (obs.target) c.cross(*obs.target, 6.0, "#2e8b57");
}

void draw_tools(Canvas& c, const Observation& obs, const std::map<std::string, Pose2>& poses) {
    for (std::size_t i = 0; i < obs.tools.size(); ++i) {
        const auto& t = obs.tools[i];
        const auto it = poses.find(t.id);
        const Pose2 pose = it == poses.end() ? t.home_pose : it->second;
        c.polyline(tool_world_shape(t, pose).points, kToolColors[i % kToolColors.size()], 3.0,
                   " class=\"tool\" stroke-linecap=\"round\"");
        c.dot(pose.position, 3.0, "#000000");
    }
}

// Perceptually ordered ramp (dark purple to yellow), 256 entries.
std::string heat_color(int level) {
    static constexpr std::array<std::array<double, 3>, 5> stops{{
        {0.267, 0.005, 0.329},
        {0.229, 0.322, 0.546},
        {0.128, 0.567, 0.551},
        {0.369, 0.789, 0.383},
        {0.993, 0.906, 0.144},
    }};
    const double t = level / 255.0 * (stops.size() - 1);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
    const double f = t - static_cast<double>(i);
    char buf[8];
    int rgb[3];
    for (int k = 0; k < 3; ++k) {
        rgb[k] = static_cast<int>(std::lround(255.0 * (stops[i][k] + f * (stops[i + 1][k] - stops[i][k]))));
    }
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

int quantize(double v) { return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

}  // namespace

Bounds scene_bounds(const Observation& obs, const RunLog* log) {
    Bounds b = empty_bounds();
    for (const auto& r : obs.robots) b.include(r.base);
    b.include(obs.block.center, obs.block.radius);
    if (obs.target) b.include(*obs.target, obs.block.radius);
    if (obs.walls) {
        for (const auto& s : obs.walls->segments) {
            b.include(s.a);
            b.include(s.b);
        }
    }
    include_tools(b, obs, {});
    if (log) {
        for (const auto& f : log->frames) {
            b.include(f.obj, obs.block.radius);
            include_tools(b, obs, f.tool_poses);
        }
    }
    return b.padded(0.05);
}

std::string svg_scene_frame(const Observation& obs, const Frame& frame, double scale, const std::optional<Bounds>& view) {
    if (!(scale > 0.0)) throw Error(ErrorCode::InvalidParameter, "render scale must be positive");
    Canvas c(view ? *view : scene_bounds(obs), scale);
    draw_static(c, obs);
    draw_tools(c, obs, frame.tool_poses);
    c.circle(frame.obj, obs.block.radius, frame.contact ? "#d9534f" : "#f0ad4e", "#333333", 1.0, " class=\"block\"");
    c.text(8.0, 16.0,
           Canvas::fmt("t=%ld mode=%s err=%.4f contact=%d", frame.t, frame.mode.c_str(), frame.error, frame.contact ? 1 : 0));
    return c.finish();
}

std::string svg_trajectory_overlay(const Observation& obs, const RunLog& log, double scale) {
    if (!(scale > 0.0)) throw Error(ErrorCode::InvalidParameter, "render scale must be positive");
    Canvas c(scene_bounds(obs, &log), scale);
    draw_static(c, obs);
    c.circle(obs.block.center, obs.block.radius, "none", "#999999", 1.0, " stroke-dasharray=\"3 3\"");
    if (log.frames.empty()) {
        draw_tools(c, obs, {});
        return c.finish();
    }
    std::vector<Point2> left, right, block;
    for (const auto& f : log.frames) {
        block.push_back(f.obj);
        left.push_back(f.ee_left.position);
        right.push_back(f.ee_right.position);
    }
    c.polyline(left, kToolColors[1], 1.0, " stroke-opacity=\"0.6\"");
    c.polyline(right, kToolColors[0], 1.0, " stroke-opacity=\"0.6\"");
    c.polyline(block, "#d9534f", 2.0, " class=\"block-path\"");
    for (const auto& f : log.frames) {
        if (f.contact) c.dot(f.obj, 1.5, "#d9534f");
    }
    const Frame& last = log.frames.back();
    draw_tools(c, obs, last.tool_poses);
    c.circle(last.obj, obs.block.radius, "#f0ad4e", "#333333", 1.0, " class=\"block\"");
    c.text(8.0, 16.0, Canvas::fmt("frames=%zu final_err=%.4f", log.frames.size(), last.error));
    return c.finish();
}

std::string svg_grid_heatmap(const Polyline& tool, const ToolAnalysis& analysis, double scale) {
    if (!(scale > 0.0)) throw Error(ErrorCode::InvalidParameter, "render scale must be positive");
    const ManoeuvrabilityGrid& g = analysis.grid;
    const GridSpec& s = g.spec;
    const Bounds view{s.origin.x, s.origin.y, s.origin.x + s.width * s.cell_size, s.origin.y + s.height * s.cell_size};
    Canvas c(view, scale);
    const double cell_px = s.cell_size * scale;
    // Run-length encode each row so large grids stay compact.
    for (int iy = 0; iy < s.height; ++iy) {
        const double py = c.y(s.origin.y + (iy + 1) * s.cell_size);
        int ix = 0;
        while (ix < s.width) {
            const int level = quantize(g.at(ix, iy));
            int end = ix + 1;
            while (end < s.width && quantize(g.at(end, iy)) == level) ++end;
            if (level > 0) c.rect_px(c.x(s.origin.x + ix * s.cell_size), py, (end - ix) * cell_px, cell_px, heat_color(level).c_str());
            ix = end;
        }
    }
    c.polyline(tool.points, "#ffffff", 2.0, " stroke-linecap=\"round\"");
    for (const auto& p : analysis.keypoints) c.dot(p, 2.5, "#ff7f0e");
    for (const auto& p : analysis.filtered) c.dot(p, 3.5, "#d62728");
    const AffordanceVector& a = analysis.a_star;
    c.line(a.origin, a.endpoint(), "#00e5ff", 2.0);
    c.cross(analysis.p_star, 5.0, "#ff00ff");
    return c.finish();
}

std::string pgm_grid(const ManoeuvrabilityGrid& grid) {
    const GridSpec& s = grid.spec;
    std::string out = "P5\n" + std::to_string(s.width) + " " + std::to_string(s.height) + "\n255\n";
    out.reserve(out.size() + grid.spec.cell_count());
    for (int iy = s.height - 1; iy >= 0; --iy) {
        for (int ix = 0; ix < s.width; ++ix) out += static_cast<char>(static_cast<unsigned char>(quantize(grid.at(ix, iy))));
    }
    return out;
}

void write_render(const RenderSpec& spec, const std::string& content) {
    validate(spec);
    write_text_file(spec.output, content);
}

}  // namespace tom
