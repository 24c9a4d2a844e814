#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "tom/manoeuvrability.hpp"
#include "tom/planner.hpp"
#include "tom/simworld.hpp"

namespace tom {

enum class RenderKind { SceneFrame, GridHeatmap, TrajectoryOverlay };

const char* to_string(RenderKind kind);
std::optional<RenderKind> parse_render_kind(std::string_view text);

struct RenderSpec {
    std::filesystem::path output;
    RenderKind kind = RenderKind::SceneFrame;
    double scale = 1000.0;  // pixels per meter
};

void validate(const RenderSpec& spec);

// World-space window shown by a drawing.
struct Bounds {
    double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;

    void include(Point2 p);
    void include(Point2 p, double r);
    Bounds padded(double margin) const;
};

// Everything a run touches: robots, walls, target and every logged block/tool position.
Bounds scene_bounds(const Observation& obs, const RunLog* log = nullptr);

// All SVG writers emit fixed-precision numbers and no timestamps, so equal inputs give equal bytes.
std::string svg_scene_frame(const Observation& obs, const Frame& frame, double scale,
                            const std::optional<Bounds>& view = std::nullopt);
std::string svg_trajectory_overlay(const Observation& obs, const RunLog& log, double scale);
std::string svg_grid_heatmap(const Polyline& tool, const ToolAnalysis& analysis, double scale);

// Binary (P5) greyscale image, one pixel per cell, top row = highest y.
std::string pgm_grid(const ManoeuvrabilityGrid& grid);

// Validates `spec` and writes `content` to spec.output.
void write_render(const RenderSpec& spec, const std::string& content);

}  // namespace tom
