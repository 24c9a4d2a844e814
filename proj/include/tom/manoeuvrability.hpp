#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tom/affordance.hpp"
#include "tom/geometry.hpp"

namespace tom {

struct GridSpec {
    Point2 origin;            // lower-left corner of cell (0, 0)
    double cell_size = 0.002;
    int width = 0;
    int height = 0;

    Point2 cell_center(int ix, int iy) const {
        return {origin.x + (ix + 0.5) * cell_size, origin.y + (iy + 0.5) * cell_size};
    }
    // Cell containing p, or nullopt when p is outside the grid.
    std::optional<std::pair<int, int>> cell_of(Point2 p) const;
    double diagonal() const;
    std::size_t cell_count() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

void validate(const GridSpec& spec);

// Smallest grid covering the tool plus every affordance lobe and a margin.
GridSpec grid_for_tool(const Polyline& tool, double cell_size, double extra_margin);

struct BinaryMask {
    GridSpec spec;
    std::vector<std::uint8_t> bits;  // row-major, y outer

    bool at(int ix, int iy) const { return bits[static_cast<std::size_t>(iy) * spec.width + ix] != 0; }
    bool contains(Point2 p) const;
    std::size_t count() const;
};

struct ManoeuvrabilityGrid {
    GridSpec spec;
    std::vector<int> counts;      // summed masks
    std::vector<double> values;   // counts / max(counts)

    double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * spec.width + ix]; }
    int count_at(int ix, int iy) const { return counts[static_cast<std::size_t>(iy) * spec.width + ix]; }
    // Value of the cell containing p; zero outside the grid.
    double value_at(Point2 p) const;
    int max_count() const;

    friend bool operator==(const ManoeuvrabilityGrid&, const ManoeuvrabilityGrid&) = default;
};

struct AnalysisParams {
    double cell_size = 0.002;
    double sigma_frac = 0.25;
    double kappa_thresh_factor = 0.5;   // threshold = factor / r_obj
    double rdp_eps_factor = 0.5;        // epsilon = factor * r_obj
    double cluster_eps_factor = 1.5;    // eps = factor * r_obj
    int cluster_min_pts = 1;
    int smoothing_window = 5;
    double resample_step = 0.002;
    double arc_tol = 1e-3;
    double grid_margin = 0.01;
    std::optional<GridSpec> grid;       // overrides the tool-fitted grid
};

struct ToolAnalysis {
    AffordanceSet affordances;
    ManoeuvrabilityGrid grid;
    std::vector<Point2> feature_points;
    std::vector<Point2> keypoints;
    std::vector<Point2> filtered;
    AffordanceVector a_star;
    Point2 p_star;
    // Direction a disk centred on p* is pushed when the tool advances into it
    // (mean contact normal); falls back to a* when no segment touches p*.
    Vector2 push_normal;
    double r_obj = 0.0;

    friend bool operator==(const ToolAnalysis&, const ToolAnalysis&) = default;
};

// Filled Gaussian lobe on one side of a segment: offset d in [0, (L/2) exp(-(t - L/2)^2 / (2 sigma^2))],
// sigma = sigma_frac * L, t along the segment in [0, L].
BinaryMask rasterize_segment_affordance(const Segment2& s, Side side, const GridSpec& spec, double sigma_frac);

struct GridBuild {
    ManoeuvrabilityGrid grid;
    std::vector<BinaryMask> masks;  // 2n masks in affordance-set order
};

GridBuild build_grid(const Polyline& tool, const GridSpec& spec, double sigma_frac = 0.25);

struct FeatureParams {
    double kappa_thresh = 0.0;
    double rdp_eps = 0.0;
    int window = 5;
    double resample_step = 0.002;
    double arc_tol = 1e-3;
};

// Offset contour -> RDP -> uniform resampling -> curvature -> thresholded local maxima.
std::vector<Point2> extract_feature_points(const Polyline& tool, double r_obj, const FeatureParams& params);

// Density-based clustering; one representative per cluster (member nearest the centroid).
std::vector<Point2> cluster_keypoints(const std::vector<Point2>& points, double eps, int min_pts);

std::vector<Point2> filter_redundant(const std::vector<Point2>& keypoints, const std::vector<BinaryMask>& masks);

// (1 - M[p]) + |p - a_star endpoint| / grid diagonal.
double point_metric(Point2 p, const ManoeuvrabilityGrid& grid, const AffordanceVector& a_star);

Point2 select_point(const std::vector<Point2>& filtered, const ManoeuvrabilityGrid& grid, const AffordanceVector& a_star);

// Normalized sum of unit normals from every segment within `reach` of p.
Vector2 contact_normal(const Polyline& tool, Point2 p, double reach, Vector2 fallback);

ToolAnalysis analyze_tool(const Polyline& tool, double r_obj, Vector2 v_target, const AnalysisParams& params = {});

// Same pipeline with the optimal affordance fixed by the caller.
ToolAnalysis analyze_tool_for(const Polyline& tool, double r_obj, const AffordanceVector& a_star,
                              const AnalysisParams& params = {});

}  // namespace tom
