#include "tom/manoeuvrability.hpp"

#include <algorithm>
#include <limits>

namespace tom {

std::optional<std::pair<int, int>> GridSpec::cell_of(Point2 p) const {
    const double fx = (p.x - origin.x) / cell_size;
    const double fy = (p.y - origin.y) / cell_size;
    if (!(fx >= 0.0) || !(fy >= 0.0)) return std::nullopt;
    const auto ix = static_cast<long>(std::floor(fx));
    const auto iy = static_cast<long>(std::floor(fy));
    if (ix >= width || iy >= height) return std::nullopt;
    return std::pair<int, int>{static_cast<int>(ix), static_cast<int>(iy)};
}

double GridSpec::diagonal() const {
    return cell_size * std::hypot(static_cast<double>(width), static_cast<double>(height));
}

void validate(const GridSpec& spec) {
    if (!(spec.cell_size > 0.0) || !std::isfinite(spec.cell_size)) {
        throw Error(ErrorCode::InvalidParameter, "grid cell size must be positive");
    }
    if (spec.width < 8 || spec.height < 8) {
        throw Error(ErrorCode::InvalidParameter, "grid must be at least 8x8 cells");
    }
    if (!is_finite(spec.origin)) throw Error(ErrorCode::InvalidParameter, "grid origin is not finite");
}

GridSpec grid_for_tool(const Polyline& tool, double cell_size, double extra_margin) {
    validate(tool);
    if (!(cell_size > 0.0)) throw Error(ErrorCode::InvalidParameter, "grid cell size must be positive");
    double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
    double hi_x = -lo_x, hi_y = -lo_x;
    double half = 0.0;
    for (const auto& p : tool.points) {
        lo_x = std::min(lo_x, p.x);
        lo_y = std::min(lo_y, p.y);
        hi_x = std::max(hi_x, p.x);
        hi_y = std::max(hi_y, p.y);
    }
    for (const auto& s : tool.segments()) half = std::max(half, 0.5 * s.length());
    const double pad = half + std::max(0.0, extra_margin);
    GridSpec spec;
    spec.cell_size = cell_size;
    spec.origin = {lo_x - pad, lo_y - pad};
    spec.width = std::max(8, static_cast<int>(std::ceil((hi_x - lo_x + 2.0 * pad) / cell_size)));
    spec.height = std::max(8, static_cast<int>(std::ceil((hi_y - lo_y + 2.0 * pad) / cell_size)));
    return spec;
}

bool BinaryMask::contains(Point2 p) const {
    const auto cell = spec.cell_of(p);
    return cell && at(cell->first, cell->second);
}

std::size_t BinaryMask::count() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

double ManoeuvrabilityGrid::value_at(Point2 p) const {
    const auto cell = spec.cell_of(p);
    return cell ? at(cell->first, cell->second) : 0.0;
}

int ManoeuvrabilityGrid::max_count() const {
    return counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
}

BinaryMask rasterize_segment_affordance(const Segment2& s, Side side, const GridSpec& spec, double sigma_frac) {
    validate(s);
    validate(spec);
    if (!(sigma_frac > 0.0)) throw Error(ErrorCode::InvalidParameter, "sigma_frac must be positive");

    BinaryMask mask{spec, std::vector<std::uint8_t>(spec.cell_count(), 0)};
    const double len = s.length();
    const double peak = 0.5 * len;
    const double sigma = sigma_frac * len;
    const Vector2 u = s.direction();
    const Vector2 n = side == Side::Left ? u.perp_left() : -u.perp_left();

    const Point2 corners[] = {s.a, s.b, s.a + peak * n, s.b + peak * n};
    double lo_x = corners[0].x, hi_x = lo_x, lo_y = corners[0].y, hi_y = lo_y;
    for (const auto& c : corners) {
        lo_x = std::min(lo_x, c.x);
        hi_x = std::max(hi_x, c.x);
        lo_y = std::min(lo_y, c.y);
        hi_y = std::max(hi_y, c.y);
    }
    const auto to_index = [&](double v, double o, int limit) {
        return std::clamp(static_cast<long>(std::floor((v - o) / spec.cell_size)), 0L, static_cast<long>(limit - 1));
    };
    const long ix0 = to_index(lo_x, spec.origin.x, spec.width), ix1 = to_index(hi_x, spec.origin.x, spec.width);
    const long iy0 = to_index(lo_y, spec.origin.y, spec.height), iy1 = to_index(hi_y, spec.origin.y, spec.height);

    const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
    for (long iy = iy0; iy <= iy1; ++iy) {
        for (long ix = ix0; ix <= ix1; ++ix) {
            const Vector2 rel = spec.cell_center(static_cast<int>(ix), static_cast<int>(iy)) - s.a;
            const double t = rel.dot(u);
            if (t < 0.0 || t > len) continue;
            const double d = rel.dot(n);
            // Cells exactly on the segment line belong to the left lobe only.
            if (side == Side::Left ? d < 0.0 : d <= 0.0) continue;
            const double envelope = peak * std::exp(-(t - peak) * (t - peak) * inv_two_sigma2);
            if (d <= envelope) mask.bits[static_cast<std::size_t>(iy) * spec.width + ix] = 1;
        }
    }
    return mask;
}

GridBuild build_grid(const Polyline& tool, const GridSpec& spec, double sigma_frac) {
    validate(tool);
    validate(spec);
    GridBuild out;
    out.grid.spec = spec;
    out.grid.counts.assign(spec.cell_count(), 0);
    out.masks.reserve(2 * tool.segment_count());
    for (std::size_t i = 0; i < tool.segment_count(); ++i) {
        for (Side side : {Side::Left, Side::Right}) {
            out.masks.push_back(rasterize_segment_affordance(tool.segment(i), side, spec, sigma_frac));
            const auto& bits = out.masks.back().bits;
            for (std::size_t k = 0; k < bits.size(); ++k) out.grid.counts[k] += bits[k];
        }
    }
    const int max_count = out.grid.max_count();
    if (max_count == 0) throw Error(ErrorCode::OutOfGrid, "no affordance area falls inside the grid");
    out.grid.values.resize(out.grid.counts.size());
    for (std::size_t k = 0; k < out.grid.counts.size(); ++k) {
        out.grid.values[k] = static_cast<double>(out.grid.counts[k]) / max_count;
    }
    return out;
}

std::vector<Point2> extract_feature_points(const Polyline& tool, double r_obj, const FeatureParams& params) {
    if (!(r_obj > 0.0)) throw Error(ErrorCode::InvalidParameter, "object radius must be positive");
    const ClosedContour offset = offset_polyline(tool, r_obj, {params.arc_tol});

    std::vector<Point2> ring = offset.points;
    ring.push_back(ring.front());
    std::vector<Point2> simplified = rdp_simplify(ring, params.rdp_eps);
    simplified.pop_back();
    if (simplified.size() < 3) simplified = offset.points;

    const ClosedContour resampled = resample_contour({simplified}, params.resample_step);
    const std::vector<double> kappa = contour_curvature(resampled, params.window);

    const long n = static_cast<long>(kappa.size());
    const long half = std::max(1, params.window / 2);
    std::vector<Point2> features;
    for (long i = 0; i < n; ++i) {
        const double k = kappa[static_cast<std::size_t>(i)];
        if (!(k > params.kappa_thresh)) continue;
        bool local_max = true;
        for (long j = -half; j <= half && local_max; ++j) {
            if (j != 0 && kappa[static_cast<std::size_t>(((i + j) % n + n) % n)] > k) local_max = false;
        }
        if (local_max) features.push_back(resampled.points[static_cast<std::size_t>(i)]);
    }
    return features;
}

std::vector<Point2> cluster_keypoints(const std::vector<Point2>& points, double eps, int min_pts) {
    if (!(eps > 0.0)) throw Error(ErrorCode::InvalidParameter, "cluster eps must be positive");
    if (min_pts < 1) throw Error(ErrorCode::InvalidParameter, "cluster min_pts must be >= 1");

    const std::size_t n = points.size();
    std::vector<std::vector<std::size_t>> neighbours(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (distance(points[i], points[j]) <= eps) neighbours[i].push_back(j);
        }
    }
    constexpr int kUnvisited = -2, kNoise = -1;
    std::vector<int> label(n, kUnvisited);
    int clusters = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] != kUnvisited) continue;
        if (static_cast<int>(neighbours[i].size()) < min_pts) {
            label[i] = kNoise;
            continue;
        }
        const int id = clusters++;
        label[i] = id;
        std::vector<std::size_t> frontier = neighbours[i];
        while (!frontier.empty()) {
            const std::size_t j = frontier.back();
            frontier.pop_back();
            if (label[j] == kNoise) label[j] = id;
            if (label[j] != kUnvisited) continue;
            label[j] = id;
            if (static_cast<int>(neighbours[j].size()) >= min_pts) {
                frontier.insert(frontier.end(), neighbours[j].begin(), neighbours[j].end());
            }
        }
    }

    std::vector<Point2> reps;
    reps.reserve(static_cast<std::size_t>(clusters));
    for (int id = 0; id < clusters; ++id) {
        double sx = 0.0, sy = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (label[i] == id) {
                sx += points[i].x;
                sy += points[i].y;
                ++count;
            }
        }
        const Point2 centroid{sx / static_cast<double>(count), sy / static_cast<double>(count)};
        std::size_t best = n;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (label[i] != id) continue;
            const double d = distance(points[i], centroid);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        reps.push_back(points[best]);
    }
    return reps;
}

std::vector<Point2> filter_redundant(const std::vector<Point2>& keypoints, const std::vector<BinaryMask>& masks) {
    for (const auto& m : masks) {
        if (!(m.spec == masks.front().spec)) {
            throw Error(ErrorCode::InvalidParameter, "masks must share one grid spec");
        }
    }
    std::vector<Point2> out;
    for (const auto& p : keypoints) {
        // Points off the grid have no affordance cell and are dropped with the rest.
        if (std::any_of(masks.begin(), masks.end(), [&](const BinaryMask& m) { return m.contains(p); })) {
            out.push_back(p);
        }
    }
    return out;
}

double point_metric(Point2 p, const ManoeuvrabilityGrid& grid, const AffordanceVector& a_star) {
    return (1.0 - grid.value_at(p)) + distance(p, a_star.endpoint()) / grid.spec.diagonal();
}

Point2 select_point(const std::vector<Point2>& filtered, const ManoeuvrabilityGrid& grid, const AffordanceVector& a_star) {
    if (filtered.empty()) throw Error(ErrorCode::NoCandidate, "no non-redundant keypoint to select from");
    std::size_t best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < filtered.size(); ++i) {
        const double score = point_metric(filtered[i], grid, a_star);
        // Scores within rounding noise count as ties and keep the earlier candidate.
        if (score < best_score - 1e-12) {
            best_score = score;
            best = i;
        }
    }
    return filtered[best];
}

namespace {

template <typename F>
auto staged(const char* stage, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        throw e.with_stage(stage);
    }
}

}  // namespace

Vector2 contact_normal(const Polyline& tool, Point2 p, double reach, Vector2 fallback) {
    Vector2 sum{};
    for (const auto& s : tool.segments()) {
        const Point2 q = s.closest_point(p);
        const double d = distance(p, q);
        if (d > 1e-12 && d <= reach) sum = sum + (p - q) / d;
    }
    return sum.norm() > 1e-6 ? sum.normalized() : fallback;
}

ToolAnalysis analyze_tool_for(const Polyline& tool, double r_obj, const AffordanceVector& a_star,
                              const AnalysisParams& params) {
    if (!(r_obj > 0.0)) throw Error(ErrorCode::InvalidParameter, "object radius must be positive");
    ToolAnalysis out;
    out.r_obj = r_obj;
    out.a_star = a_star;
    out.affordances = staged("affordances", [&] { return compute_tool_affordances(tool); });

    const GridSpec spec = params.grid ? *params.grid
                                      : staged("grid", [&] { return grid_for_tool(tool, params.cell_size, params.grid_margin + r_obj); });
    GridBuild build = staged("grid", [&] { return build_grid(tool, spec, params.sigma_frac); });
    out.grid = std::move(build.grid);

    const FeatureParams fp{params.kappa_thresh_factor / r_obj, params.rdp_eps_factor * r_obj, params.smoothing_window,
                           params.resample_step, params.arc_tol};
    out.feature_points = staged("features", [&] { return extract_feature_points(tool, r_obj, fp); });

    // Candidates: curvature features plus the contour point facing each affordance vector.
    std::vector<Point2> candidates = out.feature_points;
    const ClosedContour contour = staged("features", [&] { return offset_polyline(tool, r_obj, {params.arc_tol}); });
    for (const auto& a : out.affordances.vectors) candidates.push_back(contour.closest_boundary_point(a.endpoint()));

    out.keypoints = staged("clustering", [&] {
        return cluster_keypoints(candidates, params.cluster_eps_factor * r_obj, params.cluster_min_pts);
    });
    out.filtered = filter_redundant(out.keypoints, build.masks);
    out.p_star = staged("selection", [&] { return select_point(out.filtered, out.grid, out.a_star); });
    out.push_normal = contact_normal(tool, out.p_star, r_obj * 1.1 + params.arc_tol, out.a_star.direction);
    return out;
}

ToolAnalysis analyze_tool(const Polyline& tool, double r_obj, Vector2 v_target, const AnalysisParams& params) {
    const AffordanceSet set = staged("affordances", [&] { return compute_tool_affordances(tool); });
    const AffordanceVector a_star = staged("affordances", [&] { return select_affordance(set, v_target); });
    return analyze_tool_for(tool, r_obj, a_star, params);
}

}  // namespace tom
