#include "tom/geometry.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/linestring.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

namespace tom {

namespace bg = boost::geometry;

Vector2 Vector2::normalized() const {
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw Error(ErrorCode::DegenerateVector, "cannot normalize a zero-length vector");
    }
    return {dx / n, dy / n};
}

Vector2 Vector2::rotated(double angle) const {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * dx - s * dy, s * dx + c * dy};
}

bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

double normalize_angle(double theta) {
    double t = std::fmod(theta, 2.0 * kPi);
    if (t <= -kPi) t += 2.0 * kPi;
    if (t > kPi) t -= 2.0 * kPi;
    return t;
}

Point2 Pose2::apply(Point2 local) const {
    return position + Vector2{local.x, local.y}.rotated(theta);
}

Point2 Pose2::inverse_apply(Point2 world) const {
    const Vector2 v = (world - position).rotated(-theta);
    return {v.dx, v.dy};
}

Pose2 make_pose(Point2 position, double theta) { return {position, normalize_angle(theta)}; }

Point2 Segment2::closest_point(Point2 q) const {
    const Vector2 ab = b - a;
    const double len2 = ab.dot(ab);
    if (len2 <= 0.0) return a;
    const double t = std::clamp((q - a).dot(ab) / len2, 0.0, 1.0);
    return a + t * ab;
}

void validate(const Segment2& s) {
    if (!is_finite(s.a) || !is_finite(s.b)) {
        throw Error(ErrorCode::DegenerateContour, "segment has non-finite endpoint");
    }
    if (s.length() <= kMinSegmentLength) {
        throw Error(ErrorCode::DegenerateContour, "segment endpoints coincide");
    }
}

std::vector<Segment2> Polyline::segments() const {
    std::vector<Segment2> out;
    out.reserve(segment_count());
    for (std::size_t i = 0; i + 1 < points.size(); ++i) out.push_back(segment(i));
    return out;
}

double Polyline::length() const {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) total += distance(points[i], points[i + 1]);
    return total;
}

void validate(const Polyline& line) {
    if (line.points.size() < 2) {
        throw Error(ErrorCode::DegenerateContour, "polyline needs at least two points");
    }
    for (std::size_t i = 0; i + 1 < line.points.size(); ++i) {
        try {
            validate(line.segment(i));
        } catch (const Error& e) {
            throw Error(e.code(), std::string(e.what()) + " (segment " + std::to_string(i) + ")");
        }
    }
}

Polyline transformed(const Polyline& line, const Pose2& pose) {
    Polyline out;
    out.points.reserve(line.points.size());
    for (const auto& p : line.points) out.points.push_back(pose.apply(p));
    return out;
}

double ClosedContour::signed_area() const {
    double a = 0.0;
    const std::size_t n = points.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& p = points[i];
        const Point2& q = points[(i + 1) % n];
        a += p.x * q.y - q.x * p.y;
    }
    return 0.5 * a;
}

double ClosedContour::perimeter() const {
    double total = 0.0;
    const std::size_t n = points.size();
    for (std::size_t i = 0; i < n; ++i) total += distance(points[i], points[(i + 1) % n]);
    return total;
}

bool ClosedContour::contains(Point2 q) const {
    bool inside = false;
    const std::size_t n = points.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2& pi = points[i];
        const Point2& pj = points[j];
        if ((pi.y > q.y) != (pj.y > q.y)) {
            const double x = pj.x + (q.y - pj.y) * (pi.x - pj.x) / (pi.y - pj.y);
            if (q.x < x) inside = !inside;
        }
    }
    return inside;
}

Point2 ClosedContour::closest_boundary_point(Point2 q) const {
    Point2 best = points.front();
    double best_d = std::numeric_limits<double>::infinity();
    const std::size_t n = points.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 c = Segment2{points[i], points[(i + 1) % n]}.closest_point(q);
        const double d = distance(c, q);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

double ClosedContour::distance_to_boundary(Point2 q) const {
    return distance(closest_boundary_point(q), q);
}

double angle_between(Vector2 u, Vector2 v) {
    const double nu = u.norm();
    const double nv = v.norm();
    if (!(nu > 0.0) || !(nv > 0.0)) {
        throw Error(ErrorCode::DegenerateVector, "angle_between: zero-length input");
    }
    const double c = std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
    return std::acos(c);
}

std::pair<Vector2, Vector2> segment_normal_pair(const Segment2& s) {
    validate(s);
    const Vector2 left = s.direction().perp_left();
    return {left, -left};
}

namespace {

using BPoint = bg::model::d2::point_xy<double>;
using BLine = bg::model::linestring<BPoint>;
using BPolygon = bg::model::polygon<BPoint>;
using BMulti = bg::model::multi_polygon<BPolygon>;

int points_per_circle(double radius, double arc_tol) {
    // Chord sagitta r(1 - cos(a/2)) must stay within arc_tol.
    const double ratio = std::clamp(1.0 - arc_tol / radius, -1.0, 1.0);
    const double step = 2.0 * std::acos(ratio);
    if (!(step > 0.0)) return 360;
    return std::clamp(static_cast<int>(std::ceil(2.0 * kPi / step)), 8, 3600);
}

}  // namespace

ClosedContour offset_polyline(const Polyline& shape, double radius, OffsetOptions options) {
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw Error(ErrorCode::InvalidParameter, "offset radius must be positive");
    }
    if (!(options.arc_tol > 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "arc tolerance must be positive");
    }
    validate(shape);

    BLine line;
    for (const auto& p : shape.points) line.emplace_back(p.x, p.y);

    const int ppc = points_per_circle(radius, options.arc_tol);
    bg::strategy::buffer::distance_symmetric<double> dist(radius);
    bg::strategy::buffer::join_round join(ppc);
    bg::strategy::buffer::end_round end(ppc);
    bg::strategy::buffer::point_circle circle(ppc);
    bg::strategy::buffer::side_straight side;

    BMulti result;
    bg::buffer(line, result, dist, side, join, end, circle);
    if (result.empty()) {
        throw Error(ErrorCode::DegenerateContour, "offset produced no polygon");
    }
    const auto largest = std::max_element(result.begin(), result.end(), [](const auto& a, const auto& b) {
        return bg::area(a) < bg::area(b);
    });

    ClosedContour c;
    for (const auto& bp : largest->outer()) {
        const Point2 p{bp.x(), bp.y()};
        if (!c.points.empty() && distance(c.points.back(), p) < 1e-12) continue;
        c.points.push_back(p);
    }
    while (c.points.size() > 1 && distance(c.points.front(), c.points.back()) < 1e-12) c.points.pop_back();
    if (c.signed_area() < 0.0) std::reverse(c.points.begin(), c.points.end());
    return c;
}

double point_line_distance(Point2 p, Point2 a, Point2 b) {
    return Segment2{a, b}.distance_to(p);
}

std::vector<Point2> rdp_simplify(std::span<const Point2> points, double epsilon) {
    if (points.size() < 2) {
        throw Error(ErrorCode::InvalidParameter, "rdp_simplify needs at least two points");
    }
    if (!(epsilon >= 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "rdp epsilon must be non-negative");
    }
    if (epsilon == 0.0) return {points.begin(), points.end()};

    std::vector<bool> keep(points.size(), false);
    keep.front() = keep.back() = true;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, points.size() - 1}};
    while (!stack.empty()) {
        const auto [lo, hi] = stack.back();
        stack.pop_back();
        double dmax = -1.0;
        std::size_t idx = lo;
        for (std::size_t i = lo + 1; i < hi; ++i) {
            const double d = point_line_distance(points[i], points[lo], points[hi]);
            if (d > dmax) {
                dmax = d;
                idx = i;
            }
        }
        if (dmax > epsilon) {
            keep[idx] = true;
            stack.emplace_back(lo, idx);
            stack.emplace_back(idx, hi);
        }
    }
    std::vector<Point2> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (keep[i]) out.push_back(points[i]);
    }
    return out;
}

ClosedContour resample_contour(const ClosedContour& c, double step) {
    if (!(step > 0.0)) throw Error(ErrorCode::InvalidParameter, "resample step must be positive");
    if (c.points.size() < 3) throw Error(ErrorCode::DegenerateContour, "contour needs at least three points");
    const double perim = c.perimeter();
    const auto count = std::max<std::size_t>(3, static_cast<std::size_t>(std::llround(perim / step)));
    const double h = perim / static_cast<double>(count);

    ClosedContour out;
    out.points.reserve(count);
    const std::size_t n = c.points.size();
    std::size_t edge = 0;
    double edge_start = 0.0;
    double edge_len = distance(c.points[0], c.points[1 % n]);
    for (std::size_t k = 0; k < count; ++k) {
        const double s = h * static_cast<double>(k);
        while (s > edge_start + edge_len && edge + 1 < n) {
            edge_start += edge_len;
            ++edge;
            edge_len = distance(c.points[edge], c.points[(edge + 1) % n]);
        }
        const double t = edge_len > 0.0 ? std::clamp((s - edge_start) / edge_len, 0.0, 1.0) : 0.0;
        out.points.push_back(lerp(c.points[edge], c.points[(edge + 1) % n], t));
    }
    return out;
}

std::vector<double> contour_curvature(const ClosedContour& c, int smoothing_window) {
    const std::size_t n = c.points.size();
    if (n < 3) throw Error(ErrorCode::DegenerateContour, "curvature needs at least three vertices");
    if (smoothing_window < 1) throw Error(ErrorCode::InvalidParameter, "smoothing window must be >= 1");
    for (std::size_t i = 0; i < n; ++i) {
        if (distance(c.points[i], c.points[(i + 1) % n]) <= kMinSegmentLength) {
            throw Error(ErrorCode::DegenerateContour, "repeated contour vertex at index " + std::to_string(i));
        }
    }

    const long half = std::min<long>(smoothing_window / 2, static_cast<long>(n - 1) / 2);
    const auto at = [n](long i) { return static_cast<std::size_t>(((i % static_cast<long>(n)) + static_cast<long>(n)) % static_cast<long>(n)); };
    std::vector<Point2> smooth(n);
    for (long i = 0; i < static_cast<long>(n); ++i) {
        double sx = 0.0, sy = 0.0;
        for (long k = -half; k <= half; ++k) {
            sx += c.points[at(i + k)].x;
            sy += c.points[at(i + k)].y;
        }
        const double w = static_cast<double>(2 * half + 1);
        smooth[static_cast<std::size_t>(i)] = {sx / w, sy / w};
    }

    std::vector<double> kappa(n, 0.0);
    for (long i = 0; i < static_cast<long>(n); ++i) {
        const Point2& p0 = smooth[at(i - 1)];
        const Point2& p1 = smooth[at(i)];
        const Point2& p2 = smooth[at(i + 1)];
        const double h1 = distance(p0, p1);
        const double h2 = distance(p1, p2);
        if (h1 <= 0.0 || h2 <= 0.0) continue;  // smoothing collapsed a run of points
        const Vector2 d1 = (p2 - p0) / (h1 + h2);
        const Vector2 d2 = 2.0 * ((p2 - p1) / h2 - (p1 - p0) / h1) / (h1 + h2);
        const double speed = d1.norm();
        if (speed <= 0.0) continue;
        kappa[static_cast<std::size_t>(i)] = std::abs(d1.cross(d2)) / (speed * speed * speed);
    }
    return kappa;
}

Point2 closest_point_on_circle(Point2 center, double radius, Point2 q) {
    if (!(radius > 0.0)) throw Error(ErrorCode::InvalidParameter, "circle radius must be positive");
    const Vector2 d = q - center;
    if (d.norm() <= 1e-15) {
        throw Error(ErrorCode::AmbiguousProjection, "query point coincides with circle center");
    }
    return center + radius * d.normalized();
}

bool segments_intersect(const Segment2& s, const Segment2& t) {
    const auto orient = [](Point2 a, Point2 b, Point2 c) { return (b - a).cross(c - a); };
    const double d1 = orient(t.a, t.b, s.a);
    const double d2 = orient(t.a, t.b, s.b);
    const double d3 = orient(s.a, s.b, t.a);
    const double d4 = orient(s.a, s.b, t.b);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    const auto on_seg = [](const Segment2& seg, Point2 p) { return seg.distance_to(p) <= 1e-12; };
    return on_seg(t, s.a) || on_seg(t, s.b) || on_seg(s, t.a) || on_seg(s, t.b);
}

std::vector<Point2> convex_hull(std::vector<Point2> pts) {
    std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Point2> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
        while (k >= t && (hull[k - 1] - hull[k - 2]).cross(pts[i - 1] - hull[k - 2]) <= 0) --k;
        hull[k++] = pts[i - 1];
    }
    hull.resize(k - 1);
    return hull;
}

}  // namespace tom
