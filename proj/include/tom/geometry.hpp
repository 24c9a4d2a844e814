#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "tom/error.hpp"

namespace tom {

inline constexpr double kPi = std::numbers::pi;

struct Vector2 {
    double dx = 0.0;
    double dy = 0.0;

    double norm() const { return std::hypot(dx, dy); }
    double dot(const Vector2& o) const { return dx * o.dx + dy * o.dy; }
    // z component of the 3D cross product
    double cross(const Vector2& o) const { return dx * o.dy - dy * o.dx; }
    Vector2 normalized() const;
    Vector2 rotated(double angle) const;
    Vector2 perp_left() const { return {-dy, dx}; }
    double angle() const { return std::atan2(dy, dx); }

    friend Vector2 operator+(Vector2 a, Vector2 b) { return {a.dx + b.dx, a.dy + b.dy}; }
    friend Vector2 operator-(Vector2 a, Vector2 b) { return {a.dx - b.dx, a.dy - b.dy}; }
    friend Vector2 operator-(Vector2 a) { return {-a.dx, -a.dy}; }
    friend Vector2 operator*(double s, Vector2 v) { return {s * v.dx, s * v.dy}; }
    friend Vector2 operator*(Vector2 v, double s) { return {s * v.dx, s * v.dy}; }
    friend Vector2 operator/(Vector2 v, double s) { return {v.dx / s, v.dy / s}; }
    friend bool operator==(const Vector2&, const Vector2&) = default;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend Vector2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator+(Point2 p, Vector2 v) { return {p.x + v.dx, p.y + v.dy}; }
    friend Point2 operator-(Point2 p, Vector2 v) { return {p.x - v.dx, p.y - v.dy}; }
    friend bool operator==(const Point2&, const Point2&) = default;
};

inline double distance(Point2 a, Point2 b) { return (a - b).norm(); }
inline Point2 midpoint(Point2 a, Point2 b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }
inline Point2 lerp(Point2 a, Point2 b, double t) { return a + t * (b - a); }
bool is_finite(Point2 p);

// Wraps an angle into (-pi, pi].
double normalize_angle(double theta);

struct Pose2 {
    Point2 position;
    double theta = 0.0;

    // Maps a point given in the local frame into the world frame.
    Point2 apply(Point2 local) const;
    Vector2 apply(Vector2 local) const { return local.rotated(theta); }
    Point2 inverse_apply(Point2 world) const;
    Vector2 inverse_apply(Vector2 world) const { return world.rotated(-theta); }

    friend bool operator==(const Pose2&, const Pose2&) = default;
};

Pose2 make_pose(Point2 position, double theta);

struct Segment2 {
    Point2 a;
    Point2 b;

    double length() const { return distance(a, b); }
    Vector2 direction() const { return (b - a).normalized(); }
    Point2 mid() const { return midpoint(a, b); }
    Point2 closest_point(Point2 q) const;
    double distance_to(Point2 q) const { return distance(closest_point(q), q); }

    friend bool operator==(const Segment2&, const Segment2&) = default;
};

inline constexpr double kMinSegmentLength = 1e-9;

// Throws DegenerateContour when the segment is shorter than kMinSegmentLength.
void validate(const Segment2& s);

struct Polyline {
    std::vector<Point2> points;

    std::size_t segment_count() const { return points.empty() ? 0 : points.size() - 1; }
    Segment2 segment(std::size_t i) const { return {points[i], points[i + 1]}; }
    std::vector<Segment2> segments() const;
    double length() const;

    friend bool operator==(const Polyline&, const Polyline&) = default;
};

// Throws DegenerateContour on fewer than 2 points or repeated consecutive points.
void validate(const Polyline& line);
Polyline transformed(const Polyline& line, const Pose2& pose);

struct ClosedContour {
    std::vector<Point2> points;

    double signed_area() const;
    double area() const { return std::abs(signed_area()); }
    double perimeter() const;
    bool contains(Point2 q) const;
    double distance_to_boundary(Point2 q) const;
    Point2 closest_boundary_point(Point2 q) const;
};

// Smallest angle between two vectors, in [0, pi].
double angle_between(Vector2 u, Vector2 v);

// Unit normals of a segment; first is left of (b - a), second is right.
std::pair<Vector2, Vector2> segment_normal_pair(const Segment2& s);

struct OffsetOptions {
    double arc_tol = 1e-3;
};

// Boundary of the Minkowski sum of the polyline with a disk of the given radius.
// Counter-clockwise, without repeated closing point.
ClosedContour offset_polyline(const Polyline& shape, double radius, OffsetOptions options = {});

// Ramer-Douglas-Peucker simplification of an open point sequence.
std::vector<Point2> rdp_simplify(std::span<const Point2> points, double epsilon);

// Resamples a closed contour at a uniform arc-length step.
ClosedContour resample_contour(const ClosedContour& c, double step);

// Discrete curvature at each vertex of a closed contour, after a centered
// moving-average smoothing of the vertex positions over `smoothing_window` points.
std::vector<double> contour_curvature(const ClosedContour& c, int smoothing_window = 5);

Point2 closest_point_on_circle(Point2 center, double radius, Point2 q);

bool segments_intersect(const Segment2& s, const Segment2& t);
double point_line_distance(Point2 p, Point2 a, Point2 b);

std::vector<Point2> convex_hull(std::vector<Point2> pts);

}  // namespace tom
