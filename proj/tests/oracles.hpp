#pragma once

// Independent reference computations for the tests. These deliberately avoid the
// library's own algorithms so a shared bug cannot make a test pass.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "tom/geometry.hpp"
#include "tom/manoeuvrability.hpp"

namespace oracle {

using tom::Point2;

inline double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline double point_segment_distance(Point2 p, Point2 a, Point2 b) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return dist(p, {a.x + t * vx, a.y + t * vy});
}

inline double stadium_area(double length, double r) { return length * 2.0 * r + std::acos(-1.0) * r * r; }

// Shoelace area of a vertex list.
inline double polygon_area(const std::vector<Point2>& pts) {
    double s = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Point2& p = pts[i];
        const Point2& q = pts[(i + 1) % pts.size()];
        s += p.x * q.y - q.x * p.y;
    }
    return 0.5 * std::abs(s);
}

// Even-odd ray casting.
inline bool point_in_polygon(const std::vector<Point2>& pts, Point2 q) {
    bool inside = false;
    for (std::size_t i = 0, j = pts.size() - 1; i < pts.size(); j = i++) {
        const Point2& a = pts[i];
        const Point2& b = pts[j];
        if ((a.y > q.y) != (b.y > q.y) && q.x < (b.x - a.x) * (q.y - a.y) / (b.y - a.y) + a.x) inside = !inside;
    }
    return inside;
}

// Is the cell centre inside the filled Gaussian lobe on one side of segment (a,b)?
inline bool in_lobe(Point2 a, Point2 b, bool left, double sigma_frac, Point2 c) {
    const double L = dist(a, b);
    const double ux = (b.x - a.x) / L, uy = (b.y - a.y) / L;
    const double t = (c.x - a.x) * ux + (c.y - a.y) * uy;
    double d = -(c.x - a.x) * uy + (c.y - a.y) * ux;  // positive on the left
    if (!left) d = -d;
    if (t < 0.0 || t > L || d < 0.0) return false;
    const double sigma = sigma_frac * L;
    return d <= 0.5 * L * std::exp(-(t - 0.5 * L) * (t - 0.5 * L) / (2.0 * sigma * sigma));
}

// Cell-by-cell count of lobes covering each cell centre.
inline std::vector<int> mask_sum(const std::vector<Point2>& poly, const tom::GridSpec& g, double sigma_frac) {
    std::vector<int> out(static_cast<std::size_t>(g.width) * g.height, 0);
    for (int iy = 0; iy < g.height; ++iy) {
        for (int ix = 0; ix < g.width; ++ix) {
            const Point2 c{g.origin.x + (ix + 0.5) * g.cell_size, g.origin.y + (iy + 0.5) * g.cell_size};
            int n = 0;
            for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
                n += in_lobe(poly[i], poly[i + 1], true, sigma_frac, c);
                n += in_lobe(poly[i], poly[i + 1], false, sigma_frac, c);
            }
            out[static_cast<std::size_t>(iy) * g.width + ix] = n;
        }
    }
    return out;
}

// Grid value at p by direct floor lookup, 0 outside.
inline double grid_value(const tom::ManoeuvrabilityGrid& g, Point2 p) {
    const auto& s = g.spec;
    const double fx = std::floor((p.x - s.origin.x) / s.cell_size);
    const double fy = std::floor((p.y - s.origin.y) / s.cell_size);
    if (fx < 0 || fy < 0 || fx >= s.width || fy >= s.height) return 0.0;
    return g.values[static_cast<std::size_t>(fy) * s.width + static_cast<std::size_t>(fx)];
}

// Exhaustive argmin of the selection metric; lowest index wins ties.
inline std::size_t brute_select(const std::vector<Point2>& cands, const tom::ManoeuvrabilityGrid& g,
                                const tom::AffordanceVector& a) {
    const Point2 anchor{a.origin.x + a.direction.dx * a.magnitude, a.origin.y + a.direction.dy * a.magnitude};
    const double diag = std::hypot(g.spec.width * g.spec.cell_size, g.spec.height * g.spec.cell_size);
    std::size_t best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const double score = (1.0 - grid_value(g, cands[i])) + dist(cands[i], anchor) / diag;
        if (score < best_score - 1e-12) {
            best_score = score;
            best = i;
        }
    }
    return best;
}

// Random tool polyline with segments long enough to stay well-conditioned.
inline std::vector<Point2> random_polyline(std::mt19937_64& rng, int min_segments = 1, int max_segments = 5) {
    std::uniform_int_distribution<int> nseg(min_segments, max_segments);
    std::uniform_real_distribution<double> len(0.04, 0.2), turn(-2.2, 2.2), start(-0.1, 0.1);
    const int n = nseg(rng);
    std::vector<Point2> pts{{start(rng), start(rng)}};
    double heading = std::uniform_real_distribution<double>(-3.14, 3.14)(rng);
    for (int i = 0; i < n; ++i) {
        const double l = len(rng);
        pts.push_back({pts.back().x + l * std::cos(heading), pts.back().y + l * std::sin(heading)});
        heading += turn(rng);
    }
    return pts;
}

// Centroid of the intersection of two disks by uniform sampling over the first disk's box.
inline Point2 monte_carlo_lens(Point2 c1, double r1, Point2 c2, double r2, int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(c1.x - r1, c1.x + r1), uy(c1.y - r1, c1.y + r1);
    double sx = 0, sy = 0;
    long n = 0;
    for (int i = 0; i < samples; ++i) {
        const Point2 p{ux(rng), uy(rng)};
        if (dist(p, c1) <= r1 && dist(p, c2) <= r2) {
            sx += p.x;
            sy += p.y;
            ++n;
        }
    }
    return {sx / n, sy / n};
}

// Disk pushed out of a set of segments by many tiny relaxation moves.
inline Point2 micro_step_push(const std::vector<std::pair<Point2, Point2>>& segs, Point2 c, double r, int iters = 20000) {
    for (int k = 0; k < iters; ++k) {
        double fx = 0, fy = 0;
        for (const auto& [a, b] : segs) {
            const double vx = b.x - a.x, vy = b.y - a.y;
            double t = ((c.x - a.x) * vx + (c.y - a.y) * vy) / (vx * vx + vy * vy);
            t = std::clamp(t, 0.0, 1.0);
            const Point2 q{a.x + t * vx, a.y + t * vy};
            const double d = dist(c, q);
            if (d < r && d > 0) {
                fx += (c.x - q.x) / d * (r - d);
                fy += (c.y - q.y) / d * (r - d);
            }
        }
        if (std::hypot(fx, fy) < 1e-12) break;
        c.x += 0.05 * fx;
        c.y += 0.05 * fy;
    }
    return c;
}

}  // namespace oracle
