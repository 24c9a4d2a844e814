#include <random>

#include "tom/planner.hpp"
#include "tom/stock.hpp"

namespace tom {

namespace {

class Draw {
public:
    explicit Draw(std::uint64_t seed) : rng_(seed) {}

    // Own mapping from raw bits so results do not depend on the standard library's distributions.
    double uniform(double lo, double hi) { return lo + (hi - lo) * (static_cast<double>(rng_() >> 11) * 0x1.0p-53); }
    int index(int n) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }
    Point2 polar(Point2 c, double r_lo, double r_hi, double a_lo_deg, double a_hi_deg) {
        const double r = uniform(r_lo, r_hi);
        const double a = uniform(a_lo_deg, a_hi_deg) * kPi / 180.0;
        return {c.x + r * std::cos(a), c.y + r * std::sin(a)};
    }

private:
    std::mt19937_64 rng_;
};

bool inside(const WorkspaceBounds& b, Point2 p) { return p.x >= b.xmin && p.x <= b.xmax && p.y >= b.ymin && p.y <= b.ymax; }

ToolSpec random_tool(Draw& d, const std::string& id, Point2 home) {
    const Pose2 pose{{home.x + d.uniform(-0.02, 0.02), home.y + d.uniform(-0.02, 0.02)}, kPi / 2 + d.uniform(-0.2, 0.2)};
    switch (d.index(3)) {
        case 0: return stock::stick(id, pose);
        case 1: return stock::hook(id, pose);
        default: return stock::y_tool(id, pose);
    }
}

std::optional<Scenario> draw_one(Draw& d, const WorkspaceBounds& bounds) {
    Observation obs;
    RobotSpec left = stock::left_arm();
    RobotSpec right = stock::right_arm();
    for (RobotSpec* r : {&left, &right}) {
        r->base = {r->base.x + d.uniform(-0.02, 0.02), r->base.y + d.uniform(-0.02, 0.02)};
        r->reach += d.uniform(-0.02, 0.02);
    }
    obs.robots = {left, right};
    obs.block = {"block", {}, d.uniform(0.025, 0.035)};
    const Point2 homes[] = {{-0.35, -0.12}, {0.35, -0.12}, {-0.55, -0.12}, {0.55, -0.12}};

    std::string instruction = "push the block to the target";
    const int kind = d.index(4);
    const bool right_side = d.index(2) == 1;
    const RobotSpec& a = right_side ? right : left;
    const RobotSpec& b = right_side ? left : right;
    // Angles measured from the outer side of arm a.
    auto outward = [&](double lo, double hi) { return right_side ? std::pair{lo, hi} : std::pair{180.0 - hi, 180.0 - lo}; };

    if (kind == 0) {
        const auto [lo, hi] = outward(30.0, 150.0);
        obs.block.center = d.polar(a.base, 0.22, 0.42, lo, hi);
        obs.target = d.polar(a.base, 0.22, 0.45, lo, hi);
        if (distance(obs.block.center, *obs.target) < 0.1) return std::nullopt;
        const int n_tools = 1 + d.index(2);
        for (int i = 0; i < n_tools; ++i) obs.tools.push_back(random_tool(d, "tool" + std::to_string(i), homes[d.index(4)]));
    } else if (kind == 1 || kind == 2) {
        const auto [lo, hi] = outward(10.0, 70.0);
        obs.block.center = d.polar(a.base, 0.28, 0.42, lo, hi);
        const auto [blo, bhi] = right_side ? std::pair{110.0, 170.0} : std::pair{10.0, 70.0};
        obs.target = d.polar(b.base, 0.22, 0.42, blo, bhi);
        if (distance(b.base, obs.block.center) <= b.reach || distance(a.base, *obs.target) <= a.reach) {
            return std::nullopt;
        }
        const int n_tools = kind == 1 ? 2 : 1;
        for (int i = 0; i < n_tools; ++i) obs.tools.push_back(random_tool(d, "tool" + std::to_string(i), homes[d.index(4)]));
    } else {
        const double angle = d.uniform(65.0, 90.0);
        const Point2 apex{0.20 + d.uniform(-0.03, 0.03), 0.20 + d.uniform(-0.03, 0.03)};
        Observation corner = stock::wall_corner(angle, apex).observation;
        if (!right_side) corner = mirror(corner);
        obs.block.center = corner.block.center;
        obs.walls = corner.walls;
        instruction = "drag the block out of the corner";
        obs.tools.push_back(stock::hook("tool0", {homes[right_side ? 1 : 0], kPi / 2}));
        if (d.index(2) == 1) obs.tools.push_back(random_tool(d, "tool1", homes[right_side ? 3 : 2]));
        if (d.index(2) == 1) {
            instruction = "drag the block out of the corner and push it to the target";
            const auto [lo, hi] = outward(40.0, 140.0);
            obs.target = d.polar(a.base, 0.22, 0.42, lo, hi);
            Observation probe = obs;
            probe.block.center = *obs.target;
            if (block_confined(probe)) return std::nullopt;
        }
    }

    if (!inside(bounds, obs.block.center) || (obs.target && !inside(bounds, *obs.target))) return std::nullopt;

    Scenario sc;
    sc.observation = obs;
    sc.instruction = instruction;
    try {
        sc.expected_plan = plan_rule_based(embed(instruction, obs));
    } catch (const Error&) {
        return std::nullopt;
    }
    if (!validate_plan(sc.expected_plan, obs).ok()) return std::nullopt;
    return sc;
}

}  // namespace

std::vector<Scenario> generate_scenarios(std::uint64_t seed, int count, const WorkspaceBounds& bounds) {
    if (count < 1) throw Error(ErrorCode::InvalidParameter, "scenario count must be at least 1");
    if (!(bounds.xmax > bounds.xmin && bounds.ymax > bounds.ymin)) {
        throw Error(ErrorCode::InvalidParameter, "workspace bounds are empty");
    }
    std::vector<Scenario> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        // Each scenario gets its own stream so batch prefixes are stable.
        const std::uint64_t sub = seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(i);
        Draw d(sub);
        std::optional<Scenario> sc;
        for (int attempt = 0; attempt < 1000 && !sc; ++attempt) sc = draw_one(d, bounds);
        if (!sc) throw Error(ErrorCode::Infeasible, "could not draw a feasible scenario within the bounds");
        sc->seed = sub;
        out.push_back(std::move(*sc));
    }
    return out;
}

}  // namespace tom
