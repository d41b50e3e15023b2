#include <cmath>
#include <vector>

#include "doctest.h"
#include "hyp2nav/orca.hpp"

using namespace hyp2nav::orca;

namespace {

struct MiniAgent {
    Vec2 pos;
    Vec2 vel;
    Vec2 goal;
    double radius = 0.3;
    double max_speed = 1.0;
};

Vec2 pref_velocity(const MiniAgent& a, double dt) {
    const Vec2 to_goal = a.goal - a.pos;
    const double d = norm(to_goal);
    if (d < 1e-12) return {0.0, 0.0};
    return to_goal * (std::min(a.max_speed, d / dt) / d);
}

}  // namespace

TEST_CASE("clear path returns preferred velocity") {
    AgentView self{{0.0, 0.0}, {0.0, 0.0}, {0.6, 0.3}, 0.3, 1.0};
    AgentView far{{8.0, 8.0}, {0.0, 0.0}, {0.0, 0.0}, 0.3, 1.0};
    std::vector<AgentView> others{far};
    OrcaParams p;

    const Vec2 v = compute_new_velocity(self, others, p);
    CHECK(v.x == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(v.y == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("preferred velocity beyond max speed is capped") {
    AgentView self{{0.0, 0.0}, {0.0, 0.0}, {3.0, 4.0}, 0.3, 1.0};
    std::vector<AgentView> others;
    OrcaParams p;

    const Vec2 v = compute_new_velocity(self, others, p);
    CHECK(norm(v) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(v.x == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(v.y == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("agents beyond neighbor distance are ignored") {
    AgentView self{{0.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}, 0.3, 1.0};
    // Head-on but 12 m away with neighbor_dist 10.
    AgentView other{{12.0, 0.0}, {-1.0, 0.0}, {-1.0, 0.0}, 0.3, 1.0};
    std::vector<AgentView> others{other};
    OrcaParams p;

    const Vec2 v = compute_new_velocity(self, others, p);
    CHECK(v.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(v.y == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("head-on pair produces antisymmetric avoidance") {
    AgentView a{{-2.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}, 0.3, 1.0};
    AgentView b{{2.0, 0.0}, {-1.0, 0.0}, {-1.0, 0.0}, 0.3, 1.0};
    OrcaParams p;

    std::vector<AgentView> others_a{b};
    std::vector<AgentView> others_b{a};
    const Vec2 va = compute_new_velocity(a, others_a, p);
    const Vec2 vb = compute_new_velocity(b, others_b, p);

    // The configuration maps to itself under 180 degree rotation, so the
    // resolved velocities must be exact negatives: both agents deviate to
    // the same side relative to their own headings and pass each other.
    CHECK(va.x == doctest::Approx(-vb.x).epsilon(1e-14));
    CHECK(va.y == doctest::Approx(-vb.y).epsilon(1e-14));
    CHECK(std::abs(va.y) > 1e-6);
}

TEST_CASE("half-plane is satisfied by resolved velocity") {
    AgentView a{{-1.0, 0.05}, {1.0, 0.0}, {1.0, 0.0}, 0.3, 1.0};
    AgentView b{{1.0, -0.05}, {-1.0, 0.0}, {-1.0, 0.0}, 0.3, 1.0};
    OrcaParams p;

    const Line line = orca_line(a, b, p);
    std::vector<AgentView> others{b};
    const Vec2 v = compute_new_velocity(a, others, p);
    // Feasible side: det(direction, point - v) <= 0.
    CHECK(det(line.direction, line.point - v) <= 1e-12);
    CHECK(norm(v) <= 1.0 + 1e-12);
}

TEST_CASE("overlapping agents separate within a step") {
    AgentView a{{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, 0.3, 1.0};
    AgentView b{{0.4, 0.0}, {0.0, 0.0}, {0.0, 0.0}, 0.3, 1.0};
    OrcaParams p;
    p.responsibility = 0.5;

    std::vector<AgentView> others{b};
    const Vec2 v = compute_new_velocity(a, others, p);
    // Collision branch pushes a away from b.
    CHECK(v.x < -1e-6);
}

TEST_CASE("closest approach helper") {
    // Static: distance is the norm of rel_pos.
    CHECK(closest_approach({3.0, 4.0}, {0.0, 0.0}, 0.25) == doctest::Approx(5.0));
    // Crossing through origin within the window.
    CHECK(closest_approach({-1.0, 0.0}, {8.0, 0.0}, 0.25) == doctest::Approx(0.0));
    // Closest point outside the window: clamped to endpoint.
    CHECK(closest_approach({-1.0, 0.5}, {1.0, 0.0}, 0.25) ==
          doctest::Approx(std::sqrt(0.75 * 0.75 + 0.25)));
}

TEST_CASE("eight agents swap antipodal positions without collisions") {
    const double circle_radius = 4.0;
    const double dt = 0.25;
    const std::size_t n = 8;

    std::vector<MiniAgent> agents(n);
    for (std::size_t i = 0; i < n; ++i) {
        // Non-uniform spacing on the circle; perfectly symmetric starts jam
        // into a stable contact ring at the center. Every goal is still the
        // exact antipode of the start.
        const double ang = 2.0 * M_PI * static_cast<double>(i) / n + 0.15 * static_cast<double>(i);
        agents[i].pos = {circle_radius * std::cos(ang), circle_radius * std::sin(ang)};
        agents[i].goal = -agents[i].pos;
    }

    OrcaParams p;
    p.dt = dt;
    // Plan with a centimeter of clearance so boundary-riding contacts stay
    // strictly outside the physical radii.
    p.safety_margin = 0.01;

    double min_sep = 1e9;
    bool all_arrived = false;
    for (int step = 0; step < 2000 && !all_arrived; ++step) {
        std::vector<Vec2> new_vel(n);
        for (std::size_t i = 0; i < n; ++i) {
            AgentView self{agents[i].pos, agents[i].vel, pref_velocity(agents[i], dt),
                           agents[i].radius, agents[i].max_speed};
            std::vector<AgentView> others;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                others.push_back({agents[j].pos, agents[j].vel, {0, 0}, agents[j].radius,
                                  agents[j].max_speed});
            }
            new_vel[i] = compute_new_velocity(self, others, p);
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double sep = closest_approach(agents[j].pos - agents[i].pos,
                                                    new_vel[j] - new_vel[i], dt);
                min_sep = std::min(min_sep, sep);
            }
        }
        all_arrived = true;
        for (std::size_t i = 0; i < n; ++i) {
            agents[i].vel = new_vel[i];
            agents[i].pos = agents[i].pos + new_vel[i] * dt;
            if (norm(agents[i].goal - agents[i].pos) > 0.05) all_arrived = false;
        }
    }

    CHECK(all_arrived);
    CHECK(min_sep >= 0.6);
}
