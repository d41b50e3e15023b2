#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Optimal Reciprocal Collision Avoidance, 2-D. Each call builds the ORCA
// half-planes induced by the neighbors and solves the small linear program
// that picks the feasible velocity closest to the preferred one, with the
// standard 3-D fallback when the planes are infeasible.

namespace hyp2nav::orca {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double det(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double abs_sq(Vec2 a) { return dot(a, a); }
double norm(Vec2 a);
Vec2 normalized(Vec2 a);

struct Line {
    Vec2 point;
    Vec2 direction;
};

struct AgentView {
    Vec2 pos;
    Vec2 vel;
    Vec2 pref_vel;
    double radius = 0.3;
    double max_speed = 1.0;
};

struct OrcaParams {
    double time_horizon = 5.0;
    double neighbor_dist = 10.0;
    double dt = 0.25;
    // Fraction of the correction this agent takes on itself. 0.5 is the
    // reciprocal split between two cooperating agents; 1.0 makes this agent
    // yield fully (used when the other side cannot see it).
    double responsibility = 0.5;
    // Extra clearance added to every combined radius.
    double safety_margin = 0.0;
};

// Half-plane constraint induced on `self` by `other`.
Line orca_line(const AgentView& self, const AgentView& other, const OrcaParams& p);

// Minimum of |rel_pos + t * rel_vel| over t in [0, dt]. Used for
// continuous-time collision checks between linearly moving discs.
double closest_approach(Vec2 rel_pos, Vec2 rel_vel, double dt);

// New velocity for `self` among `others`.
Vec2 compute_new_velocity(const AgentView& self, std::span<const AgentView> others,
                          const OrcaParams& p);

// Exposed for direct testing of the solver.
bool linear_program1(const std::vector<Line>& lines, std::size_t line_no, double radius,
                     Vec2 opt_velocity, bool direction_opt, Vec2& result);
std::size_t linear_program2(const std::vector<Line>& lines, double radius, Vec2 opt_velocity,
                            bool direction_opt, Vec2& result);
void linear_program3(const std::vector<Line>& lines, std::size_t begin_line, double radius,
                     Vec2& result);

}  // namespace hyp2nav::orca
