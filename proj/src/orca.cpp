#include "hyp2nav/orca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hyp2nav::orca {

namespace {
constexpr double kEps = 1e-10;
}

double norm(Vec2 a) { return std::sqrt(abs_sq(a)); }

Vec2 normalized(Vec2 a) {
    const double n = norm(a);
    if (n < kEps) return {0.0, 0.0};
    return a * (1.0 / n);
}

double closest_approach(Vec2 rel_pos, Vec2 rel_vel, double dt) {
    const double vv = abs_sq(rel_vel);
    double t = 0.0;
    if (vv > 0.0) t = std::clamp(-dot(rel_pos, rel_vel) / vv, 0.0, dt);
    return norm(rel_pos + rel_vel * t);
}

Line orca_line(const AgentView& self, const AgentView& other, const OrcaParams& p) {
    const double inv_time_horizon = 1.0 / p.time_horizon;
    const Vec2 relative_position = other.pos - self.pos;
    const Vec2 relative_velocity = self.vel - other.vel;
    const double dist_sq = abs_sq(relative_position);
    const double combined_radius = self.radius + other.radius + p.safety_margin;
    const double combined_radius_sq = combined_radius * combined_radius;

    Line line;
    Vec2 u;

    if (dist_sq > combined_radius_sq) {
        // No current collision. Velocity obstacle is a truncated cone; w is the
        // vector from the cutoff center to the relative velocity.
        const Vec2 w = relative_velocity - relative_position * inv_time_horizon;
        const double w_length_sq = abs_sq(w);
        const double dot_product1 = dot(w, relative_position);

        if (dot_product1 < 0.0 && dot_product1 * dot_product1 > combined_radius_sq * w_length_sq) {
            // Project on the cutoff circle.
            const double w_length = std::sqrt(w_length_sq);
            const Vec2 unit_w = w * (1.0 / w_length);
            line.direction = {unit_w.y, -unit_w.x};
            u = unit_w * (combined_radius * inv_time_horizon - w_length);
        } else {
            // Project on a leg.
            const double leg = std::sqrt(dist_sq - combined_radius_sq);
            if (det(relative_position, w) > 0.0) {
                line.direction = Vec2{relative_position.x * leg - relative_position.y * combined_radius,
                                      relative_position.x * combined_radius + relative_position.y * leg} *
                                 (1.0 / dist_sq);
            } else {
                line.direction = -Vec2{relative_position.x * leg + relative_position.y * combined_radius,
                                       -relative_position.x * combined_radius + relative_position.y * leg} *
                                 (1.0 / dist_sq);
            }
            const double dot_product2 = dot(relative_velocity, line.direction);
            u = line.direction * dot_product2 - relative_velocity;
        }
    } else {
        // Already colliding. Push apart within one time step.
        const double inv_time_step = 1.0 / p.dt;
        const Vec2 w = relative_velocity - relative_position * inv_time_step;
        const double w_length = norm(w);
        const Vec2 unit_w = w_length < kEps ? Vec2{1.0, 0.0} : w * (1.0 / w_length);
        line.direction = {unit_w.y, -unit_w.x};
        u = unit_w * (combined_radius * inv_time_step - w_length);
    }

    line.point = self.vel + u * p.responsibility;
    return line;
}

bool linear_program1(const std::vector<Line>& lines, std::size_t line_no, double radius,
                     Vec2 opt_velocity, bool direction_opt, Vec2& result) {
    const double dot_product = dot(lines[line_no].point, lines[line_no].direction);
    const double discriminant =
        dot_product * dot_product + radius * radius - abs_sq(lines[line_no].point);

    if (discriminant < 0.0) {
        // Max speed circle fully invalidates line line_no.
        return false;
    }

    const double sqrt_discriminant = std::sqrt(discriminant);
    double t_left = -dot_product - sqrt_discriminant;
    double t_right = -dot_product + sqrt_discriminant;

    for (std::size_t i = 0; i < line_no; ++i) {
        const double denominator = det(lines[line_no].direction, lines[i].direction);
        const double numerator = det(lines[i].direction, lines[line_no].point - lines[i].point);

        if (std::abs(denominator) <= kEps) {
            // Lines are parallel.
            if (numerator < 0.0) return false;
            continue;
        }

        const double t = numerator / denominator;
        if (denominator >= 0.0) {
            t_right = std::min(t_right, t);
        } else {
            t_left = std::max(t_left, t);
        }
        if (t_left > t_right) return false;
    }

    if (direction_opt) {
        if (dot(opt_velocity, lines[line_no].direction) > 0.0) {
            result = lines[line_no].point + lines[line_no].direction * t_right;
        } else {
            result = lines[line_no].point + lines[line_no].direction * t_left;
        }
    } else {
        const double t = dot(lines[line_no].direction, opt_velocity - lines[line_no].point);
        if (t < t_left) {
            result = lines[line_no].point + lines[line_no].direction * t_left;
        } else if (t > t_right) {
            result = lines[line_no].point + lines[line_no].direction * t_right;
        } else {
            result = lines[line_no].point + lines[line_no].direction * t;
        }
    }
    return true;
}

std::size_t linear_program2(const std::vector<Line>& lines, double radius, Vec2 opt_velocity,
                            bool direction_opt, Vec2& result) {
    if (direction_opt) {
        // opt_velocity is a unit direction in this mode.
        result = opt_velocity * radius;
    } else if (abs_sq(opt_velocity) > radius * radius) {
        result = normalized(opt_velocity) * radius;
    } else {
        result = opt_velocity;
    }

    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (det(lines[i].direction, lines[i].point - result) > 0.0) {
            const Vec2 temp_result = result;
            if (!linear_program1(lines, i, radius, opt_velocity, direction_opt, result)) {
                result = temp_result;
                return i;
            }
        }
    }
    return lines.size();
}

void linear_program3(const std::vector<Line>& lines, std::size_t begin_line, double radius,
                     Vec2& result) {
    double distance = 0.0;

    for (std::size_t i = begin_line; i < lines.size(); ++i) {
        if (det(lines[i].direction, lines[i].point - result) > distance) {
            std::vector<Line> proj_lines;
            proj_lines.reserve(i);
            for (std::size_t j = 0; j < i; ++j) {
                Line line;
                const double determinant = det(lines[i].direction, lines[j].direction);
                if (std::abs(determinant) <= kEps) {
                    if (dot(lines[i].direction, lines[j].direction) > 0.0) {
                        // Same direction: line j is redundant here.
                        continue;
                    }
                    line.point = (lines[i].point + lines[j].point) * 0.5;
                } else {
                    line.point = lines[i].point +
                                 lines[i].direction *
                                     (det(lines[j].direction, lines[i].point - lines[j].point) /
                                      determinant);
                }
                line.direction = normalized(lines[j].direction - lines[i].direction);
                proj_lines.push_back(line);
            }

            const Vec2 temp_result = result;
            if (linear_program2(proj_lines, radius,
                                Vec2{-lines[i].direction.y, lines[i].direction.x}, true,
                                result) < proj_lines.size()) {
                // This should not happen except for numerical reasons; keep the
                // previous point.
                result = temp_result;
            }
            distance = det(lines[i].direction, lines[i].point - result);
        }
    }
}

Vec2 compute_new_velocity(const AgentView& self, std::span<const AgentView> others,
                          const OrcaParams& p) {
    std::vector<Line> lines;
    lines.reserve(others.size());
    const double neighbor_dist_sq = p.neighbor_dist * p.neighbor_dist;

    for (const AgentView& other : others) {
        if (abs_sq(other.pos - self.pos) > neighbor_dist_sq) continue;
        lines.push_back(orca_line(self, other, p));
    }

    Vec2 result;
    const std::size_t line_fail = linear_program2(lines, self.max_speed, self.pref_vel, false, result);
    if (line_fail < lines.size()) {
        linear_program3(lines, line_fail, self.max_speed, result);
    }
    return result;
}

}  // namespace hyp2nav::orca
