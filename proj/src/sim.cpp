#include "hyp2nav/sim.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace hyp2nav::sim {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
// Humans plan with a centimeter of extra clearance so that ORCA's
// boundary-riding contacts stay strictly outside the physical radii.
constexpr double kPlanningBuffer = 0.01;

double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0.0) a += kTwoPi;
    return a;
}

orca::Vec2 pref_velocity(orca::Vec2 pos, orca::Vec2 goal, double v_cap, double dt) {
    const orca::Vec2 to_goal = goal - pos;
    const double d = orca::norm(to_goal);
    if (d < 1e-12) return {0.0, 0.0};
    return to_goal * (std::min(v_cap, d / dt) / d);
}

}  // namespace

std::vector<double> Observation::flatten() const {
    std::vector<double> out;
    out.reserve(observation_dim(humans.size()));
    out.insert(out.end(), {robot.px, robot.py, robot.vx, robot.vy, robot.r, robot.gx,
                           robot.gy, robot.v_max, robot.theta});
    for (const HumanState& h : humans) {
        out.insert(out.end(), {h.px, h.py, h.vx, h.vy, h.r});
    }
    return out;
}

std::vector<Action> action_space(double v_max) {
    if (!(v_max > 0.0)) throw std::invalid_argument("action_space: v_max must be positive");
    std::vector<Action> actions;
    actions.reserve(81);
    actions.push_back({0.0, 0.0});
    const double denom = std::exp(1.0) - 1.0;
    for (int k = 1; k <= 5; ++k) {
        const double speed = v_max * (std::exp(static_cast<double>(k) / 5.0) - 1.0) / denom;
        for (int j = 0; j < 16; ++j) {
            actions.push_back({speed, kTwoPi * static_cast<double>(j) / 16.0});
        }
    }
    return actions;
}

ScenarioKind scenario_kind_from_string(const std::string& s) {
    if (s == "simple-circle") return ScenarioKind::kSimpleCircle;
    if (s == "complex-circle") return ScenarioKind::kComplexCircle;
    if (s == "complex-square") return ScenarioKind::kComplexSquare;
    throw std::invalid_argument("unknown scenario kind: " + s);
}

std::string to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::kSimpleCircle: return "simple-circle";
        case ScenarioKind::kComplexCircle: return "complex-circle";
        case ScenarioKind::kComplexSquare: return "complex-square";
    }
    return "?";
}

std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::kSuccess: return "success";
        case Outcome::kCollision: return "collision";
        case Outcome::kTimeout: return "timeout";
    }
    return "?";
}

double extrinsic_reward(const Observation& obs_next, const std::optional<Outcome>& outcome) {
    if (outcome == Outcome::kSuccess) return 0.25;
    if (outcome == Outcome::kCollision) return -0.25;
    const RobotState& rob = obs_next.robot;
    const double d_g = std::hypot(rob.px - rob.gx, rob.py - rob.gy);
    double reward = -0.2 * d_g;
    for (const HumanState& h : obs_next.humans) {
        const double d = std::hypot(rob.px - h.px, rob.py - h.py) - rob.r - h.r;
        if (d < 0.2) reward += d - 0.2;
    }
    return reward;
}

std::vector<orca::Vec2> orca_policy(const std::vector<HumanState>& humans,
                                    const std::vector<orca::Vec2>& goals,
                                    const ScenarioConfig& cfg) {
    if (humans.size() != goals.size()) {
        throw std::invalid_argument("orca_policy: humans/goals size mismatch");
    }
    orca::OrcaParams p;
    p.time_horizon = cfg.orca_tau;
    p.neighbor_dist = cfg.orca_neighbor_dist;
    p.dt = cfg.dt;
    p.responsibility = 0.5;
    p.safety_margin = kPlanningBuffer;

    std::vector<orca::Vec2> out(humans.size());
    for (std::size_t i = 0; i < humans.size(); ++i) {
        const HumanState& h = humans[i];
        orca::AgentView self{{h.px, h.py}, {h.vx, h.vy},
                             pref_velocity({h.px, h.py}, goals[i], cfg.human_vpref, cfg.dt),
                             h.r, cfg.human_vpref};
        std::vector<orca::AgentView> others;
        others.reserve(humans.size() - 1);
        for (std::size_t j = 0; j < humans.size(); ++j) {
            if (j == i) continue;
            const HumanState& o = humans[j];
            others.push_back({{o.px, o.py}, {o.vx, o.vy}, {0.0, 0.0}, o.r, cfg.human_vpref});
        }
        out[i] = orca::compute_new_velocity(self, others, p);
    }
    return out;
}

Action orca_robot_action(const Observation& obs, const ScenarioConfig& cfg,
                         const RobotOrcaParams& params) {
    const RobotState& rob = obs.robot;
    orca::OrcaParams p;
    p.time_horizon = cfg.orca_tau;
    p.neighbor_dist = cfg.orca_neighbor_dist;
    p.dt = cfg.dt;
    p.responsibility = params.responsibility;
    p.safety_margin = params.safety_margin;

    orca::AgentView self{{rob.px, rob.py}, {rob.vx, rob.vy},
                         pref_velocity({rob.px, rob.py}, {rob.gx, rob.gy}, rob.v_max, cfg.dt),
                         rob.r, rob.v_max};
    std::vector<orca::AgentView> others;
    others.reserve(obs.humans.size());
    for (const HumanState& h : obs.humans) {
        others.push_back({{h.px, h.py}, {h.vx, h.vy}, {0.0, 0.0}, h.r, cfg.human_vpref});
    }
    const orca::Vec2 v = orca::compute_new_velocity(self, others, p);
    // The infeasible-case fallback can overshoot the cap by rounding; clamp
    // to the actuator limit.
    const double speed = std::min(orca::norm(v), rob.v_max);
    if (speed < 1e-12) return {0.0, rob.theta};
    return {speed, wrap_angle(std::atan2(v.y, v.x))};
}

Env::Env(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
    if (!(cfg_.dt > 0.0)) throw std::invalid_argument("Env: timestep must be positive");
    if (!(cfg_.time_limit > 0.0)) throw std::invalid_argument("Env: time limit must be positive");
}

bool Env::position_clear(double px, double py, double radius) const {
    const RobotState& rob = obs_.robot;
    const double min_robot = radius + rob.r + cfg_.spawn_clearance;
    if (std::hypot(px - rob.px, py - rob.py) < min_robot) return false;
    if (std::hypot(px - rob.gx, py - rob.gy) < min_robot) return false;
    for (std::size_t i = 0; i < obs_.humans.size(); ++i) {
        const HumanState& h = obs_.humans[i];
        const double min_h = radius + h.r + cfg_.spawn_clearance;
        if (std::hypot(px - h.px, py - h.py) < min_h) return false;
        if (std::hypot(px - human_goals_[i].x, py - human_goals_[i].y) < min_h) return false;
    }
    return true;
}

void Env::spawn(std::uint64_t seed) {
    rng_.seed(seed);
    obs_ = Observation{};
    human_goals_.clear();

    RobotState& rob = obs_.robot;
    rob.r = cfg_.robot_radius;
    rob.v_max = cfg_.robot_vmax;
    rob.px = 0.0;
    rob.py = -cfg_.circle_radius;
    rob.gx = 0.0;
    rob.gy = cfg_.circle_radius;
    rob.theta = wrap_angle(std::atan2(rob.gy - rob.py, rob.gx - rob.px));

    std::uniform_real_distribution<double> uang(0.0, kTwoPi);
    std::uniform_real_distribution<double> unoise(-cfg_.spawn_noise, cfg_.spawn_noise);
    const double half = cfg_.kind == ScenarioKind::kComplexSquare ? cfg_.square_side / 2.0
                                                                  : cfg_.circle_radius;
    std::uniform_real_distribution<double> uarena(-half, half);

    const std::size_t n_structured = std::min<std::size_t>(cfg_.n_humans, 5);
    for (std::size_t i = 0; i < cfg_.n_humans; ++i) {
        HumanState h;
        h.r = cfg_.human_radius;
        orca::Vec2 goal;
        if (i < n_structured) {
            // On the circle (or square perimeter) with the goal at the
            // antipode, plus positional noise.
            for (;;) {
                double bx, by;
                if (cfg_.kind == ScenarioKind::kComplexSquare) {
                    const double u = uang(rng_) / kTwoPi * 4.0;  // perimeter parameter in [0,4)
                    const int side = static_cast<int>(u);
                    const double f = (u - side) * cfg_.square_side - half;
                    switch (side) {
                        case 0: bx = f; by = -half; break;
                        case 1: bx = half; by = f; break;
                        case 2: bx = -f; by = half; break;
                        default: bx = -half; by = -f; break;
                    }
                } else {
                    const double ang = uang(rng_);
                    bx = cfg_.circle_radius * std::cos(ang);
                    by = cfg_.circle_radius * std::sin(ang);
                }
                const double px = bx + unoise(rng_);
                const double py = by + unoise(rng_);
                if (position_clear(px, py, h.r)) {
                    h.px = px;
                    h.py = py;
                    goal = {-px, -py};
                    break;
                }
            }
        } else {
            for (;;) {
                const double px = uarena(rng_);
                const double py = uarena(rng_);
                if (position_clear(px, py, h.r)) {
                    h.px = px;
                    h.py = py;
                    break;
                }
            }
            goal = {uarena(rng_), uarena(rng_)};
        }
        obs_.humans.push_back(h);
        human_goals_.push_back(goal);
    }

    obs_.t = 0.0;
    steps_ = 0;
    return_ = 0.0;
    active_ = true;
}

Observation Env::reset() { return reset(cfg_.seed); }

Observation Env::reset(std::uint64_t seed) {
    spawn(seed);
    return obs_;
}

Env::StepResult Env::step(const Action& action) {
    if (!active_) throw std::logic_error("Env::step: episode already ended");
    if (action.speed < -1e-12 || action.speed > cfg_.robot_vmax + 1e-9) {
        throw std::invalid_argument("Env::step: action speed out of range");
    }

    RobotState& rob = obs_.robot;
    const orca::Vec2 robot_vel{action.speed * std::cos(action.heading),
                               action.speed * std::sin(action.heading)};
    const std::vector<orca::Vec2> human_vel = orca_policy(obs_.humans, human_goals_, cfg_);

    // Continuous-time collision test over this step's linear motions.
    bool collision = false;
    for (std::size_t i = 0; i < obs_.humans.size(); ++i) {
        const HumanState& h = obs_.humans[i];
        const double sep = orca::closest_approach({h.px - rob.px, h.py - rob.py},
                                                  human_vel[i] - robot_vel, cfg_.dt);
        if (sep < rob.r + h.r) {
            collision = true;
            break;
        }
    }

    rob.px += robot_vel.x * cfg_.dt;
    rob.py += robot_vel.y * cfg_.dt;
    rob.vx = robot_vel.x;
    rob.vy = robot_vel.y;
    if (action.speed > 0.0) rob.theta = wrap_angle(action.heading);

    for (std::size_t i = 0; i < obs_.humans.size(); ++i) {
        HumanState& h = obs_.humans[i];
        h.px += human_vel[i].x * cfg_.dt;
        h.py += human_vel[i].y * cfg_.dt;
        h.vx = human_vel[i].x;
        h.vy = human_vel[i].y;
        if (cfg_.kind != ScenarioKind::kSimpleCircle) {
            // Arrived humans pick a fresh random destination.
            const orca::Vec2 to_goal = human_goals_[i] - orca::Vec2{h.px, h.py};
            if (orca::norm(to_goal) < h.r) {
                const double half = cfg_.kind == ScenarioKind::kComplexSquare
                                        ? cfg_.square_side / 2.0
                                        : cfg_.circle_radius;
                std::uniform_real_distribution<double> uarena(-half, half);
                human_goals_[i] = {uarena(rng_), uarena(rng_)};
            }
        }
    }

    ++steps_;
    obs_.t = static_cast<double>(steps_) * cfg_.dt;

    const bool success = std::hypot(rob.px - rob.gx, rob.py - rob.gy) < rob.r;
    const bool timeout = obs_.t >= cfg_.time_limit - 1e-12;

    std::optional<EpisodeOutcome> outcome;
    std::optional<Outcome> kind;
    if (collision) {
        kind = Outcome::kCollision;
    } else if (success) {
        kind = Outcome::kSuccess;
    } else if (timeout) {
        kind = Outcome::kTimeout;
    }

    const double reward = extrinsic_reward(obs_, kind);
    return_ += reward;

    if (kind) {
        active_ = false;
        outcome = EpisodeOutcome{*kind, obs_.t, return_};
    }
    return {obs_, reward, kind.has_value(), outcome};
}

Rollout rollout(Env& env, const Policy& policy, std::uint64_t seed) {
    Rollout r;
    r.initial = env.reset(seed);
    for (;;) {
        const PolicyDecision d = policy(env.obs());
        const Env::StepResult s = env.step(d.action);
        r.steps.push_back({s.obs.t, s.obs.robot, s.obs.humans, d.action_index, d.action.speed,
                           d.action.heading, s.reward, s.done});
        if (s.done) {
            r.outcome = *s.outcome;
            break;
        }
    }
    return r;
}

namespace {
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace

void write_trace_csv(const Rollout& r, std::size_t n_humans, std::ostream& out) {
    out << "t,r_px,r_py,r_vx,r_vy,r_r,r_gx,r_gy,r_vmax,r_theta";
    for (std::size_t i = 0; i < n_humans; ++i) {
        out << ",h" << i << "_px,h" << i << "_py,h" << i << "_vx,h" << i << "_vy,h" << i << "_r";
    }
    out << ",action,r_e,done\n";
    for (const TraceStep& s : r.steps) {
        out << fmt(s.t);
        const RobotState& rs = s.robot;
        for (double v : {rs.px, rs.py, rs.vx, rs.vy, rs.r, rs.gx, rs.gy, rs.v_max, rs.theta}) {
            out << ',' << fmt(v);
        }
        for (const HumanState& h : s.humans) {
            for (double v : {h.px, h.py, h.vx, h.vy, h.r}) out << ',' << fmt(v);
        }
        out << ',' << s.action_index << ',' << fmt(s.reward) << ',' << (s.done ? 1 : 0) << '\n';
    }
}

}  // namespace hyp2nav::sim
