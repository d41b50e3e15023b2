#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "hyp2nav/orca.hpp"

// Episodic crowd-navigation environment: a holonomic robot steers through
// humans that run reciprocal collision avoidance among themselves and never
// react to the robot.

namespace hyp2nav::sim {

struct HumanState {
    double px = 0.0, py = 0.0;
    double vx = 0.0, vy = 0.0;
    double r = 0.3;
};

struct RobotState {
    double px = 0.0, py = 0.0;
    double vx = 0.0, vy = 0.0;
    double r = 0.3;
    double gx = 0.0, gy = 0.0;
    double v_max = 1.0;
    double theta = 0.0;  // heading, kept in [0, 2*pi)
};

struct Observation {
    RobotState robot;
    std::vector<HumanState> humans;
    double t = 0.0;

    // Row layout consumed by the networks: robot 9-vector followed by one
    // 5-vector per human.
    std::vector<double> flatten() const;
};

inline std::size_t observation_dim(std::size_t n_humans) { return 9 + 5 * n_humans; }

struct Action {
    double speed = 0.0;    // in [0, v_max]
    double heading = 0.0;  // rad
};

// 81 actions: index 0 stays put; index 1 + 16*(k-1) + j moves at speed level
// k in 1..5 and angle 2*pi*j/16. Speeds are exponentially spaced:
// v_max * (exp(k/5) - 1) / (e - 1), so level 5 is exactly v_max.
std::vector<Action> action_space(double v_max);

enum class ScenarioKind { kSimpleCircle, kComplexCircle, kComplexSquare };

ScenarioKind scenario_kind_from_string(const std::string& s);
std::string to_string(ScenarioKind kind);

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::kSimpleCircle;
    std::size_t n_humans = 5;
    double circle_radius = 4.0;
    double square_side = 8.0;
    double dt = 0.25;
    double time_limit = 30.0;
    std::uint64_t seed = 0;

    double human_radius = 0.3;
    double human_vpref = 1.0;
    double robot_radius = 0.3;
    double robot_vmax = 1.0;

    double spawn_noise = 0.5;
    double spawn_clearance = 0.2;

    double orca_tau = 5.0;
    double orca_neighbor_dist = 10.0;
};

enum class Outcome { kSuccess, kCollision, kTimeout };

std::string to_string(Outcome o);

struct EpisodeOutcome {
    Outcome kind = Outcome::kTimeout;
    double nav_time = 0.0;          // episode end time; time limit on timeout
    double cumulative_return = 0.0; // undiscounted sum of extrinsic rewards
};

// 0.25 on success, -0.25 on collision, otherwise -0.2 * d_goal plus a
// discomfort penalty d - 0.2 for every human whose surface distance d is
// below 0.2 m.
double extrinsic_reward(const Observation& obs_next, const std::optional<Outcome>& outcome);

// New velocities for all humans from their current states; humans see only
// each other.
std::vector<orca::Vec2> orca_policy(const std::vector<HumanState>& humans,
                                    const std::vector<orca::Vec2>& goals,
                                    const ScenarioConfig& cfg);

struct RobotOrcaParams {
    double responsibility = 0.5;
    double safety_margin = 0.12;
};

// Reactive baseline: one ORCA step for the robot against the current humans,
// returned as a continuous action.
Action orca_robot_action(const Observation& obs, const ScenarioConfig& cfg,
                         const RobotOrcaParams& params = {});

class Env {
  public:
    explicit Env(ScenarioConfig cfg);

    const ScenarioConfig& config() const { return cfg_; }

    Observation reset();  // uses cfg.seed
    Observation reset(std::uint64_t seed);

    struct StepResult {
        Observation obs;
        double reward = 0.0;
        bool done = false;
        std::optional<EpisodeOutcome> outcome;
    };

    // Advances one timestep; throws std::logic_error after the episode ended.
    StepResult step(const Action& action);

    const Observation& obs() const { return obs_; }
    bool done() const { return !active_; }
    const std::vector<orca::Vec2>& human_goals() const { return human_goals_; }

  private:
    void spawn(std::uint64_t seed);
    bool position_clear(double px, double py, double radius) const;

    ScenarioConfig cfg_;
    Observation obs_;
    std::vector<orca::Vec2> human_goals_;
    std::mt19937_64 rng_;
    bool active_ = false;
    int steps_ = 0;
    double return_ = 0.0;
};

struct PolicyDecision {
    Action action;
    int action_index = -1;  // -1 marks a continuous (non-grid) action
};

using Policy = std::function<PolicyDecision(const Observation&)>;

struct TraceStep {
    double t = 0.0;  // time after the step; states below are post-step
    RobotState robot;
    std::vector<HumanState> humans;
    int action_index = -1;
    double speed = 0.0;
    double heading = 0.0;
    double reward = 0.0;
    bool done = false;
};

struct Rollout {
    Observation initial;
    std::vector<TraceStep> steps;
    EpisodeOutcome outcome;
};

Rollout rollout(Env& env, const Policy& policy, std::uint64_t seed);

// One row per step: t, robot 9-vector, per-human 5-vectors, action index,
// extrinsic reward, done flag.
void write_trace_csv(const Rollout& r, std::size_t n_humans, std::ostream& out);

}  // namespace hyp2nav::sim
