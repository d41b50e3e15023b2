#pragma once

#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "hyp2nav/curiosity.hpp"
#include "hyp2nav/optim.hpp"
#include "hyp2nav/planner.hpp"
#include "hyp2nav/sim.hpp"

// Double-dueling TD learning on the combined extrinsic+intrinsic reward:
// epsilon-greedy collection into a uniform replay ring, Huber TD steps where
// the online net picks the bootstrap action and the target net prices it,
// and periodic greedy evaluation that drives best-checkpoint selection. The
// curiosity net trains jointly, weighted by its lambda, and recomputes the
// intrinsic bonus fresh for every sampled batch so the bonus tracks the
// current predictor rather than the stale one from collection time.

namespace hyp2nav::train {

struct Transition {
    std::vector<double> w_t;  // flattened observation
    std::int32_t action = 0;
    double reward_e = 0.0;    // extrinsic only
    bool done = false;
    std::vector<double> w_next;
};

// Fixed-capacity ring with FIFO eviction and uniform sampling.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t i) const { return items_[i]; }

    // n independent uniform draws, with replacement. The pointers stay valid
    // until the next push. Throws std::logic_error when size < n.
    std::vector<const Transition*> sample(std::size_t n, std::mt19937_64& rng) const;

  private:
    std::size_t capacity_;
    std::size_t next_ = 0;  // ring write position once full
    std::vector<Transition> items_;
};

struct TrainRunConfig {
    std::size_t episodes = 10000;
    std::size_t eval_every = 500;  // episodes between greedy evaluations
    std::size_t eval_episodes = 100;
    double lr = 1e-3;
    double gamma = 0.9;
    std::size_t batch_size = 128;
    std::size_t capacity = 100000;
    std::size_t warmup = 2000;      // transitions collected before training
    std::size_t sync_every = 1000;  // train steps between target syncs
    std::uint64_t seed = 0;

    void validate() const;  // throws std::invalid_argument
};

// Deterministic per-stream seed derivation (splitmix64 of seed and stream),
// so episode i of a run and episode j of an evaluation never share an RNG
// stream by accident.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream);

struct EvalResult {
    double success_rate = 0.0;  // fraction in [0, 1]
    double nav_time = 0.0;      // mean over successes; time limit when none
    double avg_return = 0.0;    // mean over episodes of sum_t gamma^t r^e_t
};

// Greedy rollouts over episodes seeded substream_seed(seed, i); pure in
// (parameters, scenario, n_episodes, seed, gamma).
EvalResult evaluate(const sim::Policy& policy, const sim::ScenarioConfig& scenario,
                    std::size_t n_episodes, std::uint64_t seed, double gamma);
EvalResult evaluate(planner::PlannerNet& net, const sim::ScenarioConfig& scenario,
                    std::size_t n_episodes, std::uint64_t seed, double gamma);

struct MetricsRow {
    std::size_t episode = 0;
    double success_rate = 0.0;
    double nav_time = 0.0;
    double avg_return = 0.0;
    double mean_intrinsic = 0.0;  // over train steps since the previous row
    double epsilon = 0.0;         // schedule value at the logged episode count
};

// Header plus one row per evaluation, full double precision.
void write_metrics_csv(const std::vector<MetricsRow>& rows, std::ostream& out);

struct RunResult {
    std::vector<MetricsRow> rows;
    double best_success = -1.0;  // -1 when no evaluation ever ran
    double best_return = 0.0;
    std::size_t best_episode = 0;
    bool checkpoint_written = false;
};

class Trainer {
  public:
    // Validates that the curiosity net matches the planner's ball dimension
    // and the scenario's observation length; throws std::invalid_argument.
    Trainer(sim::ScenarioConfig scenario, planner::PolicyConfig policy_cfg,
            curiosity::CuriosityConfig curiosity_cfg, TrainRunConfig cfg);

    planner::PlannerNet& online() { return online_; }
    planner::PlannerNet& target() { return target_; }
    curiosity::CuriosityNet& curiosity() { return curiosity_; }
    ReplayBuffer& buffer() { return buffer_; }
    const TrainRunConfig& config() const { return cfg_; }
    const sim::ScenarioConfig& scenario() const { return scenario_; }
    long train_steps() const;

    void sync_target();  // target <- online

    // y_i = r_total_i + gamma * (1 - done_i) * Q_target(w'_i, a*_i) with
    // a*_i = argmax_a Q_online(w'_i, a). No gradients recorded.
    std::vector<double> td_target(const std::vector<const Transition*>& batch,
                                  const std::vector<double>& r_total);

    struct StepStats {
        double loss = 0.0;  // td_loss + lambda * curiosity_loss
        double td_loss = 0.0;
        double curiosity_loss = 0.0;
        double mean_intrinsic = 0.0;
    };

    // One optimizer step over planner and curiosity parameters together.
    // r_total is rebuilt as r_e + intrinsic from the current curiosity net.
    // Throws std::runtime_error with diagnostics when the loss goes
    // non-finite.
    StepStats train_step(const std::vector<const Transition*>& batch);

    // The full loop: collect with select_action, train after every env step
    // once the buffer holds warmup transitions, sync the target every
    // sync_every train steps, evaluate every eval_every episodes, and keep
    // the checkpoint with the best success rate (ties broken by average
    // return). An empty path skips checkpointing but still tracks the best.
    RunResult run(const std::string& checkpoint_path);

    // All learned parameters (online planner, then curiosity) for
    // checkpointing, and the sidecar describing the run.
    std::vector<const ad::Param*> checkpoint_params() const;
    std::string meta_json() const;

  private:
    sim::ScenarioConfig scenario_;
    TrainRunConfig cfg_;
    planner::PlannerNet online_;
    planner::PlannerNet target_;
    curiosity::CuriosityNet curiosity_;
    ReplayBuffer buffer_;
    optim::RiemannianAdam opt_;
    std::mt19937_64 rng_;
};

}  // namespace hyp2nav::train
