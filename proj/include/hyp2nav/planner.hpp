#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "hyp2nav/layers.hpp"
#include "hyp2nav/sim.hpp"
#include "hyp2nav/tensor.hpp"

// Graph state encoder plus a dueling Q network whose value/advantage heads
// run in the Poincare ball. Robot and humans are embedded by per-type MLPs
// into a shared feature space, mixed by two graph attention layers over the
// complete graph, and the robot node's feature is lifted into the ball where
// hyperbolic affine layers produce V and A; scalars are read out through the
// log map at the origin so Q = V + (A - mean A) stays a plain identity.

namespace hyp2nav::planner {

struct PolicyConfig {
    std::size_t ball_dim = 2;    // latent dim of the hyperbolic modules
    std::size_t phi_hidden = 256;
    std::size_t phi_out = 32;    // shared embedding dim fed to the GATs
    std::size_t gat_dim = 64;
    std::size_t va_hidden = 2;   // hidden width of the V/A heads
    std::size_t n_actions = 81;
    double leaky_slope = 0.2;

    double eps_start = 0.5;
    double eps_end = 0.02;
    std::size_t eps_decay_episodes = 4000;

    void validate() const;  // throws std::invalid_argument
};

struct QOutput {
    std::vector<double> q;           // n_actions
    double v = 0.0;
    std::vector<double> advantages;  // n_actions, uncentered
    std::vector<std::vector<double>> attention;  // (N+1)x(N+1), second layer
    std::vector<double> state_embedding;         // ball point fed to the heads
};

class PlannerNet {
  public:
    explicit PlannerNet(PolicyConfig cfg);

    void init(std::mt19937_64& rng);
    std::vector<ad::Param*> parameters();
    std::vector<const ad::Param*> parameters() const;
    void copy_from(const PlannerNet& src);  // target-network sync
    const PolicyConfig& config() const { return cfg_; }
    std::size_t parameter_count() const;

    struct BatchOut {
        ad::Tensor q;          // B x n_actions
        ad::Tensor v;          // B x 1
        ad::Tensor adv;        // B x n_actions
        ad::Tensor attn;       // (B*(N+1)) x (N+1)
        ad::Tensor state_emb;  // B x ball_dim
    };

    // `flat` holds B observation rows of length observation_dim(n_humans),
    // row-major. All rows must share the same human count.
    BatchOut forward(ad::Tape& t, const double* flat, std::size_t batch,
                     std::size_t n_humans);

    // Single-observation inference (no gradients recorded).
    QOutput q_values(const sim::Observation& obs);

    std::size_t greedy_action(const sim::Observation& obs);
    // Epsilon-greedy by training episode; draws from `rng`.
    std::size_t select_action(const sim::Observation& obs, std::size_t episode,
                              std::mt19937_64& rng);
    double epsilon(std::size_t episode) const;

  private:
    PolicyConfig cfg_;
    nn::Mlp phi_r_;
    nn::Mlp phi_h_;
    nn::GatLayer gat1_;
    nn::GatLayer gat2_;
    nn::HLinear trunk_;
    nn::HLinear v1_, v2_;
    nn::HLinear a1_, a2_;
    ad::Tape eval_tape_;  // reused by q_values; one net per thread
};

}  // namespace hyp2nav::planner
