#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "hyp2nav/layers.hpp"
#include "hyp2nav/sim.hpp"
#include "hyp2nav/tensor.hpp"

// Curiosity-driven exploration bonus computed in the Poincare ball. A feature
// net phi lifts the flattened observation into the ball, a forward net f
// predicts the next embedding from (phi(w_t), one-hot action), and the
// intrinsic reward is the ball distance between the prediction and the actual
// next embedding: unfamiliar transitions predict badly and earn a bonus. An
// inverse net g classifies the action from the two embeddings, which keeps
// phi focused on controllable state. The distance grows exponentially toward
// the boundary, so embeddings pushed outward (low-entropy, committed states)
// see amplified prediction penalties.

namespace hyp2nav::curiosity {

struct CuriosityConfig {
    std::size_t n_humans = 5;   // fixes the observation length 9 + 5N
    std::size_t ball_dim = 2;   // embedding dim; must match the planner's
    std::size_t hidden = 64;    // width of the forward/inverse hidden layers
    std::size_t n_actions = 81;
    double eta = 0.1;       // intrinsic reward scale
    double beta = 0.2;      // forward vs inverse loss mix, in [0, 1]
    double lambda = 0.1;    // weight of the curiosity loss vs the TD loss

    std::size_t input_dim() const { return sim::observation_dim(n_humans); }
    void validate() const;  // throws std::invalid_argument
};

class CuriosityNet {
  public:
    explicit CuriosityNet(CuriosityConfig cfg);

    void init(std::mt19937_64& rng);
    std::vector<ad::Param*> parameters();
    std::vector<const ad::Param*> parameters() const;
    void copy_from(const CuriosityNet& src);
    const CuriosityConfig& config() const { return cfg_; }
    std::size_t parameter_count() const;

    // phi: raw observation rows (B x input_dim) -> ball rows (B x ball_dim).
    ad::Tensor embed(ad::Tape& t, ad::Tensor w);

    // f: predicted next embedding from the current one and a one-hot action
    // block (B x n_actions). The two inputs live in different spaces, so the
    // embedding is pulled back to the tangent space before concatenation.
    ad::Tensor predict_next(ad::Tape& t, ad::Tensor phi_t, ad::Tensor a_onehot);

    // g: action logits (B x n_actions) from the two log-mapped embeddings.
    ad::Tensor action_logits(ad::Tape& t, ad::Tensor phi_t, ad::Tensor phi_next);

    struct LossOut {
        ad::Tensor loss;                // 1x1: beta*forward + (1-beta)*inverse
        std::vector<double> intrinsic;  // per item, eta * d(phi(w'), prediction)
    };

    // `w_t` / `w_next` hold B observation rows of length input_dim each,
    // row-major; `actions` the taken action index per row. The forward term
    // updates only the forward net: both embeddings enter it as fixed values,
    // so phi cannot shrink the prediction error by collapsing or drifting.
    // phi trains through the inverse term alone.
    LossOut loss(ad::Tape& t, const double* w_t, const double* w_next,
                 const std::vector<std::int32_t>& actions, std::size_t batch);

    // Single-transition bonus, no gradients recorded.
    double intrinsic_reward(const sim::Observation& w_t, std::size_t action,
                            const sim::Observation& w_next);

  private:
    CuriosityConfig cfg_;
    nn::HLinear phi_;
    nn::HLinear f1_, f2_;
    nn::Mlp g_;
    ad::Tape eval_tape_;  // reused by intrinsic_reward; one net per thread
};

}  // namespace hyp2nav::curiosity
