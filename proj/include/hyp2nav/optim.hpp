#pragma once

#include <cstddef>
#include <vector>

#include "hyp2nav/tensor.hpp"

// Adam with Riemannian handling of manifold parameters. Euclidean params get
// the textbook update. A manifold param (a hyperbolic bias; one ball point
// per param) gets:
//   - gradient rescale by the inverse metric ((1 - |b|^2)^2 / 4),
//   - per-coordinate first moment, scalar second moment tracking |g~|^2
//     (norm-based, so the first step moves along -grad direction),
//   - retraction along the exponential map at b, then ball projection.

namespace hyp2nav::optim {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class RiemannianAdam {
public:
    RiemannianAdam(std::vector<ad::Param*> params, AdamConfig cfg = {});

    // Applies one update from the accumulated grads. Throws std::runtime_error
    // naming the parameter on a non-finite gradient.
    void step();
    void zero_grad();

    long step_count() const { return step_; }
    AdamConfig& config() { return cfg_; }

private:
    struct State {
        std::vector<double> m;
        std::vector<double> v;  // per-coordinate for Euclidean params
        double v_norm = 0.0;    // scalar second moment for manifold params
    };

    std::vector<ad::Param*> params_;
    std::vector<State> states_;
    AdamConfig cfg_;
    long step_ = 0;
};

}  // namespace hyp2nav::optim
