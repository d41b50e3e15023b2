#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "hyp2nav/tensor.hpp"

// Central finite differences against the tape, shared by the layer/model
// gradcheck tests. Returns the max relative error across all entries.
inline double max_grad_error(const std::vector<hyp2nav::ad::Param*>& params,
                             const std::function<hyp2nav::ad::Tensor(hyp2nav::ad::Tape&)>& f,
                             double h = 1e-6) {
    using hyp2nav::ad::Tape;
    Tape tape;
    for (auto* p : params) p->zero_grad();
    tape.reset();
    tape.backward(f(tape));
    double worst = 0.0;
    for (auto* p : params) {
        for (std::size_t i = 0; i < p->size(); ++i) {
            const double orig = p->value[i];
            p->value[i] = orig + h;
            tape.reset();
            const double lp = f(tape).scalar();
            p->value[i] = orig - h;
            tape.reset();
            const double lm = f(tape).scalar();
            p->value[i] = orig;
            const double fd = (lp - lm) / (2.0 * h);
            const double err = std::abs(p->grad[i] - fd) / (1.0 + std::abs(fd));
            worst = std::max(worst, err);
        }
    }
    return worst;
}
