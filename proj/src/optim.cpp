#include "hyp2nav/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "hyp2nav/geom.hpp"

namespace hyp2nav::optim {

RiemannianAdam::RiemannianAdam(std::vector<ad::Param*> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
    states_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
        states_[i].m.assign(params_[i]->size(), 0.0);
        if (!params_[i]->on_manifold) states_[i].v.assign(params_[i]->size(), 0.0);
    }
}

void RiemannianAdam::zero_grad() {
    for (auto* p : params_) p->zero_grad();
}

void RiemannianAdam::step() {
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, double(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, double(step_));

    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
        ad::Param& p = *params_[pi];
        State& st = states_[pi];
        for (double g : p.grad) {
            if (!std::isfinite(g)) {
                throw std::runtime_error("non-finite gradient for parameter '" + p.name + "'");
            }
        }

        if (!p.on_manifold) {
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double g = p.grad[i];
                st.m[i] = cfg_.beta1 * st.m[i] + (1.0 - cfg_.beta1) * g;
                st.v[i] = cfg_.beta2 * st.v[i] + (1.0 - cfg_.beta2) * g * g;
                p.value[i] -=
                    cfg_.lr * (st.m[i] / bc1) / (std::sqrt(st.v[i] / bc2) + cfg_.eps);
            }
            continue;
        }

        // One ball point per manifold param.
        double b2 = 0.0;
        for (double c : p.value) b2 += c * c;
        const double rescale = (1.0 - b2) * (1.0 - b2) / 4.0;

        double gn2 = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double gt = rescale * p.grad[i];
            st.m[i] = cfg_.beta1 * st.m[i] + (1.0 - cfg_.beta1) * gt;
            gn2 += gt * gt;
        }
        st.v_norm = cfg_.beta2 * st.v_norm + (1.0 - cfg_.beta2) * gn2;
        const double denom = std::sqrt(st.v_norm / bc2) + cfg_.eps;

        std::vector<double> u(p.size());
        double un2 = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            u[i] = -cfg_.lr * (st.m[i] / bc1) / denom;
            un2 += u[i] * u[i];
        }
        const double un = std::sqrt(un2);
        if (un == 0.0) continue;

        // exp_b(u) = b (+) tanh(|u| / (1 - |b|^2)) * u/|u|
        const double mag = std::tanh(un / (1.0 - b2));
        for (auto& c : u) c *= mag / un;
        auto moved = geom::mobius_add(geom::PoincarePoint{p.value}, geom::PoincarePoint{u});
        auto projected = geom::project_to_ball(moved.coords);
        p.value = std::move(projected.coords);
    }
}

}  // namespace hyp2nav::optim
