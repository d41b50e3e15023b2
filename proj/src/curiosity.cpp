#include "hyp2nav/curiosity.hpp"

#include <cmath>
#include <stdexcept>

namespace hyp2nav::curiosity {

using ad::Tape;
using ad::Tensor;

void CuriosityConfig::validate() const {
    if (ball_dim < 2) throw std::invalid_argument("CuriosityConfig: ball_dim must be >= 2");
    if (hidden == 0) throw std::invalid_argument("CuriosityConfig: hidden must be positive");
    if (n_actions == 0) throw std::invalid_argument("CuriosityConfig: n_actions must be positive");
    if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("CuriosityConfig: beta must be in [0,1]");
    if (eta < 0.0) throw std::invalid_argument("CuriosityConfig: eta must be >= 0");
    if (lambda < 0.0) throw std::invalid_argument("CuriosityConfig: lambda must be >= 0");
}

CuriosityNet::CuriosityNet(CuriosityConfig cfg)
    : cfg_((cfg.validate(), cfg)),
      phi_("curiosity.phi", cfg.input_dim(), cfg.ball_dim),
      f1_("curiosity.f1", cfg.ball_dim + cfg.n_actions, cfg.hidden),
      f2_("curiosity.f2", cfg.hidden, cfg.ball_dim),
      g_("curiosity.g", {2 * cfg.ball_dim, cfg.hidden, cfg.n_actions}) {}

void CuriosityNet::init(std::mt19937_64& rng) {
    phi_.init(rng);
    f1_.init(rng);
    f2_.init(rng);
    g_.init(rng);
}

std::vector<ad::Param*> CuriosityNet::parameters() {
    std::vector<ad::Param*> out;
    phi_.collect(out);
    f1_.collect(out);
    f2_.collect(out);
    g_.collect(out);
    return out;
}

std::vector<const ad::Param*> CuriosityNet::parameters() const {
    auto mut = const_cast<CuriosityNet*>(this)->parameters();
    return {mut.begin(), mut.end()};
}

std::size_t CuriosityNet::parameter_count() const {
    std::size_t n = 0;
    for (const ad::Param* p : parameters()) n += p->size();
    return n;
}

void CuriosityNet::copy_from(const CuriosityNet& src) {
    auto dst_params = parameters();
    auto src_params = src.parameters();
    if (dst_params.size() != src_params.size()) {
        throw std::invalid_argument("copy_from: parameter lists differ");
    }
    for (std::size_t i = 0; i < dst_params.size(); ++i) {
        if (dst_params[i]->size() != src_params[i]->size()) {
            throw std::invalid_argument("copy_from: shape mismatch at " + dst_params[i]->name);
        }
        dst_params[i]->value = src_params[i]->value;
    }
}

Tensor CuriosityNet::embed(Tape& t, Tensor w) {
    return phi_.forward(t, t.exp_map_rows(w));
}

Tensor CuriosityNet::predict_next(Tape& t, Tensor phi_t, Tensor a_onehot) {
    Tensor u = t.concat_cols(t.log_map_rows(phi_t), a_onehot);
    return f2_.forward(t, nn::hrelu(t, f1_.forward(t, t.exp_map_rows(u))));
}

Tensor CuriosityNet::action_logits(Tape& t, Tensor phi_t, Tensor phi_next) {
    return g_.forward(t, t.concat_cols(t.log_map_rows(phi_t), t.log_map_rows(phi_next)));
}

CuriosityNet::LossOut CuriosityNet::loss(Tape& t, const double* w_t, const double* w_next,
                                         const std::vector<std::int32_t>& actions,
                                         std::size_t batch) {
    if (batch == 0) throw std::invalid_argument("curiosity loss: empty batch");
    if (actions.size() != batch) {
        throw std::invalid_argument("curiosity loss: one action per row required");
    }
    std::vector<double> onehot(batch * cfg_.n_actions, 0.0);
    for (std::size_t b = 0; b < batch; ++b) {
        const std::int32_t a = actions[b];
        if (a < 0 || std::size_t(a) >= cfg_.n_actions) {
            throw std::invalid_argument("curiosity loss: action index out of range");
        }
        onehot[b * cfg_.n_actions + std::size_t(a)] = 1.0;
    }

    const std::size_t dim = cfg_.input_dim();
    Tensor phi_t_emb = embed(t, t.input(batch, dim, w_t));
    Tensor phi_next_emb = embed(t, t.input(batch, dim, w_next));
    // The prediction error trains only the forward net: both the anchor and
    // the target are cut out of the gradient, so phi is shaped exclusively by
    // the inverse term and cannot outrun the predictor to cheapen either
    // side.
    Tensor pred = predict_next(t, t.detach(phi_t_emb),
                               t.input(batch, cfg_.n_actions, onehot.data()));
    Tensor fwd = t.dist_sq_rows(t.detach(phi_next_emb), pred);
    Tensor ce = t.cross_entropy_rows(action_logits(t, phi_t_emb, phi_next_emb), actions);
    Tensor total = t.add(t.scale(t.mean_all(fwd), cfg_.beta),
                         t.scale(t.mean_all(ce), 1.0 - cfg_.beta));

    LossOut out;
    out.loss = total;
    out.intrinsic.resize(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        out.intrinsic[b] = cfg_.eta * std::sqrt(std::max(0.0, fwd.data()[b]));
    }
    return out;
}

double CuriosityNet::intrinsic_reward(const sim::Observation& w_t, std::size_t action,
                                      const sim::Observation& w_next) {
    if (w_t.humans.size() != cfg_.n_humans || w_next.humans.size() != cfg_.n_humans) {
        throw std::invalid_argument("intrinsic_reward: human count differs from config");
    }
    if (action >= cfg_.n_actions) {
        throw std::invalid_argument("intrinsic_reward: action index out of range");
    }
    eval_tape_.reset();
    eval_tape_.set_grad_enabled(false);
    const std::vector<double> a = w_t.flatten();
    const std::vector<double> b = w_next.flatten();
    std::vector<double> onehot(cfg_.n_actions, 0.0);
    onehot[action] = 1.0;

    Tensor phi_t_emb = embed(eval_tape_, eval_tape_.input(1, a.size(), a.data()));
    Tensor phi_next_emb = embed(eval_tape_, eval_tape_.input(1, b.size(), b.data()));
    Tensor pred = predict_next(eval_tape_, phi_t_emb,
                               eval_tape_.input(1, cfg_.n_actions, onehot.data()));
    const double d2 = eval_tape_.dist_sq_rows(phi_next_emb, pred).scalar();
    eval_tape_.set_grad_enabled(true);
    return cfg_.eta * std::sqrt(std::max(0.0, d2));
}

}  // namespace hyp2nav::curiosity
