#include "hyp2nav/planner.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

namespace hyp2nav::planner {

using ad::Tape;
using ad::Tensor;

void PolicyConfig::validate() const {
    if (ball_dim < 2) throw std::invalid_argument("PolicyConfig: ball_dim must be >= 2");
    if (phi_hidden == 0 || phi_out == 0 || gat_dim == 0 || va_hidden == 0) {
        throw std::invalid_argument("PolicyConfig: layer widths must be positive");
    }
    if (n_actions == 0) throw std::invalid_argument("PolicyConfig: n_actions must be positive");
    if (eps_start < 0.0 || eps_start > 1.0 || eps_end < 0.0 || eps_end > 1.0) {
        throw std::invalid_argument("PolicyConfig: epsilon bounds must be in [0,1]");
    }
}

PlannerNet::PlannerNet(PolicyConfig cfg)
    : cfg_((cfg.validate(), cfg)),
      phi_r_("planner.phi_r", {9, cfg.phi_hidden, cfg.phi_out}),
      phi_h_("planner.phi_h", {5, cfg.phi_hidden, cfg.phi_out}),
      gat1_("planner.gat1", cfg.phi_out, cfg.gat_dim, cfg.leaky_slope),
      gat2_("planner.gat2", cfg.gat_dim, cfg.gat_dim, cfg.leaky_slope),
      trunk_("planner.trunk", cfg.gat_dim, cfg.ball_dim),
      v1_("planner.v1", cfg.ball_dim, cfg.va_hidden),
      v2_("planner.v2", cfg.va_hidden, 1),
      a1_("planner.a1", cfg.ball_dim, cfg.va_hidden),
      a2_("planner.a2", cfg.va_hidden, cfg.n_actions) {}

void PlannerNet::init(std::mt19937_64& rng) {
    phi_r_.init(rng);
    phi_h_.init(rng);
    gat1_.init(rng);
    gat2_.init(rng);
    trunk_.init(rng);
    v1_.init(rng);
    v2_.init(rng);
    a1_.init(rng);
    a2_.init(rng);
}

std::vector<ad::Param*> PlannerNet::parameters() {
    std::vector<ad::Param*> out;
    phi_r_.collect(out);
    phi_h_.collect(out);
    gat1_.collect(out);
    gat2_.collect(out);
    trunk_.collect(out);
    v1_.collect(out);
    v2_.collect(out);
    a1_.collect(out);
    a2_.collect(out);
    return out;
}

std::vector<const ad::Param*> PlannerNet::parameters() const {
    auto mut = const_cast<PlannerNet*>(this)->parameters();
    return {mut.begin(), mut.end()};
}

std::size_t PlannerNet::parameter_count() const {
    std::size_t n = 0;
    for (const ad::Param* p : parameters()) n += p->size();
    return n;
}

void PlannerNet::copy_from(const PlannerNet& src) {
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

PlannerNet::BatchOut PlannerNet::forward(Tape& t, const double* flat, std::size_t batch,
                                         std::size_t n_humans) {
    if (batch == 0) throw std::invalid_argument("planner forward: empty batch");
    const std::size_t dim = sim::observation_dim(n_humans);
    const std::size_t nodes = n_humans + 1;

    std::vector<double> rbuf(batch * 9);
    std::vector<double> hbuf(batch * n_humans * 5);
    for (std::size_t b = 0; b < batch; ++b) {
        const double* row = flat + b * dim;
        std::memcpy(rbuf.data() + b * 9, row, 9 * sizeof(double));
        if (n_humans > 0) {
            std::memcpy(hbuf.data() + b * n_humans * 5, row + 9,
                        n_humans * 5 * sizeof(double));
        }
    }

    Tensor r_emb = phi_r_.forward(t, t.input(batch, 9, rbuf.data()));
    Tensor stacked = r_emb;
    if (n_humans > 0) {
        Tensor h_emb = phi_h_.forward(t, t.input(batch * n_humans, 5, hbuf.data()));
        std::vector<std::int32_t> idx(batch * nodes);
        for (std::size_t b = 0; b < batch; ++b) {
            idx[b * nodes] = static_cast<std::int32_t>(b);
            for (std::size_t j = 0; j < n_humans; ++j) {
                idx[b * nodes + 1 + j] = static_cast<std::int32_t>(batch + b * n_humans + j);
            }
        }
        stacked = t.gather_rows(t.concat_rows(r_emb, h_emb), idx);
    }

    nn::GatOutput g1 = gat1_.forward(t, stacked, nodes);
    nn::GatOutput g2 = gat2_.forward(t, t.relu(g1.out), nodes);

    std::vector<std::int32_t> robot_rows(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        robot_rows[b] = static_cast<std::int32_t>(b * nodes);
    }
    Tensor robot_feat = t.gather_rows(g2.out, robot_rows);

    Tensor emb = nn::hrelu(t, trunk_.forward(t, t.exp_map_rows(robot_feat)));
    Tensor v = t.log_map_rows(v2_.forward(t, nn::hrelu(t, v1_.forward(t, emb))));
    Tensor adv = t.log_map_rows(a2_.forward(t, nn::hrelu(t, a1_.forward(t, emb))));
    Tensor q = t.add_col_vec(t.add_col_vec(adv, t.neg(t.row_mean(adv))), v);

    return {q, v, adv, g2.attn, emb};
}

QOutput PlannerNet::q_values(const sim::Observation& obs) {
    eval_tape_.reset();
    eval_tape_.set_grad_enabled(false);
    const std::vector<double> flat = obs.flatten();
    const std::size_t n = obs.humans.size();
    BatchOut out = forward(eval_tape_, flat.data(), 1, n);

    QOutput res;
    res.q.assign(out.q.data(), out.q.data() + cfg_.n_actions);
    res.v = out.v.scalar();
    res.advantages.assign(out.adv.data(), out.adv.data() + cfg_.n_actions);
    const std::size_t nodes = n + 1;
    res.attention.assign(nodes, std::vector<double>(nodes));
    for (std::size_t i = 0; i < nodes; ++i) {
        for (std::size_t j = 0; j < nodes; ++j) {
            res.attention[i][j] = out.attn.data()[i * nodes + j];
        }
    }
    res.state_embedding.assign(out.state_emb.data(), out.state_emb.data() + cfg_.ball_dim);
    eval_tape_.set_grad_enabled(true);
    return res;
}

std::size_t PlannerNet::greedy_action(const sim::Observation& obs) {
    const QOutput out = q_values(obs);
    // max_element keeps the first of equal values: lowest-index tie-break.
    return static_cast<std::size_t>(
        std::max_element(out.q.begin(), out.q.end()) - out.q.begin());
}

double PlannerNet::epsilon(std::size_t episode) const {
    if (cfg_.eps_decay_episodes == 0) return cfg_.eps_end;
    const double frac = std::min(1.0, static_cast<double>(episode) /
                                          static_cast<double>(cfg_.eps_decay_episodes));
    return cfg_.eps_start + (cfg_.eps_end - cfg_.eps_start) * frac;
}

std::size_t PlannerNet::select_action(const sim::Observation& obs, std::size_t episode,
                                      std::mt19937_64& rng) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon(episode)) {
        std::uniform_int_distribution<std::size_t> pick(0, cfg_.n_actions - 1);
        return pick(rng);
    }
    return greedy_action(obs);
}

}  // namespace hyp2nav::planner
