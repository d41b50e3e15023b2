#include "hyp2nav/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "hyp2nav/checkpoint.hpp"
#include "json.hpp"

namespace hyp2nav::train {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
    items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
    } else {
        items_[next_] = std::move(t);
        next_ = (next_ + 1) % capacity_;
    }
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n,
                                                    std::mt19937_64& rng) const {
    if (items_.size() < n)
        throw std::logic_error("ReplayBuffer::sample: need " + std::to_string(n) +
                               " transitions, have " + std::to_string(items_.size()));
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    std::vector<const Transition*> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = &items_[pick(rng)];
    return out;
}

void TrainRunConfig::validate() const {
    if (eval_episodes == 0) throw std::invalid_argument("TrainRunConfig: eval_episodes must be positive");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("TrainRunConfig: gamma must be in (0, 1)");
    if (!(lr > 0.0)) throw std::invalid_argument("TrainRunConfig: lr must be positive");
    if (batch_size == 0) throw std::invalid_argument("TrainRunConfig: batch_size must be positive");
    if (capacity < batch_size) throw std::invalid_argument("TrainRunConfig: capacity must hold at least one batch");
    if (sync_every == 0) throw std::invalid_argument("TrainRunConfig: sync_every must be positive");
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

EvalResult evaluate(const sim::Policy& policy, const sim::ScenarioConfig& scenario,
                    std::size_t n_episodes, std::uint64_t seed, double gamma) {
    if (n_episodes == 0) throw std::invalid_argument("evaluate: n_episodes must be positive");
    sim::Env env(scenario);
    std::size_t successes = 0;
    double nav_sum = 0.0;
    double return_sum = 0.0;
    for (std::size_t i = 0; i < n_episodes; ++i) {
        sim::Rollout r = sim::rollout(env, policy, substream_seed(seed, i));
        double ret = 0.0, disc = 1.0;
        for (const sim::TraceStep& s : r.steps) {
            ret += disc * s.reward;
            disc *= gamma;
        }
        return_sum += ret;
        if (r.outcome.kind == sim::Outcome::kSuccess) {
            ++successes;
            nav_sum += r.outcome.nav_time;
        }
    }
    EvalResult out;
    out.success_rate = static_cast<double>(successes) / static_cast<double>(n_episodes);
    out.nav_time = successes > 0 ? nav_sum / static_cast<double>(successes) : scenario.time_limit;
    out.avg_return = return_sum / static_cast<double>(n_episodes);
    return out;
}

EvalResult evaluate(planner::PlannerNet& net, const sim::ScenarioConfig& scenario,
                    std::size_t n_episodes, std::uint64_t seed, double gamma) {
    const std::vector<sim::Action> actions = sim::action_space(scenario.robot_vmax);
    if (actions.size() != net.config().n_actions)
        throw std::invalid_argument("evaluate: net expects " +
                                    std::to_string(net.config().n_actions) + " actions, scenario offers " +
                                    std::to_string(actions.size()));
    sim::Policy pol = [&](const sim::Observation& obs) {
        std::size_t a = net.greedy_action(obs);
        return sim::PolicyDecision{actions[a], static_cast<int>(a)};
    };
    return evaluate(pol, scenario, n_episodes, seed, gamma);
}

void write_metrics_csv(const std::vector<MetricsRow>& rows, std::ostream& out) {
    out << "episode,eval-success-rate,eval-nav-time,eval-avg-return,"
           "mean-intrinsic-reward,epsilon\n";
    char buf[256];
    for (const MetricsRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.episode,
                      r.success_rate, r.nav_time, r.avg_return, r.mean_intrinsic, r.epsilon);
        out << buf;
    }
}

namespace {

std::vector<ad::Param*> joint_params(planner::PlannerNet& p, curiosity::CuriosityNet& c) {
    std::vector<ad::Param*> out = p.parameters();
    std::vector<ad::Param*> cp = c.parameters();
    out.insert(out.end(), cp.begin(), cp.end());
    return out;
}

}  // namespace

Trainer::Trainer(sim::ScenarioConfig scenario, planner::PolicyConfig policy_cfg,
                 curiosity::CuriosityConfig curiosity_cfg, TrainRunConfig cfg)
    : scenario_(scenario),
      cfg_((cfg.validate(), cfg)),
      online_(policy_cfg),
      target_(policy_cfg),
      curiosity_(curiosity_cfg),
      buffer_(cfg.capacity),
      opt_(joint_params(online_, curiosity_), optim::AdamConfig{cfg.lr, 0.9, 0.999, 1e-8}),
      rng_(cfg.seed) {
    if (curiosity_cfg.ball_dim != policy_cfg.ball_dim)
        throw std::invalid_argument("Trainer: curiosity ball_dim " +
                                    std::to_string(curiosity_cfg.ball_dim) + " != planner ball_dim " +
                                    std::to_string(policy_cfg.ball_dim));
    if (curiosity_cfg.n_humans != scenario.n_humans)
        throw std::invalid_argument("Trainer: curiosity expects " +
                                    std::to_string(curiosity_cfg.n_humans) + " humans, scenario has " +
                                    std::to_string(scenario.n_humans));
    if (curiosity_cfg.n_actions != policy_cfg.n_actions)
        throw std::invalid_argument("Trainer: action-count mismatch");
    online_.init(rng_);
    curiosity_.init(rng_);
    target_.copy_from(online_);
}

long Trainer::train_steps() const { return opt_.step_count(); }

void Trainer::sync_target() { target_.copy_from(online_); }

std::vector<double> Trainer::td_target(const std::vector<const Transition*>& batch,
                                       const std::vector<double>& r_total) {
    const std::size_t b = batch.size();
    if (b == 0) throw std::invalid_argument("td_target: empty batch");
    if (r_total.size() != b) throw std::invalid_argument("td_target: r_total size mismatch");
    const std::size_t dim = sim::observation_dim(scenario_.n_humans);
    std::vector<double> wn(b * dim);
    for (std::size_t i = 0; i < b; ++i) {
        if (batch[i]->w_next.size() != dim)
            throw std::invalid_argument("td_target: transition width mismatch");
        std::copy(batch[i]->w_next.begin(), batch[i]->w_next.end(), wn.begin() + i * dim);
    }
    const std::size_t A = online_.config().n_actions;
    ad::Tape t;
    t.set_grad_enabled(false);
    const double* q_on = online_.forward(t, wn.data(), b, scenario_.n_humans).q.data();
    const double* q_tg = target_.forward(t, wn.data(), b, scenario_.n_humans).q.data();
    std::vector<double> y(b);
    for (std::size_t i = 0; i < b; ++i) {
        std::size_t best = 0;
        for (std::size_t a = 1; a < A; ++a)
            if (q_on[i * A + a] > q_on[i * A + best]) best = a;
        y[i] = r_total[i];
        if (!batch[i]->done) y[i] += cfg_.gamma * q_tg[i * A + best];
    }
    return y;
}

Trainer::StepStats Trainer::train_step(const std::vector<const Transition*>& batch) {
    const std::size_t b = batch.size();
    if (b == 0) throw std::invalid_argument("train_step: empty batch");
    const std::size_t dim = sim::observation_dim(scenario_.n_humans);
    std::vector<double> wt(b * dim), wn(b * dim);
    std::vector<std::int32_t> acts(b);
    for (std::size_t i = 0; i < b; ++i) {
        const Transition& tr = *batch[i];
        if (tr.w_t.size() != dim || tr.w_next.size() != dim)
            throw std::invalid_argument("train_step: transition width mismatch");
        std::copy(tr.w_t.begin(), tr.w_t.end(), wt.begin() + i * dim);
        std::copy(tr.w_next.begin(), tr.w_next.end(), wn.begin() + i * dim);
        acts[i] = tr.action;
    }

    ad::Tape t;
    curiosity::CuriosityNet::LossOut cur = curiosity_.loss(t, wt.data(), wn.data(), acts, b);
    std::vector<double> r_total(b);
    for (std::size_t i = 0; i < b; ++i) r_total[i] = batch[i]->reward_e + cur.intrinsic[i];
    std::vector<double> y = td_target(batch, r_total);

    planner::PlannerNet::BatchOut out = online_.forward(t, wt.data(), b, scenario_.n_humans);
    ad::Tensor qa = t.gather_cols1(out.q, acts);
    ad::Tensor td = t.mean_all(t.huber(qa, t.input(b, 1, y.data())));
    const double lambda = curiosity_.config().lambda;
    ad::Tensor total = t.add(td, t.scale(cur.loss, lambda));

    StepStats st;
    st.td_loss = td.data()[0];
    st.curiosity_loss = cur.loss.data()[0];
    st.loss = total.data()[0];
    double isum = 0.0;
    for (double r : cur.intrinsic) isum += r;
    st.mean_intrinsic = isum / static_cast<double>(b);
    if (!std::isfinite(st.loss))
        throw std::runtime_error("train_step: non-finite loss at step " +
                                 std::to_string(opt_.step_count() + 1) + " (td=" + std::to_string(st.td_loss) +
                                 ", curiosity=" + std::to_string(st.curiosity_loss) + ")");

    opt_.zero_grad();
    t.backward(total);
    opt_.step();
    return st;
}

RunResult Trainer::run(const std::string& checkpoint_path) {
    RunResult res;
    const std::vector<sim::Action> actions = sim::action_space(scenario_.robot_vmax);
    sim::Env env(scenario_);
    double intr_sum = 0.0;
    std::size_t intr_n = 0;
    for (std::size_t ep = 0; ep < cfg_.episodes; ++ep) {
        sim::Observation obs = env.reset(substream_seed(cfg_.seed, ep));
        bool done = false;
        while (!done) {
            std::size_t a = online_.select_action(obs, ep, rng_);
            sim::Env::StepResult sr = env.step(actions[a]);
            Transition tr;
            tr.w_t = obs.flatten();
            tr.action = static_cast<std::int32_t>(a);
            tr.reward_e = sr.reward;
            tr.done = sr.done;
            tr.w_next = sr.obs.flatten();
            buffer_.push(std::move(tr));
            obs = sr.obs;
            done = sr.done;
            if (buffer_.size() >= cfg_.warmup && buffer_.size() >= cfg_.batch_size) {
                StepStats st = train_step(buffer_.sample(cfg_.batch_size, rng_));
                intr_sum += st.mean_intrinsic;
                ++intr_n;
                if (opt_.step_count() % static_cast<long>(cfg_.sync_every) == 0) sync_target();
            }
        }
        if (cfg_.eval_every > 0 && (ep + 1) % cfg_.eval_every == 0) {
            EvalResult ev = evaluate(online_, scenario_, cfg_.eval_episodes,
                                     substream_seed(cfg_.seed, 0xE7A1000000ULL + ep), cfg_.gamma);
            MetricsRow row;
            row.episode = ep + 1;
            row.success_rate = ev.success_rate;
            row.nav_time = ev.nav_time;
            row.avg_return = ev.avg_return;
            row.mean_intrinsic = intr_n > 0 ? intr_sum / static_cast<double>(intr_n) : 0.0;
            row.epsilon = online_.epsilon(ep + 1);
            res.rows.push_back(row);
            intr_sum = 0.0;
            intr_n = 0;
            bool better = ev.success_rate > res.best_success ||
                          (ev.success_rate == res.best_success && ev.avg_return > res.best_return);
            if (better) {
                res.best_success = ev.success_rate;
                res.best_return = ev.avg_return;
                res.best_episode = ep + 1;
                if (!checkpoint_path.empty()) {
                    ckpt::save(checkpoint_path, checkpoint_params(), meta_json());
                    res.checkpoint_written = true;
                }
            }
        }
    }
    return res;
}

std::vector<const ad::Param*> Trainer::checkpoint_params() const {
    const planner::PlannerNet& p = online_;
    const curiosity::CuriosityNet& c = curiosity_;
    std::vector<const ad::Param*> out = p.parameters();
    std::vector<const ad::Param*> cp = c.parameters();
    out.insert(out.end(), cp.begin(), cp.end());
    return out;
}

std::string Trainer::meta_json() const {
    const planner::PolicyConfig& p = online_.config();
    const curiosity::CuriosityConfig& c = curiosity_.config();
    nlohmann::json j;
    j["policy"] = {{"ball_dim", p.ball_dim},     {"phi_hidden", p.phi_hidden},
                   {"phi_out", p.phi_out},       {"gat_dim", p.gat_dim},
                   {"va_hidden", p.va_hidden},   {"n_actions", p.n_actions},
                   {"leaky_slope", p.leaky_slope}, {"eps_start", p.eps_start},
                   {"eps_end", p.eps_end},       {"eps_decay_episodes", p.eps_decay_episodes}};
    j["curiosity"] = {{"n_humans", c.n_humans}, {"ball_dim", c.ball_dim}, {"hidden", c.hidden},
                      {"n_actions", c.n_actions}, {"eta", c.eta},         {"beta", c.beta},
                      {"lambda", c.lambda}};
    j["train"] = {{"episodes", cfg_.episodes},   {"eval_every", cfg_.eval_every},
                  {"eval_episodes", cfg_.eval_episodes}, {"lr", cfg_.lr},
                  {"gamma", cfg_.gamma},         {"batch_size", cfg_.batch_size},
                  {"capacity", cfg_.capacity},   {"warmup", cfg_.warmup},
                  {"sync_every", cfg_.sync_every}, {"seed", cfg_.seed}};
    j["scenario"] = {{"kind", sim::to_string(scenario_.kind)},
                     {"n_humans", scenario_.n_humans},
                     {"circle_radius", scenario_.circle_radius},
                     {"square_side", scenario_.square_side},
                     {"time_limit", scenario_.time_limit}};
    return j.dump();
}

}  // namespace hyp2nav::train
