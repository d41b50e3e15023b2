#include "hyp2nav/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "hyp2nav/checkpoint.hpp"
#include "hyp2nav/config.hpp"
#include "hyp2nav/curiosity.hpp"
#include "hyp2nav/svg.hpp"
#include "hyp2nav/trainer.hpp"
#include "json.hpp"

namespace hyp2nav::cli {

namespace {

struct LoadedModel {
    std::unique_ptr<planner::PlannerNet> net;
    std::unique_ptr<curiosity::CuriosityNet> cur;
    double gamma = 0.9;
};

// Rebuilds both nets from the checkpoint sidecar and loads the weights.
LoadedModel load_model(const std::string& path) {
    nlohmann::json meta = nlohmann::json::parse(ckpt::read_meta(path));
    const nlohmann::json& jp = meta.at("policy");
    planner::PolicyConfig p;
    p.ball_dim = jp.at("ball_dim").get<std::size_t>();
    p.phi_hidden = jp.at("phi_hidden").get<std::size_t>();
    p.phi_out = jp.at("phi_out").get<std::size_t>();
    p.gat_dim = jp.at("gat_dim").get<std::size_t>();
    p.va_hidden = jp.at("va_hidden").get<std::size_t>();
    p.n_actions = jp.at("n_actions").get<std::size_t>();
    p.leaky_slope = jp.at("leaky_slope").get<double>();
    p.eps_start = jp.at("eps_start").get<double>();
    p.eps_end = jp.at("eps_end").get<double>();
    p.eps_decay_episodes = jp.at("eps_decay_episodes").get<std::size_t>();
    const nlohmann::json& jc = meta.at("curiosity");
    curiosity::CuriosityConfig c;
    c.n_humans = jc.at("n_humans").get<std::size_t>();
    c.ball_dim = jc.at("ball_dim").get<std::size_t>();
    c.hidden = jc.at("hidden").get<std::size_t>();
    c.n_actions = jc.at("n_actions").get<std::size_t>();
    c.eta = jc.at("eta").get<double>();
    c.beta = jc.at("beta").get<double>();
    c.lambda = jc.at("lambda").get<double>();

    LoadedModel m;
    m.net = std::make_unique<planner::PlannerNet>(p);
    m.cur = std::make_unique<curiosity::CuriosityNet>(c);
    m.gamma = meta.at("train").at("gamma").get<double>();
    std::vector<ad::Param*> params = m.net->parameters();
    for (ad::Param* q : m.cur->parameters()) params.push_back(q);
    ckpt::load(path, params);
    return m;
}

sim::ScenarioConfig build_scenario(const std::string& kind, std::size_t n_humans,
                                   double time_limit) {
    sim::ScenarioConfig scen;
    scen.kind = sim::scenario_kind_from_string(kind);
    scen.n_humans = n_humans;
    scen.time_limit = time_limit;
    return scen;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
}

std::size_t argmax(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

int cmd_train(const std::string& config_path, const std::uint64_t* seed_override,
              const std::string* out_override, std::ostream& out, std::ostream& err) {
    if (!std::filesystem::exists(config_path)) {
        err << "config file not found: " << config_path << "\n";
        return 2;
    }
    config::ExperimentConfig cfg = config::parse_file(config_path);
    if (seed_override) cfg.training.seed = *seed_override;
    if (out_override) cfg.out_dir = *out_override;
    cfg.resolve_and_validate();

    std::filesystem::create_directories(cfg.out_dir);
    const std::string ckpt_path = cfg.out_dir + "/best.ckpt";
    train::Trainer trainer(cfg.scenario, cfg.policy, cfg.curiosity, cfg.training);
    train::RunResult res = trainer.run(ckpt_path);

    std::ostringstream metrics;
    train::write_metrics_csv(res.rows, metrics);
    write_text_file(cfg.out_dir + "/metrics.csv", metrics.str());
    write_text_file(cfg.out_dir + "/config.ini", config::to_ini(cfg));

    if (res.rows.empty()) {
        out << "no evaluations ran (episodes=" << cfg.training.episodes
            << ", eval_every=" << cfg.training.eval_every << ")\n";
    } else {
        const train::MetricsRow& last = res.rows.back();
        char buf[192];
        std::snprintf(buf, sizeof buf,
                      "final eval: episode=%zu success-rate=%.4f nav-time=%.2f avg-return=%.4f\n",
                      last.episode, last.success_rate, last.nav_time, last.avg_return);
        out << buf;
    }
    if (res.checkpoint_written)
        out << "best checkpoint: " << ckpt_path << " (episode " << res.best_episode << ")\n";
    out << "metrics: " << cfg.out_dir << "/metrics.csv\n";
    return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& kind, std::size_t n_humans,
             double time_limit, std::size_t episodes, std::uint64_t seed,
             const std::string& out_path, std::ostream& out, std::ostream& err) {
    if (episodes == 0) {
        err << "eval: --episodes must be positive\n";
        return 1;
    }
    sim::ScenarioConfig scen = build_scenario(kind, n_humans, time_limit);
    const std::vector<sim::Action> actions = sim::action_space(scen.robot_vmax);

    LoadedModel model;
    double gamma = 0.9;
    sim::Policy policy;
    if (ckpt_path == "orca") {
        policy = [scen](const sim::Observation& o) {
            return sim::PolicyDecision{sim::orca_robot_action(o, scen), -1};
        };
    } else {
        model = load_model(ckpt_path);
        if (model.net->config().n_actions != actions.size()) {
            err << "eval: checkpoint expects " << model.net->config().n_actions
                << " actions but the scenario action grid has " << actions.size() << "\n";
            return 1;
        }
        gamma = model.gamma;
        planner::PlannerNet* net = model.net.get();
        policy = [net, actions](const sim::Observation& o) {
            std::size_t a = net->greedy_action(o);
            return sim::PolicyDecision{actions[a], static_cast<int>(a)};
        };
    }

    sim::Env env(scen);
    std::ostringstream csv;
    csv << "episode,outcome,nav-time,return\n";
    std::size_t successes = 0;
    double nav_sum = 0.0, ret_sum = 0.0;
    for (std::size_t i = 0; i < episodes; ++i) {
        sim::Rollout r = sim::rollout(env, policy, train::substream_seed(seed, i));
        double ret = 0.0, disc = 1.0;
        for (const sim::TraceStep& s : r.steps) {
            ret += disc * s.reward;
            disc *= gamma;
        }
        ret_sum += ret;
        if (r.outcome.kind == sim::Outcome::kSuccess) {
            ++successes;
            nav_sum += r.outcome.nav_time;
        }
        char buf[160];
        std::snprintf(buf, sizeof buf, "%zu,%s,%.17g,%.17g\n", i,
                      sim::to_string(r.outcome.kind).c_str(), r.outcome.nav_time, ret);
        csv << buf;
    }
    write_text_file(out_path, csv.str());

    double sr = static_cast<double>(successes) / static_cast<double>(episodes);
    double nav = successes > 0 ? nav_sum / static_cast<double>(successes) : scen.time_limit;
    char buf[192];
    std::snprintf(buf, sizeof buf,
                  "episodes=%zu success-rate=%.4f nav-time=%.2f avg-return=%.4f\n", episodes, sr,
                  nav, ret_sum / static_cast<double>(episodes));
    out << buf;
    out << "per-episode log: " << out_path << "\n";
    return 0;
}

int cmd_rollout(const std::string& ckpt_path, const std::string& kind, std::size_t n_humans,
                double time_limit, std::uint64_t seed, const std::string& out_dir,
                std::ostream& out, std::ostream& err) {
    if (ckpt_path == "orca") {
        err << "rollout: requires a trained checkpoint (the orca baseline has no embedding "
               "or attention to trace)\n";
        return 1;
    }
    LoadedModel model = load_model(ckpt_path);
    sim::ScenarioConfig scen = build_scenario(kind, n_humans, time_limit);
    sim::Env env(scen);
    TracedRollout traced = traced_rollout(*model.net, env, seed);

    std::ostringstream svg_text;
    svg::write_trajectory_svg(traced.rollout, scen.n_humans, traced.attn_to_humans, svg_text);
    write_text_file(out_dir + "/trajectory.svg", svg_text.str());
    std::ostringstream radius;
    write_radius_csv(traced.trace, radius);
    write_text_file(out_dir + "/radius.csv", radius.str());

    char buf[160];
    std::snprintf(buf, sizeof buf, "outcome=%s steps=%zu nav-time=%.2f\n",
                  sim::to_string(traced.rollout.outcome.kind).c_str(), traced.trace.size(),
                  traced.rollout.outcome.nav_time);
    out << buf;
    out << "artifacts: " << out_dir << "/trajectory.svg, " << out_dir << "/radius.csv\n";
    return 0;
}

int cmd_radius_analysis(const std::string& ckpt_path, const std::string& kind,
                        std::size_t n_humans, double time_limit, std::size_t episodes,
                        std::uint64_t seed, const std::string& out_path, std::ostream& out,
                        std::ostream& err) {
    if (ckpt_path == "orca") {
        err << "radius-analysis: requires a trained checkpoint\n";
        return 1;
    }
    LoadedModel model = load_model(ckpt_path);
    sim::ScenarioConfig scen = build_scenario(kind, n_humans, time_limit);
    sim::Env env(scen);

    std::vector<double> radius, attn;
    for (std::size_t ep = 0; ep < episodes; ++ep) {
        TracedRollout traced = traced_rollout(*model.net, env, train::substream_seed(seed, ep));
        for (const RadiusTracePoint& pt : traced.trace) {
            radius.push_back(pt.radius);
            attn.push_back(pt.attention_others);
        }
    }
    if (radius.size() < 100) {
        err << "radius-analysis: need at least 100 pooled step points, got " << radius.size()
            << "\n";
        return 1;
    }

    std::ostringstream csv;
    csv << "radius,attention-to-others\n";
    char row[96];
    for (std::size_t i = 0; i < radius.size(); ++i) {
        std::snprintf(row, sizeof row, "%.17g,%.17g\n", radius[i], attn[i]);
        csv << row;
    }
    write_text_file(out_path, csv.str());

    CorrelationReport rep = correlate(radius, attn);
    if (rep.degenerate) {
        out << "pearson r: degenerate (zero variance) over " << rep.points << " points\n";
    } else {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "pearson r = %.6f over %zu per-step points pooled across %zu episodes\n",
                      rep.r, rep.points, episodes);
        out << buf;
    }
    out << "scatter data: " << out_path << "\n";
    return 0;
}

}  // namespace

TracedRollout traced_rollout(planner::PlannerNet& net, sim::Env& env, std::uint64_t seed) {
    TracedRollout out;
    const std::vector<sim::Action> actions = sim::action_space(env.config().robot_vmax);
    if (actions.size() != net.config().n_actions)
        throw std::invalid_argument("traced_rollout: checkpoint expects " +
                                    std::to_string(net.config().n_actions) +
                                    " actions but the scenario action grid has " +
                                    std::to_string(actions.size()));
    std::size_t step = 0;
    sim::Policy pol = [&](const sim::Observation& obs) {
        planner::QOutput qo = net.q_values(obs);
        double r2 = 0.0;
        for (double v : qo.state_embedding) r2 += v * v;
        out.trace.push_back({step++, std::sqrt(r2), 1.0 - qo.attention[0][0]});
        std::vector<double> row(obs.humans.size());
        for (std::size_t i = 0; i < obs.humans.size(); ++i) row[i] = qo.attention[0][i + 1];
        out.attn_to_humans.push_back(std::move(row));
        std::size_t a = argmax(qo.q);
        return sim::PolicyDecision{actions[a], static_cast<int>(a)};
    };
    out.rollout = sim::rollout(env, pol, seed);
    return out;
}

CorrelationReport correlate(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("correlate: length mismatch");
    CorrelationReport rep;
    rep.points = x.size();
    if (x.size() < 2) {
        rep.degenerate = true;
        return rep;
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
        rep.degenerate = true;
        return rep;
    }
    rep.r = sxy / std::sqrt(sxx * syy);
    return rep;
}

void write_radius_csv(const std::vector<RadiusTracePoint>& pts, std::ostream& out) {
    out << "step,radius,attention-to-others\n";
    char buf[96];
    for (const RadiusTracePoint& p : pts) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", p.step, p.radius, p.attention_others);
        out << buf;
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"hyperbolic crowd-navigation experiments"};
    app.require_subcommand(1);

    std::string t_config, t_out;
    std::uint64_t t_seed = 0;
    CLI::App* t = app.add_subcommand("train", "train a policy from a config file");
    t->add_option("--config", t_config, "experiment config file")->required();
    CLI::Option* t_seed_opt = t->add_option("--seed", t_seed, "override the training seed");
    CLI::Option* t_out_opt = t->add_option("--out", t_out, "override the output directory");

    std::string e_ckpt, e_kind = "simple-circle", e_out = "eval_episodes.csv";
    std::size_t e_episodes = 1000, e_humans = 5;
    double e_limit = 30.0;
    std::uint64_t e_seed = 0;
    CLI::App* e = app.add_subcommand("eval", "evaluate a checkpoint (or the builtin 'orca')");
    e->add_option("--checkpoint", e_ckpt, "checkpoint path or 'orca'")->required();
    e->add_option("--scenario", e_kind, "simple-circle | complex-circle | complex-square");
    e->add_option("--episodes", e_episodes, "number of evaluation episodes");
    e->add_option("--humans", e_humans, "humans in the scenario");
    e->add_option("--time-limit", e_limit, "episode time limit in seconds");
    e->add_option("--seed", e_seed, "evaluation seed");
    e->add_option("--out", e_out, "per-episode CSV path");

    std::string r_ckpt, r_kind = "simple-circle", r_out = "rollout_out";
    std::size_t r_humans = 5;
    double r_limit = 30.0;
    std::uint64_t r_seed = 0;
    CLI::App* r = app.add_subcommand("rollout", "render one greedy episode");
    r->add_option("--checkpoint", r_ckpt, "checkpoint path")->required();
    r->add_option("--scenario", r_kind, "scenario kind");
    r->add_option("--humans", r_humans, "humans in the scenario");
    r->add_option("--time-limit", r_limit, "episode time limit in seconds");
    r->add_option("--seed", r_seed, "episode seed");
    r->add_option("--out", r_out, "output directory for trajectory.svg and radius.csv");

    std::string a_ckpt, a_kind = "complex-circle", a_out = "radius_scatter.csv";
    std::size_t a_episodes = 50, a_humans = 5;
    double a_limit = 30.0;
    std::uint64_t a_seed = 0;
    CLI::App* a = app.add_subcommand("radius-analysis",
                                     "correlate embedding radius with attention to others");
    a->add_option("--checkpoint", a_ckpt, "checkpoint path")->required();
    a->add_option("--scenario", a_kind, "scenario kind");
    a->add_option("--episodes", a_episodes, "episodes to pool");
    a->add_option("--humans", a_humans, "humans in the scenario");
    a->add_option("--time-limit", a_limit, "episode time limit in seconds");
    a->add_option("--seed", a_seed, "analysis seed");
    a->add_option("--out", a_out, "scatter CSV path");

    std::vector<std::string> full;
    full.reserve(args.size() + 1);
    full.push_back("hyp2nav");
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(full.size());
    for (const std::string& s : full) argv.push_back(s.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& pe) {
        return app.exit(pe, out, err);
    }

    try {
        if (t->parsed())
            return cmd_train(t_config, t_seed_opt->count() ? &t_seed : nullptr,
                             t_out_opt->count() ? &t_out : nullptr, out, err);
        if (e->parsed())
            return cmd_eval(e_ckpt, e_kind, e_humans, e_limit, e_episodes, e_seed, e_out, out, err);
        if (r->parsed())
            return cmd_rollout(r_ckpt, r_kind, r_humans, r_limit, r_seed, r_out, out, err);
        if (a->parsed())
            return cmd_radius_analysis(a_ckpt, a_kind, a_humans, a_limit, a_episodes, a_seed,
                                       a_out, out, err);
    } catch (const std::exception& ex) {
        err << ex.what() << "\n";
        return 1;
    }
    err << "no command\n";
    return 1;
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace hyp2nav::cli
