#include "hyp2nav/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace hyp2nav::config {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
    throw std::invalid_argument("config line " + std::to_string(line) + ": " + msg);
}

double as_double(const std::string& v, std::size_t line, const std::string& key) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        fail(line, key + ": expected a number, got '" + v + "'");
    }
    if (used != v.size()) fail(line, key + ": trailing characters in '" + v + "'");
    return x;
}

std::size_t as_size(const std::string& v, std::size_t line, const std::string& key) {
    std::size_t used = 0;
    unsigned long long x = 0;
    try {
        x = std::stoull(v, &used);
    } catch (const std::exception&) {
        fail(line, key + ": expected a nonnegative integer, got '" + v + "'");
    }
    if (used != v.size()) fail(line, key + ": trailing characters in '" + v + "'");
    return static_cast<std::size_t>(x);
}

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

void ExperimentConfig::resolve_and_validate() {
    curiosity.ball_dim = policy.ball_dim;
    curiosity.n_humans = scenario.n_humans;
    curiosity.n_actions = policy.n_actions;
    policy.validate();
    curiosity.validate();
    training.validate();
    if (scenario.dt <= 0.0) throw std::invalid_argument("scenario: dt must be positive");
    if (scenario.time_limit <= 0.0) throw std::invalid_argument("scenario: time_limit must be positive");
    if (scenario.robot_vmax <= 0.0) throw std::invalid_argument("scenario: robot_vmax must be positive");
    if (out_dir.empty()) throw std::invalid_argument("output: dir must not be empty");
}

std::string to_ini(const ExperimentConfig& cfg) {
    std::ostringstream o;
    o << "[scenario]\n";
    o << "kind = " << sim::to_string(cfg.scenario.kind) << "\n";
    o << "n_humans = " << cfg.scenario.n_humans << "\n";
    o << "circle_radius = " << num(cfg.scenario.circle_radius) << "\n";
    o << "square_side = " << num(cfg.scenario.square_side) << "\n";
    o << "dt = " << num(cfg.scenario.dt) << "\n";
    o << "time_limit = " << num(cfg.scenario.time_limit) << "\n";
    o << "human_radius = " << num(cfg.scenario.human_radius) << "\n";
    o << "human_vpref = " << num(cfg.scenario.human_vpref) << "\n";
    o << "robot_radius = " << num(cfg.scenario.robot_radius) << "\n";
    o << "robot_vmax = " << num(cfg.scenario.robot_vmax) << "\n";
    o << "spawn_noise = " << num(cfg.scenario.spawn_noise) << "\n";
    o << "spawn_clearance = " << num(cfg.scenario.spawn_clearance) << "\n";
    o << "orca_tau = " << num(cfg.scenario.orca_tau) << "\n";
    o << "orca_neighbor_dist = " << num(cfg.scenario.orca_neighbor_dist) << "\n";
    o << "\n[policy]\n";
    o << "ball_dim = " << cfg.policy.ball_dim << "\n";
    o << "phi_hidden = " << cfg.policy.phi_hidden << "\n";
    o << "phi_out = " << cfg.policy.phi_out << "\n";
    o << "gat_dim = " << cfg.policy.gat_dim << "\n";
    o << "va_hidden = " << cfg.policy.va_hidden << "\n";
    o << "n_actions = " << cfg.policy.n_actions << "\n";
    o << "leaky_slope = " << num(cfg.policy.leaky_slope) << "\n";
    o << "eps_start = " << num(cfg.policy.eps_start) << "\n";
    o << "eps_end = " << num(cfg.policy.eps_end) << "\n";
    o << "eps_decay_episodes = " << cfg.policy.eps_decay_episodes << "\n";
    o << "\n[curiosity]\n";
    o << "ball_dim = " << cfg.curiosity.ball_dim << "\n";
    o << "hidden = " << cfg.curiosity.hidden << "\n";
    o << "eta = " << num(cfg.curiosity.eta) << "\n";
    o << "beta = " << num(cfg.curiosity.beta) << "\n";
    o << "lambda = " << num(cfg.curiosity.lambda) << "\n";
    o << "\n[training]\n";
    o << "episodes = " << cfg.training.episodes << "\n";
    o << "eval_every = " << cfg.training.eval_every << "\n";
    o << "eval_episodes = " << cfg.training.eval_episodes << "\n";
    o << "lr = " << num(cfg.training.lr) << "\n";
    o << "gamma = " << num(cfg.training.gamma) << "\n";
    o << "batch_size = " << cfg.training.batch_size << "\n";
    o << "capacity = " << cfg.training.capacity << "\n";
    o << "warmup = " << cfg.training.warmup << "\n";
    o << "sync_every = " << cfg.training.sync_every << "\n";
    o << "seed = " << cfg.training.seed << "\n";
    o << "\n[output]\n";
    o << "dir = " << cfg.out_dir << "\n";
    return o.str();
}

ExperimentConfig parse_string(const std::string& text) {
    ExperimentConfig cfg;
    bool curiosity_ball_set = false;
    std::size_t curiosity_ball_line = 0;

    std::istringstream in(text);
    std::string raw, section;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = trim(raw);
        std::size_t hash = s.find_first_of("#;");
        if (hash != std::string::npos) s = trim(s.substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(line, "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section != "scenario" && section != "policy" && section != "curiosity" &&
                section != "training" && section != "output")
                fail(line, "unknown section [" + section + "]");
            continue;
        }
        std::size_t eq = s.find('=');
        if (eq == std::string::npos) fail(line, "expected key = value, got '" + s + "'");
        std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));
        if (key.empty()) fail(line, "empty key");
        if (val.empty()) fail(line, key + ": empty value");
        if (section.empty()) fail(line, "key '" + key + "' before any section header");

        if (section == "scenario") {
            if (key == "kind") {
                try {
                    cfg.scenario.kind = sim::scenario_kind_from_string(val);
                } catch (const std::exception& e) {
                    fail(line, e.what());
                }
            } else if (key == "n_humans") {
                cfg.scenario.n_humans = as_size(val, line, key);
            } else if (key == "circle_radius") {
                cfg.scenario.circle_radius = as_double(val, line, key);
            } else if (key == "square_side") {
                cfg.scenario.square_side = as_double(val, line, key);
            } else if (key == "dt") {
                cfg.scenario.dt = as_double(val, line, key);
            } else if (key == "time_limit") {
                cfg.scenario.time_limit = as_double(val, line, key);
            } else if (key == "human_radius") {
                cfg.scenario.human_radius = as_double(val, line, key);
            } else if (key == "human_vpref") {
                cfg.scenario.human_vpref = as_double(val, line, key);
            } else if (key == "robot_radius") {
                cfg.scenario.robot_radius = as_double(val, line, key);
            } else if (key == "robot_vmax") {
                cfg.scenario.robot_vmax = as_double(val, line, key);
            } else if (key == "spawn_noise") {
                cfg.scenario.spawn_noise = as_double(val, line, key);
            } else if (key == "spawn_clearance") {
                cfg.scenario.spawn_clearance = as_double(val, line, key);
            } else if (key == "orca_tau") {
                cfg.scenario.orca_tau = as_double(val, line, key);
            } else if (key == "orca_neighbor_dist") {
                cfg.scenario.orca_neighbor_dist = as_double(val, line, key);
            } else {
                fail(line, "unknown key '" + key + "' in [scenario]");
            }
        } else if (section == "policy") {
            if (key == "ball_dim") {
                cfg.policy.ball_dim = as_size(val, line, key);
            } else if (key == "phi_hidden") {
                cfg.policy.phi_hidden = as_size(val, line, key);
            } else if (key == "phi_out") {
                cfg.policy.phi_out = as_size(val, line, key);
            } else if (key == "gat_dim") {
                cfg.policy.gat_dim = as_size(val, line, key);
            } else if (key == "va_hidden") {
                cfg.policy.va_hidden = as_size(val, line, key);
            } else if (key == "n_actions") {
                cfg.policy.n_actions = as_size(val, line, key);
            } else if (key == "leaky_slope") {
                cfg.policy.leaky_slope = as_double(val, line, key);
            } else if (key == "eps_start") {
                cfg.policy.eps_start = as_double(val, line, key);
            } else if (key == "eps_end") {
                cfg.policy.eps_end = as_double(val, line, key);
            } else if (key == "eps_decay_episodes") {
                cfg.policy.eps_decay_episodes = as_size(val, line, key);
            } else {
                fail(line, "unknown key '" + key + "' in [policy]");
            }
        } else if (section == "curiosity") {
            if (key == "ball_dim") {
                cfg.curiosity.ball_dim = as_size(val, line, key);
                curiosity_ball_set = true;
                curiosity_ball_line = line;
            } else if (key == "hidden") {
                cfg.curiosity.hidden = as_size(val, line, key);
            } else if (key == "eta") {
                cfg.curiosity.eta = as_double(val, line, key);
            } else if (key == "beta") {
                cfg.curiosity.beta = as_double(val, line, key);
            } else if (key == "lambda") {
                cfg.curiosity.lambda = as_double(val, line, key);
            } else {
                fail(line, "unknown key '" + key + "' in [curiosity]");
            }
        } else if (section == "training") {
            if (key == "episodes") {
                cfg.training.episodes = as_size(val, line, key);
            } else if (key == "eval_every") {
                cfg.training.eval_every = as_size(val, line, key);
            } else if (key == "eval_episodes") {
                cfg.training.eval_episodes = as_size(val, line, key);
            } else if (key == "lr") {
                cfg.training.lr = as_double(val, line, key);
            } else if (key == "gamma") {
                cfg.training.gamma = as_double(val, line, key);
            } else if (key == "batch_size") {
                cfg.training.batch_size = as_size(val, line, key);
            } else if (key == "capacity") {
                cfg.training.capacity = as_size(val, line, key);
            } else if (key == "warmup") {
                cfg.training.warmup = as_size(val, line, key);
            } else if (key == "sync_every") {
                cfg.training.sync_every = as_size(val, line, key);
            } else if (key == "seed") {
                cfg.training.seed = as_size(val, line, key);
            } else {
                fail(line, "unknown key '" + key + "' in [training]");
            }
        } else {  // output
            if (key == "dir") {
                cfg.out_dir = val;
            } else {
                fail(line, "unknown key '" + key + "' in [output]");
            }
        }
    }

    if (curiosity_ball_set && cfg.curiosity.ball_dim != cfg.policy.ball_dim)
        fail(curiosity_ball_line,
             "curiosity ball_dim " + std::to_string(cfg.curiosity.ball_dim) +
                 " does not match policy ball_dim " + std::to_string(cfg.policy.ball_dim));
    cfg.resolve_and_validate();
    return cfg;
}

ExperimentConfig parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_string(buf.str());
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

}  // namespace hyp2nav::config
