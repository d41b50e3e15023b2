#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "hyp2nav/config.hpp"

using namespace hyp2nav;
using config::ExperimentConfig;
using config::parse_file;
using config::parse_string;
using config::to_ini;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_string(text);
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    return "";
}

std::filesystem::path tmp_dir(const char* leaf) {
    auto p = std::filesystem::temp_directory_path() / leaf;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("config: empty text yields defaults") {
    ExperimentConfig cfg = parse_string("");
    CHECK(cfg.scenario.kind == sim::ScenarioKind::kSimpleCircle);
    CHECK(cfg.scenario.n_humans == 5);
    CHECK(cfg.scenario.circle_radius == 4.0);
    CHECK(cfg.policy.ball_dim == 2);
    CHECK(cfg.policy.n_actions == 81);
    CHECK(cfg.training.episodes == 10000);
    CHECK(cfg.training.gamma == 0.9);
    CHECK(cfg.out_dir == "out");
    // derived curiosity dims follow scenario/policy
    CHECK(cfg.curiosity.ball_dim == cfg.policy.ball_dim);
    CHECK(cfg.curiosity.n_humans == cfg.scenario.n_humans);
    CHECK(cfg.curiosity.n_actions == cfg.policy.n_actions);
}

TEST_CASE("config: parse reads every section and tolerates comments") {
    std::string text =
        "# experiment file\n"
        "[scenario]\n"
        "kind = complex-square   ; crossing humans\n"
        "n_humans = 3\n"
        "  square_side =  10.5\n"
        "\n"
        "[policy]\n"
        "ball_dim = 3\n"
        "phi_hidden = 32\n"
        "n_actions = 81\n"
        "[curiosity]\n"
        "eta = 0.25\n"
        "lambda = 0.5\n"
        "[training]\n"
        "episodes = 42\n"
        "lr = 5e-4\n"
        "seed = 9\n"
        "[output]\n"
        "dir = runs/demo\n";
    ExperimentConfig cfg = parse_string(text);
    CHECK(cfg.scenario.kind == sim::ScenarioKind::kComplexSquare);
    CHECK(cfg.scenario.n_humans == 3);
    CHECK(cfg.scenario.square_side == 10.5);
    CHECK(cfg.scenario.circle_radius == 4.0);  // untouched default
    CHECK(cfg.policy.ball_dim == 3);
    CHECK(cfg.policy.phi_hidden == 32);
    CHECK(cfg.curiosity.eta == 0.25);
    CHECK(cfg.curiosity.lambda == 0.5);
    CHECK(cfg.curiosity.ball_dim == 3);   // derived from policy
    CHECK(cfg.curiosity.n_humans == 3);   // derived from scenario
    CHECK(cfg.training.episodes == 42);
    CHECK(cfg.training.lr == 5e-4);
    CHECK(cfg.training.seed == 9);
    CHECK(cfg.out_dir == "runs/demo");
}

TEST_CASE("config: to_ini round-trips byte-for-byte") {
    ExperimentConfig cfg;
    cfg.scenario.kind = sim::ScenarioKind::kComplexCircle;
    cfg.scenario.n_humans = 7;
    cfg.scenario.circle_radius = 3.3;
    cfg.scenario.dt = 0.2;
    cfg.policy.ball_dim = 3;
    cfg.policy.phi_hidden = 48;
    cfg.policy.leaky_slope = 0.05;
    cfg.curiosity.eta = 1e-3;
    cfg.curiosity.beta = 0.3;
    cfg.training.episodes = 123;
    cfg.training.lr = 2.5e-4;
    cfg.training.gamma = 0.95;
    cfg.out_dir = "runs/rt";
    cfg.resolve_and_validate();

    std::string ini = to_ini(cfg);
    ExperimentConfig back = parse_string(ini);
    CHECK(to_ini(back) == ini);
    CHECK(back.scenario.circle_radius == cfg.scenario.circle_radius);
    CHECK(back.training.lr == cfg.training.lr);
    CHECK(back.curiosity.eta == cfg.curiosity.eta);
    CHECK(back.out_dir == cfg.out_dir);

    // the serialized text parses with the curiosity ball_dim stated explicitly,
    // so a policy/curiosity mismatch introduced by hand must be caught
    CHECK(ini.find("[curiosity]\nball_dim = 3") != std::string::npos);
}

TEST_CASE("config: unknown sections and keys are rejected with line numbers") {
    std::string e1 = error_of("[scenario]\nn_humans = 2\n[rewards]\nfoo = 1\n");
    CHECK(e1.find("line 3") != std::string::npos);
    CHECK(e1.find("[rewards]") != std::string::npos);

    std::string e2 = error_of("[scenario]\nkind = simple-circle\nhumans = 2\n");
    CHECK(e2.find("line 3") != std::string::npos);
    CHECK(e2.find("'humans'") != std::string::npos);
    CHECK(e2.find("[scenario]") != std::string::npos);

    std::string e3 = error_of("[policy]\nwidth = 3\n");
    CHECK(e3.find("line 2") != std::string::npos);
    CHECK(e3.find("[policy]") != std::string::npos);
}

TEST_CASE("config: malformed lines are rejected") {
    CHECK(error_of("kind = simple-circle\n").find("before any section") != std::string::npos);
    CHECK(error_of("[scenario\n").find("unterminated") != std::string::npos);
    CHECK(error_of("[scenario]\njust words\n").find("key = value") != std::string::npos);
    CHECK(error_of("[scenario]\n= 4\n").find("empty key") != std::string::npos);
    CHECK(error_of("[scenario]\ndt =\n").find("empty value") != std::string::npos);
    CHECK(error_of("[scenario]\ndt = fast\n").find("expected a number") != std::string::npos);
    CHECK(error_of("[scenario]\nn_humans = 3.5\n").find("trailing characters") !=
          std::string::npos);
    CHECK(error_of("[scenario]\nkind = spiral\n").find("line 2") != std::string::npos);
}

TEST_CASE("config: explicit curiosity ball_dim must match the policy") {
    std::string ok =
        "[policy]\nball_dim = 3\n"
        "[curiosity]\nball_dim = 3\n";
    CHECK(parse_string(ok).curiosity.ball_dim == 3);

    std::string bad =
        "[policy]\nball_dim = 3\n"
        "[curiosity]\nhidden = 16\nball_dim = 2\n";
    std::string e = error_of(bad);
    CHECK(e.find("line 5") != std::string::npos);
    CHECK(e.find("does not match policy ball_dim 3") != std::string::npos);
}

TEST_CASE("config: section validation runs on parse") {
    CHECK_THROWS_AS(parse_string("[training]\ngamma = 2\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_string("[training]\nlr = 0\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_string("[training]\nbatch_size = 0\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_string("[scenario]\ndt = -0.25\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_string("[scenario]\ntime_limit = 0\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_string("[policy]\nball_dim = 0\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_string("[output]\ndir = # comment eats the value\n"),
                    std::invalid_argument);
}

TEST_CASE("config: parse_file reads from disk and names the path on error") {
    auto dir = tmp_dir("hyp2nav_config_test");
    auto good = dir / "good.cfg";
    {
        std::ofstream f(good);
        f << "[training]\nepisodes = 7\n";
    }
    CHECK(parse_file(good.string()).training.episodes == 7);

    auto bad = dir / "bad.cfg";
    {
        std::ofstream f(bad);
        f << "[training]\nepisodes = soon\n";
    }
    try {
        parse_file(bad.string());
        CHECK(false);
    } catch (const std::runtime_error& e) {
        std::string msg = e.what();
        CHECK(msg.find(bad.string()) != std::string::npos);
        CHECK(msg.find("line 2") != std::string::npos);
    }

    auto missing = (dir / "nope.cfg").string();
    try {
        parse_file(missing);
        CHECK(false);
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find(missing) != std::string::npos);
    }
    std::filesystem::remove_all(dir);
}
