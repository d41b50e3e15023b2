#pragma once

#include <string>

#include "hyp2nav/curiosity.hpp"
#include "hyp2nav/planner.hpp"
#include "hyp2nav/sim.hpp"
#include "hyp2nav/trainer.hpp"

// Experiment configuration in a sectioned key = value text format:
//
//   [scenario]
//   kind = simple-circle
//   n_humans = 5
//   [policy]
//   ball_dim = 2
//   [curiosity]
//   eta = 0.1
//   [training]
//   episodes = 10000
//   [output]
//   dir = runs/simple2d
//
// '#' and ';' start comments. Unknown sections or keys are errors, as are
// values of the wrong type; every message carries the line number. Omitted
// keys keep the defaults above. The curiosity net's observation length and
// action count always follow the scenario and policy sections; its ball_dim
// may be stated but must then match the policy's.

namespace hyp2nav::config {

struct ExperimentConfig {
    sim::ScenarioConfig scenario;
    planner::PolicyConfig policy;
    curiosity::CuriosityConfig curiosity;
    train::TrainRunConfig training;
    std::string out_dir = "out";

    // Re-derives the curiosity dimensions from the other sections and runs
    // every section's own validation. Throws std::invalid_argument.
    void resolve_and_validate();
};

// Serialization is stable: fixed section and key order, %.17g numbers, so
// parse(to_ini(c)) reproduces c exactly and to_ini is byte-deterministic.
std::string to_ini(const ExperimentConfig& cfg);

ExperimentConfig parse_string(const std::string& text);  // std::invalid_argument
ExperimentConfig parse_file(const std::string& path);    // std::runtime_error names the path

}  // namespace hyp2nav::config
