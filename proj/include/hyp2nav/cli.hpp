#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "hyp2nav/planner.hpp"
#include "hyp2nav/sim.hpp"

// Command-line entry points (train / eval / rollout / radius-analysis) and
// the interpretability plumbing they share: greedy rollouts that record the
// hyperbolic radius of the state embedding alongside how much attention the
// robot pays to anyone but itself.

namespace hyp2nav::cli {

struct RadiusTracePoint {
    std::size_t step = 0;
    double radius = 0.0;            // norm of the ball embedding, in [0, 1)
    double attention_others = 0.0;  // 1 - robot self-attention, in [0, 1]
};

struct TracedRollout {
    sim::Rollout rollout;
    std::vector<RadiusTracePoint> trace;              // one point per step
    std::vector<std::vector<double>> attn_to_humans;  // per step, per human
};

// Greedy episode with per-step instrumentation from the second GAT layer.
TracedRollout traced_rollout(planner::PlannerNet& net, sim::Env& env, std::uint64_t seed);

struct CorrelationReport {
    std::size_t points = 0;
    double r = 0.0;
    bool degenerate = false;  // zero variance on either axis
};

CorrelationReport correlate(const std::vector<double>& x, const std::vector<double>& y);

void write_radius_csv(const std::vector<RadiusTracePoint>& pts, std::ostream& out);

// Dispatches the verbs and returns the process exit code. A missing config
// file exits 2 with a message naming the path; other failures exit 1.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace hyp2nav::cli
