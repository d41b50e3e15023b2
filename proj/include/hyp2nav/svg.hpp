#pragma once

#include <ostream>
#include <vector>

#include "hyp2nav/sim.hpp"

// Trajectory rendering: one polyline path per agent over the whole episode,
// start markers, final-position circles at physical radius, and a cross at
// the robot's goal. Humans are colored on a cold-to-hot scale by the mean
// attention the robot paid them; the most-attended human lands exactly on
// the hot end.

namespace hyp2nav::svg {

inline constexpr const char* kRobotColor = "#1f3a93";
inline constexpr const char* kColdColor = "#2c7bb6";
inline constexpr const char* kHotColor = "#d7191c";

// Linear blend between the cold and hot colors, t clamped to [0, 1].
std::string attention_color(double t);

// `attn_per_step` holds, for each step of the rollout, the robot's attention
// to each human (n_humans values per row). Pass an empty vector to render
// every human in the cold color.
void write_trajectory_svg(const sim::Rollout& rollout, std::size_t n_humans,
                          const std::vector<std::vector<double>>& attn_per_step,
                          std::ostream& out);

}  // namespace hyp2nav::svg
