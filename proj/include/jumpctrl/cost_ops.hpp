#pragma once

#include <cstdint>
#include <span>

#include "jumpctrl/cost.hpp"
#include "jumpctrl/simulate.hpp"

namespace jumpctrl {

// Exact total cost of a piecewise-constant path: stage costs at the state
// observed at each t_j, running cost integrated exactly over constancy
// intervals, terminal cost at T.
double path_cost(const Trajectory& traj, const JumpModel& model, const CostSpec& spec,
                 const StagedHorizon& horizon);

struct DiscountedCost {
  double value = 0.0;       // sum over the first k stages, discounted
  double tail_bound = 0.0;  // lambda^k * M_J
};

// Discounted cost over uniform stages t_j = j*h, truncated after k stages.
// The trajectory must cover [0, k*h] with exactly k applied controls.
DiscountedCost discounted_path_cost(const Trajectory& traj, const JumpModel& model,
                                    const CostSpec& spec, double stage_width, int truncation_stage);

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::uint64_t total_steps = 0;
  double time_simulated = 0.0;
  std::array<std::uint64_t, 3> tag_counts{};
};

// Monte-Carlo cost of a policy from M independent paths. Per-path stream
// indices default to stream_index(kEvaluate, stream_salt, path); passing
// explicit streams permutes the assignment without changing the estimate.
McEstimate mc_cost_estimate(const JumpModel& model, const Policy& policy,
                            const CostSpec& spec, const StagedHorizon& horizon,
                            const std::vector<double>& z0, int num_paths, std::uint64_t seed,
                            SimMethod method, double eps_tau = kDefaultEpsTau, int workers = 0,
                            std::uint64_t stream_salt = 0,
                            std::span<const std::uint64_t> explicit_streams = {});

}  // namespace jumpctrl
