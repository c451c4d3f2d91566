#include "jumpctrl/cost_ops.hpp"

#include <algorithm>
#include <cmath>

#include "jumpctrl/parallel.hpp"

namespace jumpctrl {

double path_cost(const Trajectory& traj, const JumpModel& model, const CostSpec& spec,
                 const StagedHorizon& horizon) {
  if (traj.end_time < horizon.total_time())
    throw ConfigError("trajectory does not cover the horizon");
  const double N = static_cast<double>(model.scaling());
  double cost = 0.0;
  State x = traj.initial;
  std::size_t e = 0;
  for (int j = 0; j < horizon.num_stages(); ++j) {
    const double t0 = horizon.stage_times[static_cast<std::size_t>(j)];
    const double t1 = horizon.stage_times[static_cast<std::size_t>(j) + 1];
    const int control = traj.controls_applied[static_cast<std::size_t>(j)];
    cost += spec.r(control).eval_state(x, N);
    const CostFunction& phi = spec.phi(control);
    double t = t0;
    while (e < traj.num_events() && traj.times[e] <= t1) {
      cost += phi.eval_state(x, N) * (traj.times[e] - t);
      t = traj.times[e];
      x = traj.state_at_event(e);
      ++e;
    }
    cost += phi.eval_state(x, N) * (t1 - t);
  }
  cost += spec.psi().eval_state(x, N);
  return cost;
}

DiscountedCost discounted_path_cost(const Trajectory& traj, const JumpModel& model,
                                    const CostSpec& spec, double stage_width,
                                    int truncation_stage) {
  if (spec.discount <= 0.0)
    throw ConfigError("discounted cost requires beta > 0");
  if (static_cast<int>(traj.controls_applied.size()) < truncation_stage)
    throw ConfigError("trajectory is shorter than the truncation stage");
  const double N = static_cast<double>(model.scaling());
  const double lambda = std::exp(-spec.discount * stage_width);
  DiscountedCost out;
  State x = traj.initial;
  std::size_t e = 0;
  double discount = 1.0;
  for (int j = 0; j < truncation_stage; ++j) {
    const double t0 = static_cast<double>(j) * stage_width;
    const double t1 = t0 + stage_width;
    const int control = traj.controls_applied[static_cast<std::size_t>(j)];
    double stage_total = spec.r(control).eval_state(x, N);
    const CostFunction& phi = spec.phi(control);
    double t = t0;
    while (e < traj.num_events() && traj.times[e] <= t1) {
      stage_total += phi.eval_state(x, N) * (traj.times[e] - t);
      t = traj.times[e];
      x = traj.state_at_event(e);
      ++e;
    }
    stage_total += phi.eval_state(x, N) * (t1 - t);
    out.value += discount * stage_total;
    discount *= lambda;
  }
  double m_r = 0.0;
  double m_phi = 0.0;
  for (int v = 0; v < model.num_controls(); ++v) {
    m_r = std::max(m_r, spec.r(v).bound_on(model.domain()));
    m_phi = std::max(m_phi, spec.phi(v).bound_on(model.domain()));
  }
  const double m_j = (m_r + m_phi * stage_width) / (1.0 - lambda);
  out.tail_bound = discount * m_j;  // discount == lambda^k here
  return out;
}

McEstimate mc_cost_estimate(const JumpModel& model, const Policy& policy, const CostSpec& spec,
                            const StagedHorizon& horizon, const std::vector<double>& z0,
                            int num_paths, std::uint64_t seed, SimMethod method, double eps_tau,
                            int workers, std::uint64_t stream_salt,
                            std::span<const std::uint64_t> explicit_streams) {
  if (num_paths < 1) throw ConfigError("mc_cost_estimate needs at least one path");
  if (!explicit_streams.empty() && explicit_streams.size() != static_cast<std::size_t>(num_paths))
    throw ConfigError("explicit stream list length mismatch");
  const State x0 = state_from_density(model, z0);
  const CompiledSpec compiled(spec, model);
  const int nw = resolve_workers(workers);
  std::vector<double> costs(static_cast<std::size_t>(num_paths));
  std::vector<std::uint64_t> steps(static_cast<std::size_t>(num_paths));
  std::vector<std::array<std::uint64_t, 3>> tags(static_cast<std::size_t>(num_paths));
  std::vector<SimScratch> scratch(static_cast<std::size_t>(nw));
  const std::vector<double> tau_g = tau_order_factors(model);
  for (auto& ws : scratch) ws.tau_g = tau_g;
  parallel_for(static_cast<std::size_t>(num_paths), nw, [&](std::size_t i, std::size_t w) {
    const std::uint64_t stream = explicit_streams.empty()
                                     ? stream_index(phase::kEvaluate, stream_salt, i)
                                     : explicit_streams[i];
    RngStream rng(seed, stream);
    const PathOutcome res =
        run_policy_path(model, policy, horizon, compiled, x0, method, eps_tau, rng, scratch[w]);
    costs[i] = res.cost;
    steps[i] = res.steps;
    tags[i] = res.tag_counts;
  });
  // sorting makes the reduction independent of the stream-to-path
  // assignment and of any merge order
  std::sort(costs.begin(), costs.end());
  double sum = 0.0;
  for (double c : costs) sum += c;
  const double mean = sum / static_cast<double>(num_paths);
  double ss = 0.0;
  for (double c : costs) ss += (c - mean) * (c - mean);
  McEstimate out;
  out.mean = mean;
  out.stderr_ = num_paths > 1
                    ? std::sqrt(ss / (static_cast<double>(num_paths) - 1.0) /
                                static_cast<double>(num_paths))
                    : 0.0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    out.total_steps += steps[i];
    for (int k = 0; k < 3; ++k) out.tag_counts[static_cast<std::size_t>(k)] += tags[i][static_cast<std::size_t>(k)];
  }
  out.time_simulated = horizon.total_time() * static_cast<double>(num_paths);
  return out;
}

}  // namespace jumpctrl
