#include "jumpctrl/simulate.hpp"

#include <algorithm>
#include <cmath>

namespace jumpctrl {

State Trajectory::state_at_event(std::size_t e) const {
  const std::size_t n = static_cast<std::size_t>(num_species);
  return State(states_flat.begin() + static_cast<std::ptrdiff_t>(e * n),
               states_flat.begin() + static_cast<std::ptrdiff_t>((e + 1) * n));
}

State Trajectory::state_at(double t) const {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return initial;
  return state_at_event(static_cast<std::size_t>(it - times.begin()) - 1);
}

State state_from_density(const JumpModel& model, const std::vector<double>& z0) {
  if (static_cast<int>(z0.size()) != model.num_species())
    throw ConfigError("initial density dimension mismatch");
  State x(z0.size());
  const double N = static_cast<double>(model.scaling());
  for (std::size_t i = 0; i < z0.size(); ++i) {
    const double v = z0[i] * N;
    const double r = std::round(v);
    if (std::abs(v - r) > 1e-9 * std::max(1.0, std::abs(v)))
      throw ConfigError("initial density times N is not an integer state");
    if (r < 0.0) throw ConfigError("initial state must be non-negative");
    x[i] = static_cast<std::int64_t>(r);
  }
  return x;
}

std::vector<double> density_of(const State& x, std::int64_t scaling) {
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    z[i] = static_cast<double>(x[i]) / static_cast<double>(scaling);
  return z;
}

std::vector<double> tau_order_factors(const JumpModel& model) {
  std::vector<double> g(static_cast<std::size_t>(model.num_species()), 1.0);
  for (const Reaction& r : model.reactions()) {
    std::int64_t order = 0;
    for (std::int64_t v : r.reactants) order += v;
    for (std::size_t i = 0; i < r.reactants.size(); ++i)
      if (r.reactants[i] > 0) g[i] = std::max(g[i], static_cast<double>(order));
  }
  return g;
}

double select_tau_from_rates(const JumpModel& model, const State& x,
                             const std::vector<double>& rates, const std::vector<double>& tau_g,
                             double eps_tau) {
  double tau = std::numeric_limits<double>::infinity();
  const int n = model.num_species();
  for (int i = 0; i < n; ++i) {
    double mu = 0.0;
    double sig2 = 0.0;
    for (int k = 0; k < model.num_reactions(); ++k) {
      const double l = static_cast<double>(model.reactions()[static_cast<std::size_t>(k)].jump[static_cast<std::size_t>(i)]);
      if (l == 0.0) continue;
      const double rate = rates[static_cast<std::size_t>(k)];
      mu += l * rate;
      sig2 += l * l * rate;
    }
    const double bound = std::max(eps_tau * static_cast<double>(x[static_cast<std::size_t>(i)]) /
                                      tau_g[static_cast<std::size_t>(i)],
                                  1.0);
    if (mu != 0.0) tau = std::min(tau, bound / std::abs(mu));
    if (sig2 > 0.0) tau = std::min(tau, bound * bound / sig2);
  }
  return tau;
}

double select_tau(const JumpModel& model, int control, const State& x, double eps_tau) {
  SimScratch ws;
  ws.tau_g = tau_order_factors(model);
  model.propensities(control, x, ws.rates);
  return select_tau_from_rates(model, x, ws.rates, ws.tau_g, eps_tau);
}

SsaStep ssa_step(const JumpModel& model, int control, const State& x, RngStream& rng) {
  SimScratch ws;
  const double total = model.propensities(control, x, ws.rates);
  if (total <= 0.0) return {std::numeric_limits<double>::infinity(), x};
  const double wait = rng.exponential(total);
  double u = rng.uniform01() * total;
  int k = 0;
  for (; k + 1 < model.num_reactions(); ++k) {
    u -= ws.rates[static_cast<std::size_t>(k)];
    if (u < 0.0) break;
  }
  State next = x;
  const auto& jump = model.reactions()[static_cast<std::size_t>(k)].jump;
  for (std::size_t i = 0; i < next.size(); ++i) next[i] += jump[i];
  return {wait, std::move(next)};
}

State tau_leap_step(const JumpModel& model, int control, const State& x, double tau,
                    RngStream& rng) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be positive and finite");
  SimScratch ws;
  ws.tau_g = tau_order_factors(model);
  State cur = x;
  double remaining = tau;
  NullObserver obs;
  while (remaining > 0.0) {
    const double total = model.propensities(control, cur, ws.rates);
    if (total <= 0.0) break;
    double win = remaining;
    bool accepted = false;
    for (int halving = 0; halving <= kMaxTauHalvings; ++halving) {
      ws.next = cur;
      for (int k = 0; k < model.num_reactions(); ++k) {
        const double mean = ws.rates[static_cast<std::size_t>(k)] * win;
        if (mean <= 0.0) continue;
        const std::uint64_t count = rng.poisson(mean);
        if (count == 0) continue;
        const auto& jump = model.reactions()[static_cast<std::size_t>(k)].jump;
        for (std::size_t i = 0; i < cur.size(); ++i)
          ws.next[i] += static_cast<std::int64_t>(count) * jump[i];
      }
      bool nonneg = true;
      for (std::int64_t v : ws.next)
        if (v < 0) nonneg = false;
      if (nonneg) {
        cur = ws.next;
        remaining -= win;
        accepted = true;
        break;
      }
      win *= 0.5;
    }
    if (!accepted) {
      ssa_segment(model, control, cur, 0.0, win, rng, ws, obs);
      remaining -= win;
    }
  }
  return cur;
}

namespace {

Trajectory simulate_impl(const JumpModel& model, const Policy& policy,
                         const StagedHorizon& horizon, const std::vector<double>& z0,
                         RngStream rng, SimMethod method, double eps_tau) {
  Trajectory traj;
  traj.initial = state_from_density(model, z0);
  traj.num_species = model.num_species();
  traj.end_time = horizon.total_time();
  traj.exact = method == SimMethod::Ssa;
  SimScratch ws;
  if (method == SimMethod::TauLeap) ws.tau_g = tau_order_factors(model);
  State x = traj.initial;
  TrajectoryRecorder rec{&traj};
  for (int j = 0; j < horizon.num_stages(); ++j) {
    const int control = policy_control(policy, j, x);
    traj.controls_applied.push_back(control);
    const double t0 = horizon.stage_times[static_cast<std::size_t>(j)];
    const double t1 = horizon.stage_times[static_cast<std::size_t>(j) + 1];
    if (method == SimMethod::Ssa)
      traj.step_count += ssa_segment(model, control, x, t0, t1, rng, ws, rec);
    else
      traj.step_count += tau_leap_segment(model, control, x, t0, t1, rng, ws, eps_tau, rec);
  }
  return traj;
}

}  // namespace

Trajectory simulate_ssa(const JumpModel& model, const Policy& policy, const StagedHorizon& horizon,
                        const std::vector<double>& z0, RngStream rng) {
  return simulate_impl(model, policy, horizon, z0, rng, SimMethod::Ssa, 0.0);
}

Trajectory simulate_tau_leap(const JumpModel& model, const Policy& policy,
                             const StagedHorizon& horizon, const std::vector<double>& z0,
                             RngStream rng, double eps_tau) {
  return simulate_impl(model, policy, horizon, z0, rng, SimMethod::TauLeap, eps_tau);
}

}  // namespace jumpctrl
