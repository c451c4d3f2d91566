#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "jumpctrl/cost.hpp"
#include "jumpctrl/model.hpp"
#include "jumpctrl/policy.hpp"
#include "jumpctrl/rng.hpp"

namespace jumpctrl {

enum class SimMethod { Ssa, TauLeap };

inline constexpr double kDefaultEpsTau = 0.03;
inline constexpr int kMaxTauHalvings = 10;

// Piecewise-constant sample path. Events store the post-jump state; the
// state is constant between consecutive event times.
struct Trajectory {
  State initial;
  int num_species = 0;
  double end_time = 0.0;
  bool exact = true;
  std::vector<int> controls_applied;     // per stage
  std::vector<double> times;             // strictly increasing, within (0, T]
  std::vector<std::int64_t> states_flat; // num_species entries per event
  std::uint64_t step_count = 0;          // SSA events or accepted leaps

  std::size_t num_events() const { return times.size(); }
  State state_at_event(std::size_t e) const;
  State state_at(double t) const;  // piecewise-constant lookup
};

State state_from_density(const JumpModel& model, const std::vector<double>& z0);
std::vector<double> density_of(const State& x, std::int64_t scaling);

struct SimScratch {
  std::vector<double> rates;
  State next;
  std::vector<double> tau_g;  // per-species highest reactant order (tau selection)
};

// highest order of any reaction consuming species i; 1 when never consumed
std::vector<double> tau_order_factors(const JumpModel& model);

// ---- fixed-control SSA over [t0, t1) -------------------------------------
//
// Advances x in place; calls obs.hold(x, a, b) on every maximal constancy
// interval and obs.jump(t, x) after every jump. Returns the event count.
template <class Obs>
std::uint64_t ssa_segment(const JumpModel& model, int control, State& x, double t0, double t1,
                          RngStream& rng, SimScratch& ws, Obs&& obs) {
  const int m = model.num_reactions();
  const int n = model.num_species();
  const CompiledRate* cr = model.compiled_rates(control);
  const std::int64_t* jumps = model.jumps_flat();
  ws.rates.resize(static_cast<std::size_t>(m));
  double* rates = ws.rates.data();
  std::int64_t* xs = x.data();
  std::uint64_t events = 0;
  double t = t0;
  for (;;) {
    double total = 0.0;
    for (int k = 0; k < m; ++k) {
      const double r = compiled_rate(cr[k], xs);
      rates[k] = r;
      total += r;
    }
    if (total <= 0.0) {
      obs.hold(x, t, t1);
      return events;
    }
    const double wait = rng.exponential(total);
    if (t + wait >= t1) {
      obs.hold(x, t, t1);
      return events;
    }
    obs.hold(x, t, t + wait);
    t += wait;
    double u = rng.uniform01() * total;
    int k = 0;
    for (; k + 1 < m; ++k) {
      u -= rates[k];
      if (u < 0.0) break;
    }
    const std::int64_t* jump = jumps + static_cast<std::size_t>(k) * static_cast<std::size_t>(n);
    for (int i = 0; i < n; ++i) xs[i] += jump[i];
    ++events;
    obs.jump(t, x);
  }
}

// Cao-Gillespie style candidate leap from precomputed per-reaction rates.
double select_tau_from_rates(const JumpModel& model, const State& x,
                             const std::vector<double>& rates, const std::vector<double>& tau_g,
                             double eps_tau);

// ---- fixed-control explicit tau-leaping over [t0, t1) ---------------------
//
// Candidate leaps are clipped to the segment end. A leap that would drive
// any component negative is rejected and retried with half the step;
// after kMaxTauHalvings failures the last window is simulated with SSA.
template <class Obs>
std::uint64_t tau_leap_segment(const JumpModel& model, int control, State& x, double t0, double t1,
                               RngStream& rng, SimScratch& ws, double eps_tau, Obs&& obs) {
  const int m = model.num_reactions();
  const int n = model.num_species();
  const std::int64_t* jumps = model.jumps_flat();
  std::uint64_t steps = 0;
  double t = t0;
  while (t < t1) {
    const double total = model.propensities(control, x, ws.rates);
    if (total <= 0.0) {
      obs.hold(x, t, t1);
      return steps;
    }
    double tau = select_tau_from_rates(model, x, ws.rates, ws.tau_g, eps_tau);
    if (t + tau >= t1) tau = t1 - t;
    bool accepted = false;
    for (int halving = 0; halving <= kMaxTauHalvings; ++halving) {
      ws.next = x;
      bool changed = false;
      for (int k = 0; k < m; ++k) {
        const double mean = ws.rates[static_cast<std::size_t>(k)] * tau;
        if (mean <= 0.0) continue;
        const std::uint64_t count = rng.poisson(mean);
        if (count == 0) continue;
        changed = true;
        const std::int64_t* jump = jumps + static_cast<std::size_t>(k) * static_cast<std::size_t>(n);
        for (int i = 0; i < n; ++i)
          ws.next[static_cast<std::size_t>(i)] += static_cast<std::int64_t>(count) * jump[i];
      }
      bool nonneg = true;
      for (std::int64_t v : ws.next)
        if (v < 0) nonneg = false;
      if (nonneg) {
        obs.hold(x, t, t + tau);
        t += tau;
        ++steps;
        if (changed) {
          x = ws.next;
          obs.jump(t, x);
        }
        accepted = true;
        break;
      }
      tau *= 0.5;
    }
    if (!accepted) {
      // exact steps across the last rejected window
      steps += ssa_segment(model, control, x, t, t + tau, rng, ws, obs);
      t += tau;
    }
  }
  return steps;
}

struct NullObserver {
  void hold(const State&, double, double) {}
  void jump(double, const State&) {}
};

// exact running-cost integral of a piecewise-constant path
struct RunningCostObserver {
  const CompiledCostFunction* phi = nullptr;
  double acc = 0.0;
  void hold(const State& x, double a, double b) { acc += phi->eval(x.data()) * (b - a); }
  void jump(double, const State&) {}
};

struct TrajectoryRecorder {
  Trajectory* out;
  void hold(const State&, double, double) {}
  void jump(double t, const State& x) {
    out->times.push_back(t);
    out->states_flat.insert(out->states_flat.end(), x.begin(), x.end());
  }
};

// ---- single-step operations ----------------------------------------------

struct SsaStep {
  double wait;  // infinity when the state is absorbing
  State next;
};
SsaStep ssa_step(const JumpModel& model, int control, const State& x, RngStream& rng);

double select_tau(const JumpModel& model, int control, const State& x, double eps_tau);

// one leap of width tau with rejection handling; exact SSA fallback keeps
// the result within [0, tau] elapsed time
State tau_leap_step(const JumpModel& model, int control, const State& x, double tau,
                    RngStream& rng);

// ---- whole-path simulation under a policy ---------------------------------

Trajectory simulate_ssa(const JumpModel& model, const Policy& policy, const StagedHorizon& horizon,
                        const std::vector<double>& z0, RngStream rng);

Trajectory simulate_tau_leap(const JumpModel& model, const Policy& policy,
                             const StagedHorizon& horizon, const std::vector<double>& z0,
                             RngStream rng, double eps_tau = kDefaultEpsTau);

// Fused policy rollout: exact path cost, lookup-tag counts and optional
// per-stage state hook, without storing the trajectory.
struct PathOutcome {
  double cost = 0.0;
  std::array<std::uint64_t, 3> tag_counts{};  // indexed by LookupTag
  std::uint64_t steps = 0;
};

template <class StageHook>
PathOutcome run_policy_path(const JumpModel& model, const Policy& policy,
                            const StagedHorizon& horizon, const CompiledSpec& spec,
                            const State& x0, SimMethod method, double eps_tau, RngStream& rng,
                            SimScratch& ws, StageHook&& hook) {
  PathOutcome out;
  State x = x0;
  for (int j = 0; j < horizon.num_stages(); ++j) {
    hook(j, x);
    LookupTag tag;
    const int control = policy_control(policy, j, x, &tag);
    ++out.tag_counts[static_cast<std::size_t>(tag)];
    out.cost += spec.r(control).eval(x.data());
    RunningCostObserver cost_obs{&spec.phi(control), 0.0};
    const double t0 = horizon.stage_times[static_cast<std::size_t>(j)];
    const double t1 = horizon.stage_times[static_cast<std::size_t>(j) + 1];
    if (method == SimMethod::Ssa)
      out.steps += ssa_segment(model, control, x, t0, t1, rng, ws, cost_obs);
    else
      out.steps += tau_leap_segment(model, control, x, t0, t1, rng, ws, eps_tau, cost_obs);
    out.cost += cost_obs.acc;
  }
  out.cost += spec.terminal.eval(x.data());
  hook(horizon.num_stages(), x);
  return out;
}

inline PathOutcome run_policy_path(const JumpModel& model, const Policy& policy,
                                   const StagedHorizon& horizon, const CompiledSpec& spec,
                                   const State& x0, SimMethod method, double eps_tau,
                                   RngStream& rng, SimScratch& ws) {
  return run_policy_path(model, policy, horizon, spec, x0, method, eps_tau, rng, ws,
                         [](int, const State&) {});
}

inline PathOutcome run_policy_path(const JumpModel& model, const Policy& policy,
                                   const StagedHorizon& horizon, const CostSpec& spec,
                                   const State& x0, SimMethod method, double eps_tau,
                                   RngStream& rng, SimScratch& ws) {
  const CompiledSpec compiled(spec, model);
  return run_policy_path(model, policy, horizon, compiled, x0, method, eps_tau, rng, ws,
                         [](int, const State&) {});
}

}  // namespace jumpctrl
