#include "jumpctrl/hybrid.hpp"

#include <algorithm>
#include <cmath>

#include "jumpctrl/parallel.hpp"

namespace jumpctrl {

StageStateSets build_stage_sets(const JumpModel& model, const std::vector<RankedPolicy>& good,
                                const StageStatistics& stats, const StagedHorizon& horizon,
                                const std::vector<double>& z0, int num_paths, double zeta,
                                std::uint64_t seed, SimMethod method, double eps_tau,
                                int workers) {
  if (good.size() != stats.policies.size())
    throw ConfigError("stage statistics do not match the good-policy list");
  if (zeta <= 0.0) throw ConfigError("zeta must be positive");
  const State x0 = state_from_density(model, z0);
  const int K = horizon.num_stages();
  const int n = model.num_species();
  const double N = static_cast<double>(model.scaling());
  const std::size_t M = static_cast<std::size_t>(num_paths);
  const CompiledSpec no_cost(zero_cost_spec(), model);

  const int nw = resolve_workers(workers);
  std::vector<SimScratch> scratch(static_cast<std::size_t>(nw));
  const std::vector<double> tau_g = tau_order_factors(model);
  for (auto& ws : scratch) ws.tau_g = tau_g;

  std::vector<std::vector<State>> per_stage(static_cast<std::size_t>(K));
  for (std::size_t g = 0; g < good.size(); ++g) {
    const auto& pol_stats = stats.policies[g];
    const Policy policy = OpenLoopPolicy{good[g].policy};
    // accepted states per (path, stage); merged in path order afterwards
    std::vector<std::vector<std::pair<int, State>>> slots(M);
    parallel_for(M, nw, [&](std::size_t i, std::size_t w) {
      RngStream rng(seed, stream_index(phase::kStageSets, g, i));
      run_policy_path(model, policy, horizon, no_cost, x0, method, eps_tau, rng, scratch[w],
                      [&](int j, const State& x) {
                        if (j >= K) return;
                        for (int s = 0; s < n; ++s) {
                          const double z = static_cast<double>(x[static_cast<std::size_t>(s)]) / N;
                          const double mean = pol_stats.mean[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)];
                          const double dev = zeta * pol_stats.stddev[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)];
                          if (z < mean - dev || z > mean + dev) return;
                        }
                        slots[i].emplace_back(j, x);
                      });
    });
    for (const auto& slot : slots)
      for (const auto& [j, x] : slot) per_stage[static_cast<std::size_t>(j)].push_back(x);
  }
  StageStateSets sets;
  sets.stages.resize(static_cast<std::size_t>(K));
  sets.stages[0] = make_stage_set({x0});
  for (int j = 1; j < K; ++j)
    sets.stages[static_cast<std::size_t>(j)] = make_stage_set(std::move(per_stage[static_cast<std::size_t>(j)]));
  return sets;
}

namespace {

// control for an off-set state during a DP excursion (and during
// evaluation): nearest neighbor within eps_near, open-loop otherwise
int excursion_control(const StageStateSets& sets,
                      const std::vector<std::vector<std::int32_t>>& tables,
                      const OpenLoopPolicy& fallback, double eps_near, double scaling, int stage,
                      const State& x) {
  if (eps_near > 0.0 && !sets.stages[static_cast<std::size_t>(stage)].empty()) {
    const NearestState near = nearest_state(sets, stage, x);
    if (near.found && near.distance / scaling < eps_near)
      return tables[static_cast<std::size_t>(stage)][near.index];
  }
  return fallback.control_at(stage);
}

}  // namespace

HybridSolution solve_hybrid_dp(const JumpModel& model, const StagedHorizon& horizon,
                               const CostSpec& spec, std::shared_ptr<const StageStateSets> sets,
                               const OpenLoopPolicy& fallback, const HybridSolveOptions& options) {
  const int K = horizon.num_stages();
  if (!sets || sets->num_stages() != K) throw ConfigError("stage sets do not match the horizon");
  if (static_cast<int>(fallback.controls.size()) != K)
    throw ConfigError("fallback policy length mismatch");
  const int A = model.num_controls();
  const int M = options.num_paths;
  const double N = static_cast<double>(model.scaling());
  const CompiledSpec compiled(spec, model);

  HybridSolution sol;
  sol.values.resize(static_cast<std::size_t>(K));
  std::vector<std::vector<std::int32_t>> tables(static_cast<std::size_t>(K));
  const int nw = resolve_workers(options.workers);
  std::vector<SimScratch> scratch(static_cast<std::size_t>(nw));
  const std::vector<double> tau_g = tau_order_factors(model);
  for (auto& ws : scratch) ws.tau_g = tau_g;

  for (int k = K - 1; k >= 0; --k) {
    const auto& set_k = sets->stages[static_cast<std::size_t>(k)];
    const std::size_t S = set_k.size();
    sol.values[static_cast<std::size_t>(k)].assign(S, 0.0);
    tables[static_cast<std::size_t>(k)].assign(S, 0);
    parallel_for(S, nw, [&](std::size_t s, std::size_t w) {
      const State start = set_k.states()[s];
      double best_q = 0.0;
      std::int32_t best_v = 0;
      for (int v = 0; v < A; ++v) {
        double sum = 0.0;
        for (int i = 0; i < M; ++i) {
          RngStream rng(options.seed,
                        stream_index(phase::kHybridDp, static_cast<std::uint64_t>(k), s,
                                     static_cast<std::uint64_t>(v), static_cast<std::uint64_t>(i)));
          State x = start;
          double cost = 0.0;
          int control = v;
          int j = k;
          for (;;) {
            cost += compiled.r(control).eval(x.data());
            RunningCostObserver obs{&compiled.phi(control), 0.0};
            const double t0 = horizon.stage_times[static_cast<std::size_t>(j)];
            const double t1 = horizon.stage_times[static_cast<std::size_t>(j) + 1];
            if (options.method == SimMethod::Ssa)
              ssa_segment(model, control, x, t0, t1, rng, scratch[w], obs);
            else
              tau_leap_segment(model, control, x, t0, t1, rng, scratch[w], options.eps_tau, obs);
            cost += obs.acc;
            ++j;
            if (j == K) {
              cost += compiled.terminal.eval(x.data());
              break;
            }
            const std::ptrdiff_t idx = sets->stages[static_cast<std::size_t>(j)].index_of(x);
            if (idx >= 0) {
              // stopping time: the value table is only ever read at a
              // stage whose set contains the state
              cost += sol.values[static_cast<std::size_t>(j)][static_cast<std::size_t>(idx)];
              break;
            }
            control = excursion_control(*sets, tables, fallback, options.eps_near, N, j, x);
          }
          sum += cost;
        }
        const double q = sum / static_cast<double>(M);
        if (v == 0 || q < best_q) {
          best_q = q;
          best_v = static_cast<std::int32_t>(v);
        }
      }
      sol.values[static_cast<std::size_t>(k)][s] = best_q;
      tables[static_cast<std::size_t>(k)][s] = best_v;
    });
  }

  sol.policy.sets = std::move(sets);
  sol.policy.stage_controls = std::move(tables);
  sol.policy.fallback = fallback;
  sol.policy.eps_near = options.eps_near;
  sol.policy.scaling = model.scaling();
  return sol;
}

HybridEvaluation evaluate_hybrid(const JumpModel& model, const HybridPolicy& policy,
                                 const StagedHorizon& horizon, const CostSpec& spec,
                                 const std::vector<double>& z0, int num_paths, std::uint64_t seed,
                                 SimMethod method, double eps_tau, int workers) {
  const McEstimate est = mc_cost_estimate(model, Policy{policy}, spec, horizon, z0, num_paths,
                                          seed, method, eps_tau, workers);
  HybridEvaluation out;
  out.cost_mean = est.mean;
  out.cost_stderr = est.stderr_;
  out.decisions = static_cast<std::uint64_t>(horizon.num_stages()) *
                  static_cast<std::uint64_t>(num_paths);
  out.r_openloop = static_cast<double>(est.tag_counts[static_cast<std::size_t>(LookupTag::OpenLoop)]) /
                   static_cast<double>(out.decisions);
  out.r_near = static_cast<double>(est.tag_counts[static_cast<std::size_t>(LookupTag::Near)]) /
               static_cast<double>(out.decisions);
  return out;
}

}  // namespace jumpctrl
