#include "jumpctrl/openloop.hpp"

#include <algorithm>
#include <cmath>

#include "jumpctrl/parallel.hpp"

namespace jumpctrl {

std::vector<std::vector<int>> enumerate_policies(int control_count, int num_stages,
                                                 std::size_t cap) {
  if (control_count < 1 || num_stages < 1)
    throw ConfigError("enumeration needs control_count >= 1 and K >= 1");
  double total_d = 1.0;
  for (int j = 0; j < num_stages; ++j) total_d *= static_cast<double>(control_count);
  if (total_d > static_cast<double>(cap))
    throw ResourceCapError("open-loop enumeration would produce " + std::to_string(total_d) +
                           " policies (cap " + std::to_string(cap) +
                           "); use sampling or reduce |A|^K");
  const std::size_t total = static_cast<std::size_t>(total_d);
  std::vector<std::vector<int>> out;
  out.reserve(total);
  std::vector<int> cur(static_cast<std::size_t>(num_stages), 0);
  for (std::size_t i = 0; i < total; ++i) {
    out.push_back(cur);
    for (int j = num_stages - 1; j >= 0; --j) {
      if (++cur[static_cast<std::size_t>(j)] < control_count) break;
      cur[static_cast<std::size_t>(j)] = 0;
    }
  }
  return out;
}

std::string rank_method_name(RankMethod m) {
  switch (m) {
    case RankMethod::McSsa: return "mc-ssa";
    case RankMethod::McTauLeap: return "mc-tau";
    case RankMethod::Ode: return "ode";
  }
  return "?";
}

PolicyRanking rank_policies(const JumpModel& model, const StagedHorizon& horizon,
                            const CostSpec& spec, const std::vector<double>& z0, int num_paths,
                            std::uint64_t seed, RankMethod method, double eps_tau, int workers,
                            double ode_dt, std::size_t cap, bool common_random_numbers) {
  const auto policies = enumerate_policies(model.num_controls(), horizon.num_stages(), cap);
  PolicyRanking ranking;
  ranking.method = method;
  ranking.num_paths = method == RankMethod::Ode ? 0 : num_paths;
  ranking.entries.resize(policies.size());

  if (method == RankMethod::Ode) {
    parallel_for(policies.size(), workers, [&](std::size_t p, std::size_t) {
      const OdePath path = integrate_piecewise(model, policies[p], z0, horizon, ode_dt);
      ranking.entries[p] = {policies[p], ode_cost(path, model, spec, horizon), 0.0};
    });
  } else {
    if (num_paths < 2) throw ConfigError("ranking needs at least two paths per policy");
    const SimMethod sim = method == RankMethod::McSsa ? SimMethod::Ssa : SimMethod::TauLeap;
    const State x0 = state_from_density(model, z0);
    const CompiledSpec compiled(spec, model);
    const std::size_t M = static_cast<std::size_t>(num_paths);
    std::vector<double> costs(policies.size() * M);
    const int nw = resolve_workers(workers);
    std::vector<SimScratch> scratch(static_cast<std::size_t>(nw));
    const std::vector<double> tau_g = tau_order_factors(model);
    for (auto& ws : scratch) ws.tau_g = tau_g;
    parallel_for(policies.size() * M, nw, [&](std::size_t task, std::size_t w) {
      const std::size_t p = task / M;
      const std::size_t i = task % M;
      RngStream rng(seed, stream_index(phase::kRank, common_random_numbers ? 0 : p, i));
      const Policy policy = OpenLoopPolicy{policies[p]};
      costs[task] =
          run_policy_path(model, policy, horizon, compiled, x0, sim, eps_tau, rng, scratch[w]).cost;
    });
    for (std::size_t p = 0; p < policies.size(); ++p) {
      double sum = 0.0;
      for (std::size_t i = 0; i < M; ++i) sum += costs[p * M + i];
      const double mean = sum / static_cast<double>(M);
      double ss = 0.0;
      for (std::size_t i = 0; i < M; ++i) {
        const double d = costs[p * M + i] - mean;
        ss += d * d;
      }
      ranking.entries[p] = {policies[p], mean,
                            std::sqrt(ss / (static_cast<double>(M) - 1.0) / static_cast<double>(M))};
    }
  }
  std::stable_sort(ranking.entries.begin(), ranking.entries.end(),
                   [](const RankedPolicy& a, const RankedPolicy& b) {
                     if (a.cost != b.cost) return a.cost < b.cost;
                     return a.policy < b.policy;
                   });
  return ranking;
}

std::vector<RankedPolicy> good_policies(const PolicyRanking& ranking, int n_ol, double eps_ol) {
  if (ranking.entries.empty()) throw ConfigError("empty ranking");
  if (n_ol < 1 || eps_ol < 0.0) throw ConfigError("good_policies needs n_ol >= 1 and eps_ol >= 0");
  const double best = ranking.entries.front().cost;
  std::vector<RankedPolicy> out;
  for (std::size_t k = 0; k < ranking.entries.size() && k < static_cast<std::size_t>(n_ol); ++k) {
    if (ranking.entries[k].cost <= (1.0 + eps_ol) * best)
      out.push_back(ranking.entries[k]);
  }
  return out;
}

StageStatistics stage_statistics(const JumpModel& model, const std::vector<RankedPolicy>& good,
                                 const StagedHorizon& horizon, const std::vector<double>& z0,
                                 int num_paths, std::uint64_t seed, SimMethod method,
                                 double eps_tau, int workers) {
  if (num_paths < 2) throw ConfigError("stage statistics need at least two paths");
  const State x0 = state_from_density(model, z0);
  const int K = horizon.num_stages();
  const int n = model.num_species();
  const std::size_t M = static_cast<std::size_t>(num_paths);
  StageStatistics stats;
  const int nw = resolve_workers(workers);
  std::vector<SimScratch> scratch(static_cast<std::size_t>(nw));
  const std::vector<double> tau_g = tau_order_factors(model);
  for (auto& ws : scratch) ws.tau_g = tau_g;
  const CompiledSpec no_cost(zero_cost_spec(), model);
  for (std::size_t g = 0; g < good.size(); ++g) {
    std::vector<double> samples(M * static_cast<std::size_t>(K * n));
    const Policy policy = OpenLoopPolicy{good[g].policy};
    parallel_for(M, nw, [&](std::size_t i, std::size_t w) {
      RngStream rng(seed, stream_index(phase::kStats, g, i));
      double* slot = samples.data() + i * static_cast<std::size_t>(K * n);
      run_policy_path(model, policy, horizon, no_cost, x0, method, eps_tau, rng, scratch[w],
                      [&](int j, const State& x) {
                        if (j >= K) return;
                        for (int s = 0; s < n; ++s)
                          slot[j * n + s] = static_cast<double>(x[static_cast<std::size_t>(s)]) /
                                            static_cast<double>(model.scaling());
                      });
    });
    StageStatistics::PerPolicy pp;
    pp.policy = good[g].policy;
    pp.mean.assign(static_cast<std::size_t>(K), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    pp.stddev = pp.mean;
    for (int j = 0; j < K; ++j) {
      for (int s = 0; s < n; ++s) {
        double sum = 0.0;
        for (std::size_t i = 0; i < M; ++i) sum += samples[i * static_cast<std::size_t>(K * n) + static_cast<std::size_t>(j * n + s)];
        const double mean = sum / static_cast<double>(M);
        double ss = 0.0;
        for (std::size_t i = 0; i < M; ++i) {
          const double d = samples[i * static_cast<std::size_t>(K * n) + static_cast<std::size_t>(j * n + s)] - mean;
          ss += d * d;
        }
        pp.mean[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)] = mean;
        pp.stddev[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)] =
            std::sqrt(ss / (static_cast<double>(M) - 1.0));
      }
    }
    stats.policies.push_back(std::move(pp));
  }
  return stats;
}

}  // namespace jumpctrl
