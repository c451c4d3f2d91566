#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jumpctrl/cost_ops.hpp"
#include "jumpctrl/odelimit.hpp"

namespace jumpctrl {

inline constexpr std::size_t kDefaultEnumerationCap = 1000000;

// All |A|^K control-index tuples in lexicographic order.
std::vector<std::vector<int>> enumerate_policies(int control_count, int num_stages,
                                                 std::size_t cap = kDefaultEnumerationCap);

enum class RankMethod { McSsa, McTauLeap, Ode };

std::string rank_method_name(RankMethod m);

struct RankedPolicy {
  std::vector<int> policy;
  double cost = 0.0;
  double stderr_ = 0.0;
};

struct PolicyRanking {
  std::vector<RankedPolicy> entries;  // non-decreasing cost; ties by policy order
  RankMethod method = RankMethod::McSsa;
  int num_paths = 0;

  const RankedPolicy& best() const { return entries.front(); }
};

// Evaluates every open-loop policy with the same number of paths (or the
// deterministic ODE cost) and sorts by cost, ties broken by lexicographic
// policy order. Per-policy stream assignment keys on the enumeration
// index, so rankings are reproducible and evaluation-order independent.
// common_random_numbers shares the per-path streams across policies
// (variance reduction for cost differences); off by default so stderrs
// stay independent.
PolicyRanking rank_policies(const JumpModel& model, const StagedHorizon& horizon,
                            const CostSpec& spec, const std::vector<double>& z0, int num_paths,
                            std::uint64_t seed, RankMethod method,
                            double eps_tau = kDefaultEpsTau, int workers = 0,
                            double ode_dt = 1e-3, std::size_t cap = kDefaultEnumerationCap,
                            bool common_random_numbers = false);

// "Good" policies: ranking index < n_ol and cost within (1 + eps_ol) of
// the best; the result is a prefix of the ranking.
std::vector<RankedPolicy> good_policies(const PolicyRanking& ranking, int n_ol, double eps_ol);

// Per-stage empirical density statistics for each good policy.
struct StageStatistics {
  struct PerPolicy {
    std::vector<int> policy;
    std::vector<std::vector<double>> mean;  // [stage][species], stages 0..K-1
    std::vector<std::vector<double>> stddev;
  };
  std::vector<PerPolicy> policies;
};

StageStatistics stage_statistics(const JumpModel& model,
                                 const std::vector<RankedPolicy>& good,
                                 const StagedHorizon& horizon, const std::vector<double>& z0,
                                 int num_paths, std::uint64_t seed,
                                 SimMethod method = SimMethod::Ssa,
                                 double eps_tau = kDefaultEpsTau, int workers = 0);

}  // namespace jumpctrl
