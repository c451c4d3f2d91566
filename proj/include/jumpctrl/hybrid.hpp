#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "jumpctrl/feedback.hpp"
#include "jumpctrl/openloop.hpp"
#include "jumpctrl/stage_sets.hpp"

namespace jumpctrl {

// Builds the adaptive per-stage sets: M_ol fresh trajectories per good
// policy; the state observed at stage j enters S_j iff its density lies
// within zeta standard deviations of that policy's stage mean,
// componentwise. Sets are merged across policies and deduplicated. S_0 is
// the start-state singleton.
StageStateSets build_stage_sets(const JumpModel& model, const std::vector<RankedPolicy>& good,
                                const StageStatistics& stats, const StagedHorizon& horizon,
                                const std::vector<double>& z0, int num_paths, double zeta,
                                std::uint64_t seed, SimMethod method = SimMethod::Ssa,
                                double eps_tau = kDefaultEpsTau, int workers = 0);

struct HybridSolveOptions {
  int num_paths = 100;  // M per (state, control) backup
  double eps_near = 0.0;
  std::uint64_t seed = 0;
  SimMethod method = SimMethod::Ssa;
  double eps_tau = kDefaultEpsTau;
  int workers = 0;
};

struct HybridSolution {
  HybridPolicy policy;
  // per stage j: value estimates over S_j (the modified Bellman values)
  std::vector<std::vector<double>> values;
};

// Backward iteration with stopping times: from a state in S_k the first
// stage is simulated under the candidate control and afterwards under the
// already-computed hybrid lookups, stopping at the first stage whose set
// contains the state (or at K, where the terminal cost applies). Costs
// accumulate along the excursion.
HybridSolution solve_hybrid_dp(const JumpModel& model, const StagedHorizon& horizon,
                               const CostSpec& spec, std::shared_ptr<const StageStateSets> sets,
                               const OpenLoopPolicy& fallback, const HybridSolveOptions& options);

struct HybridEvaluation {
  double cost_mean = 0.0;
  double cost_stderr = 0.0;
  double r_openloop = 0.0;  // fraction of stage decisions resolved open-loop
  double r_near = 0.0;      // fraction resolved by a nearest neighbor
  std::uint64_t decisions = 0;
};

HybridEvaluation evaluate_hybrid(const JumpModel& model, const HybridPolicy& policy,
                                 const StagedHorizon& horizon, const CostSpec& spec,
                                 const std::vector<double>& z0, int num_paths, std::uint64_t seed,
                                 SimMethod method = SimMethod::Ssa,
                                 double eps_tau = kDefaultEpsTau, int workers = 0);

}  // namespace jumpctrl
