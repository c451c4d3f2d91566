#pragma once

#include <cstdint>
#include <vector>

#include "jumpctrl/cost_ops.hpp"
#include "jumpctrl/policy.hpp"
#include "jumpctrl/trunc_space.hpp"

namespace jumpctrl {

// Per-stage value and argmin-control tables on a truncated hypercube.
// Stage K holds the terminal cost; argmin tables exist for stages < K.
struct ValueTable {
  TruncatedSpace space;
  std::vector<std::vector<double>> values;          // [stage 0..K][rank]
  std::vector<std::vector<double>> value_stderr;    // [stage 0..K-1][rank], at the argmin
  std::vector<std::vector<std::int32_t>> argmin;    // [stage 0..K-1][rank]
};

struct FeedbackSolveOptions {
  int num_paths = 100;  // M per (state, control) backup
  std::uint64_t seed = 0;
  SimMethod method = SimMethod::Ssa;
  double eps_tau = kDefaultEpsTau;
  int workers = 0;
  std::size_t state_stage_cap = 10000000;
  std::uint64_t max_regen_factor = 100;  // regeneration cap = factor * M
  double capped_ratio_limit = 0.10;      // hard error above this fraction
};

struct FeedbackSolution {
  ValueTable table;
  FeedbackPolicy policy;
  std::uint64_t capped_backups = 0;  // (state, control) estimates that hit the cap
  std::uint64_t total_backups = 0;
  std::uint64_t regenerated_paths = 0;
};

// Backward Monte-Carlo dynamic programming on the truncated space.
// Per-stage expectations average M trajectories per (state, control);
// trajectories whose endpoint leaves the space are regenerated, up to
// max_regen_factor * M attempts, after which the nearest in-space
// state's value substitutes for the endpoint value.
FeedbackSolution solve_feedback_dp(const JumpModel& model, const StagedHorizon& horizon,
                                   const CostSpec& spec, const TruncatedSpace& space,
                                   const FeedbackSolveOptions& options);

// One (state, stage) backup against a completed stage-(k+1) value slice;
// the inner computation of solve_feedback_dp, exposed for testing.
struct BackupResult {
  double value = 0.0;
  int argmin_control = 0;
  double stderr_ = 0.0;
  std::vector<double> q_values;
  bool capped = false;
  std::uint64_t regenerations = 0;
};

BackupResult bellman_backup(const JumpModel& model, const CostSpec& spec,
                            const TruncatedSpace& space, const std::vector<double>& values_next,
                            const State& x, int stage, double t0, double t1,
                            const FeedbackSolveOptions& options);

struct DiscountedSolveOptions {
  int num_paths = 100;
  std::uint64_t seed = 0;
  SimMethod method = SimMethod::Ssa;
  double eps_tau = kDefaultEpsTau;
  int workers = 0;
  double tol = 1e-6;
  int max_sweeps = 0;  // 0 = derived from the discounted-cost bound
  std::size_t state_cap = 10000000;
  std::uint64_t max_regen_factor = 100;
  double capped_ratio_limit = 0.10;
};

struct DiscountedSolution {
  TruncatedSpace space;
  std::vector<double> values;
  std::vector<std::int32_t> policy;   // stationary map state -> control
  std::vector<double> value_stderr;   // backup stderr at the argmin control
  std::vector<double> sweep_changes;  // sup-norm change per sweep
  int sweeps = 0;
  std::uint64_t capped_backups = 0;
};

// Discounted infinite-horizon value iteration with frozen Monte-Carlo
// noise: each (state, control) draws its M transition samples once, so
// every sweep applies the same deterministic empirical Bellman operator
// (an exact sup-norm contraction with factor e^{-beta h}).
DiscountedSolution solve_discounted_vi(const JumpModel& model, const CostSpec& spec,
                                       double stage_width, const TruncatedSpace& space,
                                       const DiscountedSolveOptions& options);

// ---- uniformization (exact CTMC transient analysis on a box) --------------

// Generator restricted to the box with all exit rates redirected to one
// absorbing sink, randomized against the dominating rate. Used as an
// independent verification oracle for the Monte-Carlo estimators.
class UniformizedChain {
 public:
  UniformizedChain(const JumpModel& model, int control, const TruncatedSpace& box,
                   std::size_t state_cap = 50000);

  struct Transient {
    std::vector<double> probs;  // over box ranks
    double sink = 0.0;
  };

  // distribution at time t from an initial distribution over box ranks
  Transient transient(double t, const std::vector<double>& initial) const;

  // E[integral_0^t phi(z(s)) ds]; the sink contributes nothing
  double expected_running_cost(double t, const std::vector<double>& initial,
                               const CostFunction& phi) const;

  // endpoint distribution and endpoint-resolved expected running cost
  // from one start state: cost_by_end[y] = E[ int_0^t phi ; z(t) = y ]
  struct Conditional {
    std::vector<double> end_prob;
    std::vector<double> cost_by_end;
    double sink_prob = 0.0;
    double sink_cost = 0.0;
  };
  Conditional conditional(std::size_t start_rank, double t, const CostFunction& phi) const;

  double uniformization_rate() const { return rate_; }
  const TruncatedSpace& box() const { return box_; }

 private:
  struct Entry {
    std::uint32_t target;
    double prob;
  };
  void apply(const std::vector<double>& in, std::vector<double>& out, double& sink) const;

  TruncatedSpace box_;
  double scaling_ = 1.0;
  double rate_ = 0.0;
  std::vector<std::vector<Entry>> rows_;   // off-diagonal, excluding sink
  std::vector<double> self_prob_;
  std::vector<double> sink_prob_;
};

// Exact finite-horizon DP oracle: uniformization on `enclosing`,
// endpoint-conditioned on membership in `cut` exactly as the Monte-Carlo
// solver's rejection rule. Requires uniform stage widths.
ValueTable exact_feedback_dp(const JumpModel& model, const StagedHorizon& horizon,
                             const CostSpec& spec, const TruncatedSpace& cut,
                             const TruncatedSpace& enclosing);

// Exact discounted value iteration with the same conditioning.
struct ExactDiscounted {
  std::vector<double> values;
  std::vector<std::int32_t> policy;
};
ExactDiscounted exact_discounted_vi(const JumpModel& model, const CostSpec& spec,
                                    double stage_width, const TruncatedSpace& cut,
                                    const TruncatedSpace& enclosing, double tol = 1e-12);

// Exact open-loop cost on the enclosing box; sink_mass reports the
// truncation leak (should be negligible for a well-chosen box).
struct ExactCost {
  double cost = 0.0;
  double sink_mass = 0.0;
};
ExactCost exact_open_loop_cost(const JumpModel& model, const StagedHorizon& horizon,
                               const CostSpec& spec, const std::vector<int>& policy,
                               const std::vector<double>& z0, const TruncatedSpace& enclosing);

}  // namespace jumpctrl
