#include "jumpctrl/feedback.hpp"

#include <algorithm>
#include <cmath>

#include "jumpctrl/parallel.hpp"

namespace jumpctrl {

namespace {

// one conditioned sample: simulate [t0,t1) under `control`, regenerating
// while the endpoint leaves the space (bounded by the caller's budget)
struct BackupSample {
  double running_cost = 0.0;
  std::size_t end_rank = 0;
  std::uint64_t regenerations = 0;
  bool capped = false;
};

BackupSample sample_conditioned(const JumpModel& model, const CompiledSpec& spec,
                                const TruncatedSpace& space, const State& x0, int control,
                                double t0, double t1, SimMethod method, double eps_tau,
                                RngStream& rng, SimScratch& ws, std::uint64_t regen_budget) {
  BackupSample out;
  for (;;) {
    State x = x0;
    RunningCostObserver cost_obs{&spec.phi(control), 0.0};
    if (method == SimMethod::Ssa)
      ssa_segment(model, control, x, t0, t1, rng, ws, cost_obs);
    else
      tau_leap_segment(model, control, x, t0, t1, rng, ws, eps_tau, cost_obs);
    if (space.contains(x)) {
      out.running_cost = cost_obs.acc;
      out.end_rank = space.rank(x);
      return out;
    }
    if (out.regenerations >= regen_budget) {
      // out of budget: accept the path, substituting the nearest
      // in-space state's value for the endpoint
      out.running_cost = cost_obs.acc;
      out.end_rank = space.rank(space.clamp(x));
      out.capped = true;
      return out;
    }
    ++out.regenerations;
  }
}

}  // namespace

BackupResult bellman_backup(const JumpModel& model, const CostSpec& spec,
                            const TruncatedSpace& space, const std::vector<double>& values_next,
                            const State& x, int stage, double t0, double t1,
                            const FeedbackSolveOptions& options) {
  const int A = model.num_controls();
  const int M = options.num_paths;
  const double N = static_cast<double>(model.scaling());
  const std::uint64_t budget =
      options.max_regen_factor * static_cast<std::uint64_t>(M);
  const std::size_t rank = space.rank(x);
  BackupResult out;
  out.q_values.resize(static_cast<std::size_t>(A));
  std::vector<double> q_stderr(static_cast<std::size_t>(A));
  SimScratch ws;
  ws.tau_g = tau_order_factors(model);
  const CompiledSpec compiled(spec, model);
  for (int v = 0; v < A; ++v) {
    std::uint64_t used = 0;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int i = 0; i < M; ++i) {
      RngStream rng(options.seed, stream_index(phase::kFeedbackDp, static_cast<std::uint64_t>(stage),
                                               rank, static_cast<std::uint64_t>(v),
                                               static_cast<std::uint64_t>(i)));
      BackupSample s = sample_conditioned(model, compiled, space, x, v, t0, t1, options.method,
                                          options.eps_tau, rng, ws, budget - std::min(budget, used));
      used += s.regenerations;
      out.regenerations += s.regenerations;
      if (s.capped) out.capped = true;
      const double val = s.running_cost + values_next[s.end_rank];
      sum += val;
      sum2 += val * val;
    }
    const double mean = sum / static_cast<double>(M);
    out.q_values[static_cast<std::size_t>(v)] = spec.r(v).eval_state(x, N) + mean;
    const double var = std::max(0.0, (sum2 - sum * mean) / std::max(1.0, static_cast<double>(M - 1)));
    q_stderr[static_cast<std::size_t>(v)] = std::sqrt(var / static_cast<double>(M));
  }
  out.argmin_control = 0;
  for (int v = 1; v < A; ++v)
    if (out.q_values[static_cast<std::size_t>(v)] < out.q_values[static_cast<std::size_t>(out.argmin_control)])
      out.argmin_control = v;  // ties keep the lowest control index
  out.value = out.q_values[static_cast<std::size_t>(out.argmin_control)];
  out.stderr_ = q_stderr[static_cast<std::size_t>(out.argmin_control)];
  return out;
}

FeedbackSolution solve_feedback_dp(const JumpModel& model, const StagedHorizon& horizon,
                                   const CostSpec& spec, const TruncatedSpace& space,
                                   const FeedbackSolveOptions& options) {
  space.validate();
  const std::size_t S = space.size();
  const int K = horizon.num_stages();
  if (S * static_cast<std::size_t>(K + 1) > options.state_stage_cap)
    throw ResourceCapError("feedback DP: " + std::to_string(S) + " states x " +
                           std::to_string(K + 1) + " stages exceeds the cap");
  const double N = static_cast<double>(model.scaling());

  FeedbackSolution sol;
  sol.table.space = space;
  sol.table.values.assign(static_cast<std::size_t>(K + 1), std::vector<double>(S, 0.0));
  sol.table.value_stderr.assign(static_cast<std::size_t>(K), std::vector<double>(S, 0.0));
  sol.table.argmin.assign(static_cast<std::size_t>(K), std::vector<std::int32_t>(S, 0));

  for (std::size_t s = 0; s < S; ++s)
    sol.table.values[static_cast<std::size_t>(K)][s] = spec.psi().eval_state(space.state(s), N);

  std::vector<std::uint64_t> capped(S), regens(S);
  for (int k = K - 1; k >= 0; --k) {
    const double t0 = horizon.stage_times[static_cast<std::size_t>(k)];
    const double t1 = horizon.stage_times[static_cast<std::size_t>(k) + 1];
    const std::vector<double>& next = sol.table.values[static_cast<std::size_t>(k) + 1];
    std::fill(capped.begin(), capped.end(), 0);
    std::fill(regens.begin(), regens.end(), 0);
    parallel_for(S, options.workers, [&](std::size_t s, std::size_t) {
      const BackupResult res =
          bellman_backup(model, spec, space, next, space.state(s), k, t0, t1, options);
      sol.table.values[static_cast<std::size_t>(k)][s] = res.value;
      sol.table.value_stderr[static_cast<std::size_t>(k)][s] = res.stderr_;
      sol.table.argmin[static_cast<std::size_t>(k)][s] = static_cast<std::int32_t>(res.argmin_control);
      capped[s] = res.capped ? 1 : 0;
      regens[s] = res.regenerations;
    });
    for (std::size_t s = 0; s < S; ++s) {
      sol.capped_backups += capped[s];
      sol.regenerated_paths += regens[s];
      sol.total_backups += static_cast<std::uint64_t>(model.num_controls());
    }
  }
  if (sol.total_backups > 0 &&
      static_cast<double>(sol.capped_backups) >
          options.capped_ratio_limit * static_cast<double>(sol.total_backups))
    throw ResourceCapError("feedback DP: " + std::to_string(sol.capped_backups) + " of " +
                           std::to_string(sol.total_backups) +
                           " backups exhausted the regeneration budget; enlarge the truncated space");

  sol.policy.space = space;
  sol.policy.stage_controls = sol.table.argmin;
  return sol;
}

DiscountedSolution solve_discounted_vi(const JumpModel& model, const CostSpec& spec,
                                       double stage_width, const TruncatedSpace& space,
                                       const DiscountedSolveOptions& options) {
  if (spec.discount <= 0.0)
    throw ConfigError("discounted value iteration requires beta > 0");
  space.validate();
  const std::size_t S = space.size();
  if (S > options.state_cap) throw ResourceCapError("discounted VI: state space exceeds the cap");
  const int A = model.num_controls();
  const int M = options.num_paths;
  const double N = static_cast<double>(model.scaling());
  const double lambda = std::exp(-spec.discount * stage_width);

  // frozen sample noise: one transition sample set per (state, control, path),
  // simulated once and reused by every sweep
  const std::size_t total = S * static_cast<std::size_t>(A);
  std::vector<double> base_cost(total, 0.0);  // r + mean running cost
  std::vector<std::uint32_t> end_ranks(total * static_cast<std::size_t>(M));
  std::vector<double> run_costs(total * static_cast<std::size_t>(M));
  std::vector<std::uint8_t> capped(total, 0);
  const std::uint64_t budget = options.max_regen_factor * static_cast<std::uint64_t>(M);
  const int nw = resolve_workers(options.workers);
  std::vector<SimScratch> scratch(static_cast<std::size_t>(nw));
  const std::vector<double> tau_g = tau_order_factors(model);
  for (auto& ws : scratch) ws.tau_g = tau_g;
  const CompiledSpec compiled(spec, model);
  parallel_for(total, nw, [&](std::size_t task, std::size_t w) {
    const std::size_t s = task / static_cast<std::size_t>(A);
    const int v = static_cast<int>(task % static_cast<std::size_t>(A));
    const State x = space.state(s);
    std::uint64_t used = 0;
    for (int i = 0; i < M; ++i) {
      RngStream rng(options.seed, stream_index(phase::kDiscounted, s, static_cast<std::uint64_t>(v),
                                               static_cast<std::uint64_t>(i)));
      BackupSample smp =
          sample_conditioned(model, compiled, space, x, v, 0.0, stage_width, options.method,
                             options.eps_tau, rng, scratch[w], budget - std::min(budget, used));
      used += smp.regenerations;
      if (smp.capped) capped[task] = 1;
      end_ranks[task * static_cast<std::size_t>(M) + static_cast<std::size_t>(i)] =
          static_cast<std::uint32_t>(smp.end_rank);
      run_costs[task * static_cast<std::size_t>(M) + static_cast<std::size_t>(i)] = smp.running_cost;
    }
    base_cost[task] = spec.r(v).eval_state(x, N);
  });

  DiscountedSolution sol;
  sol.space = space;
  for (std::uint8_t c : capped) sol.capped_backups += c;
  if (static_cast<double>(sol.capped_backups) >
      options.capped_ratio_limit * static_cast<double>(total))
    throw ResourceCapError("discounted VI: too many backups exhausted the regeneration budget");

  double m_r = 0.0, m_phi = 0.0;
  for (int v = 0; v < A; ++v) {
    m_r = std::max(m_r, spec.r(v).bound_on(model.domain()));
    m_phi = std::max(m_phi, spec.phi(v).bound_on(model.domain()));
  }
  const double m_j = (m_r + m_phi * stage_width) / (1.0 - lambda);
  int max_sweeps = options.max_sweeps;
  if (max_sweeps <= 0) {
    max_sweeps = 50;
    if (m_j > 0.0 && options.tol < 2.0 * m_j)
      max_sweeps += static_cast<int>(std::ceil(std::log(options.tol * (1.0 - lambda) / (2.0 * m_j)) /
                                               std::log(lambda)));
  }

  std::vector<double> U(S, 0.0);
  std::vector<double> Unew(S, 0.0);
  std::vector<std::int32_t> pol(S, 0);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    parallel_for(S, options.workers, [&](std::size_t s, std::size_t) {
      double best = 0.0;
      std::int32_t best_v = 0;
      for (int v = 0; v < A; ++v) {
        const std::size_t task = s * static_cast<std::size_t>(A) + static_cast<std::size_t>(v);
        double acc = 0.0;
        const std::size_t off = task * static_cast<std::size_t>(M);
        for (int i = 0; i < M; ++i)
          acc += run_costs[off + static_cast<std::size_t>(i)] +
                 lambda * U[end_ranks[off + static_cast<std::size_t>(i)]];
        const double q = base_cost[task] + acc / static_cast<double>(M);
        if (v == 0 || q < best) {
          best = q;
          best_v = static_cast<std::int32_t>(v);
        }
      }
      Unew[s] = best;
      pol[s] = best_v;
    });
    double change = 0.0;
    for (std::size_t s = 0; s < S; ++s) change = std::max(change, std::abs(Unew[s] - U[s]));
    U.swap(Unew);
    sol.sweep_changes.push_back(change);
    sol.sweeps = sweep + 1;
    if (change < options.tol) {
      sol.values = U;
      sol.policy = pol;
      sol.value_stderr.assign(S, 0.0);
      for (std::size_t s = 0; s < S; ++s) {
        const std::size_t task =
            s * static_cast<std::size_t>(A) + static_cast<std::size_t>(pol[s]);
        const std::size_t off = task * static_cast<std::size_t>(M);
        double sum = 0.0, sum2 = 0.0;
        for (int i = 0; i < M; ++i) {
          const double v = run_costs[off + static_cast<std::size_t>(i)] +
                           lambda * U[end_ranks[off + static_cast<std::size_t>(i)]];
          sum += v;
          sum2 += v * v;
        }
        const double mean = sum / static_cast<double>(M);
        const double var =
            std::max(0.0, (sum2 - sum * mean) / std::max(1.0, static_cast<double>(M - 1)));
        sol.value_stderr[s] = std::sqrt(var / static_cast<double>(M));
      }
      return sol;
    }
  }
  throw NumericalError("discounted value iteration did not converge in " +
                       std::to_string(max_sweeps) + " sweeps");
}

// ---- uniformization --------------------------------------------------------

UniformizedChain::UniformizedChain(const JumpModel& model, int control,
                                   const TruncatedSpace& box, std::size_t state_cap)
    : box_(box), scaling_(static_cast<double>(model.scaling())) {
  box_.validate(state_cap);
  const std::size_t S = box_.size();
  std::vector<std::vector<std::pair<std::uint32_t, double>>> raw(S);
  std::vector<double> out_rate(S, 0.0);
  std::vector<double> exit_rate(S, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    const State x = box_.state(s);
    for (const JumpRateEntry& e : jump_rate_table(model, control, x)) {
      State y = x;
      for (std::size_t i = 0; i < y.size(); ++i) y[i] += e.jump[i];
      out_rate[s] += e.rate;
      if (box_.contains(y))
        raw[s].emplace_back(static_cast<std::uint32_t>(box_.rank(y)), e.rate);
      else
        exit_rate[s] += e.rate;
    }
  }
  for (std::size_t s = 0; s < S; ++s) rate_ = std::max(rate_, out_rate[s]);
  rows_.resize(S);
  self_prob_.assign(S, 1.0);
  sink_prob_.assign(S, 0.0);
  if (rate_ <= 0.0) return;
  for (std::size_t s = 0; s < S; ++s) {
    self_prob_[s] = 1.0 - out_rate[s] / rate_;
    sink_prob_[s] = exit_rate[s] / rate_;
    rows_[s].reserve(raw[s].size());
    for (const auto& [target, rate] : raw[s]) rows_[s].push_back({target, rate / rate_});
  }
}

void UniformizedChain::apply(const std::vector<double>& in, std::vector<double>& out,
                             double& sink) const {
  const std::size_t S = in.size();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    const double p = in[s];
    if (p == 0.0) continue;
    out[s] += p * self_prob_[s];
    for (const Entry& e : rows_[s]) out[e.target] += p * e.prob;
    sink += p * sink_prob_[s];
  }
}

namespace {

// Poisson(rate*t) weights from the mode outward, normalized; tiny tails
// dropped below 1e-16 of the mode
struct PoissonWeights {
  std::size_t k_min = 0;
  std::vector<double> w;

  double at(std::size_t k) const {
    if (k < k_min || k >= k_min + w.size()) return 0.0;
    return w[k - k_min];
  }
  std::size_t k_max() const { return k_min + w.size() - 1; }
};

PoissonWeights poisson_weights(double mean) {
  PoissonWeights pw;
  if (mean <= 0.0) {
    pw.w = {1.0};
    return pw;
  }
  const std::size_t mode = static_cast<std::size_t>(mean);
  std::vector<double> down;
  double v = 1.0;
  for (std::size_t k = mode; k > 0; --k) {
    v *= static_cast<double>(k) / mean;
    if (v < 1e-18) break;
    down.push_back(v);
  }
  pw.k_min = mode - down.size();
  pw.w.assign(down.rbegin(), down.rend());
  pw.w.push_back(1.0);
  v = 1.0;
  for (std::size_t k = mode + 1;; ++k) {
    v *= mean / static_cast<double>(k);
    if (v < 1e-18 && k > mode + 1) break;
    pw.w.push_back(v);
  }
  double total = 0.0;
  for (double x : pw.w) total += x;
  for (double& x : pw.w) x /= total;
  return pw;
}

}  // namespace

UniformizedChain::Transient UniformizedChain::transient(double t,
                                                        const std::vector<double>& initial) const {
  const std::size_t S = box_.size();
  if (initial.size() != S) throw ConfigError("transient: initial distribution size mismatch");
  Transient out;
  out.probs.assign(S, 0.0);
  if (rate_ <= 0.0 || t <= 0.0) {
    out.probs = initial;
    return out;
  }
  const PoissonWeights pw = poisson_weights(rate_ * t);
  std::vector<double> cur = initial;
  std::vector<double> next(S);
  double sink = 0.0;
  for (std::size_t k = 0; k <= pw.k_max(); ++k) {
    const double w = pw.at(k);
    if (w > 0.0) {
      for (std::size_t s = 0; s < S; ++s) out.probs[s] += w * cur[s];
      out.sink += w * sink;
    }
    if (k == pw.k_max()) break;
    apply(cur, next, sink);
    cur.swap(next);
  }
  return out;
}

double UniformizedChain::expected_running_cost(double t, const std::vector<double>& initial,
                                               const CostFunction& phi) const {
  const std::size_t S = box_.size();
  if (initial.size() != S) throw ConfigError("running cost: initial distribution size mismatch");
  std::vector<double> phi_vals(S);
  for (std::size_t s = 0; s < S; ++s) phi_vals[s] = phi.eval_state(box_.state(s), scaling_);
  if (rate_ <= 0.0 || t <= 0.0) {
    double v = 0.0;
    for (std::size_t s = 0; s < S; ++s) v += initial[s] * phi_vals[s];
    return v * std::max(0.0, t);
  }
  const PoissonWeights pw = poisson_weights(rate_ * t);
  // E int_0^t phi = (1/rate) * sum_k P(Pois(rate t) >= k+1) * (pi_k . phi)
  std::vector<double> tail(pw.k_max() + 2, 0.0);
  {
    double acc = 0.0;
    for (std::size_t k = pw.k_max() + 1; k-- > 0;) {
      acc += pw.at(k);
      tail[k] = acc;  // tail[k] = P(X >= k)
    }
  }
  std::vector<double> cur = initial;
  std::vector<double> next(S);
  double sink = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k <= pw.k_max(); ++k) {
    double dot = 0.0;
    for (std::size_t s = 0; s < S; ++s) dot += cur[s] * phi_vals[s];
    total += tail[k + 1] * dot;
    if (k == pw.k_max()) break;
    apply(cur, next, sink);
    cur.swap(next);
  }
  return total / rate_;
}

UniformizedChain::Conditional UniformizedChain::conditional(std::size_t start_rank, double t,
                                                            const CostFunction& phi) const {
  const std::size_t S = box_.size();
  Conditional out;
  out.end_prob.assign(S, 0.0);
  out.cost_by_end.assign(S, 0.0);
  std::vector<double> phi_vals(S);
  for (std::size_t s = 0; s < S; ++s) phi_vals[s] = phi.eval_state(box_.state(s), scaling_);
  if (rate_ <= 0.0 || t <= 0.0) {
    out.end_prob[start_rank] = 1.0;
    out.cost_by_end[start_rank] = phi_vals[start_rank] * std::max(0.0, t);
    return out;
  }
  const PoissonWeights pw = poisson_weights(rate_ * t);
  std::vector<double> alpha(S, 0.0);
  alpha[start_rank] = 1.0;
  std::vector<double> C(S, 0.0);
  std::vector<double> tmp(S);
  double alpha_sink = 0.0;
  double c_sink = 0.0;
  for (std::size_t k = 0;; ++k) {
    // C_k = C_{k-1} P + diag(phi) alpha_k
    apply(C, tmp, c_sink);
    for (std::size_t s = 0; s < S; ++s) tmp[s] += phi_vals[s] * alpha[s];
    C.swap(tmp);
    const double w_end = pw.at(k);
    const double w_cost = pw.at(k + 1);
    if (w_end > 0.0) {
      for (std::size_t s = 0; s < S; ++s) out.end_prob[s] += w_end * alpha[s];
      out.sink_prob += w_end * alpha_sink;
    }
    if (w_cost > 0.0) {
      for (std::size_t s = 0; s < S; ++s) out.cost_by_end[s] += w_cost / rate_ * C[s];
      out.sink_cost += w_cost / rate_ * c_sink;
    }
    if (k >= pw.k_max()) break;
    apply(alpha, tmp, alpha_sink);
    alpha.swap(tmp);
  }
  return out;
}

namespace {

std::vector<double> phi_on_densities(const JumpModel& model, const CostFunction& f,
                                     const TruncatedSpace& box) {
  const std::size_t S = box.size();
  std::vector<double> vals(S);
  const double N = static_cast<double>(model.scaling());
  for (std::size_t s = 0; s < S; ++s) vals[s] = f.eval_state(box.state(s), N);
  return vals;
}

}  // namespace

ValueTable exact_feedback_dp(const JumpModel& model, const StagedHorizon& horizon,
                             const CostSpec& spec, const TruncatedSpace& cut,
                             const TruncatedSpace& enclosing) {
  const int K = horizon.num_stages();
  const double h = horizon.stage_times[1] - horizon.stage_times[0];
  for (int j = 0; j + 1 < K; ++j)
    if (std::abs((horizon.stage_times[static_cast<std::size_t>(j) + 2] -
                  horizon.stage_times[static_cast<std::size_t>(j) + 1]) -
                 h) > 1e-12)
      throw ConfigError("exact_feedback_dp requires uniform stage widths");
  const int A = model.num_controls();
  const double N = static_cast<double>(model.scaling());
  const std::size_t Sc = cut.size();

  // cache conditioned transitions per (control, cut state)
  std::vector<UniformizedChain> chains;
  chains.reserve(static_cast<std::size_t>(A));
  for (int v = 0; v < A; ++v) chains.emplace_back(model, v, enclosing);
  std::vector<std::vector<UniformizedChain::Conditional>> cond(static_cast<std::size_t>(A));
  std::vector<std::size_t> cut_to_enc(Sc);
  for (std::size_t s = 0; s < Sc; ++s) {
    const State x = cut.state(s);
    if (!enclosing.contains(x)) throw ConfigError("cut space must lie inside the enclosing box");
    cut_to_enc[s] = enclosing.rank(x);
  }
  for (int v = 0; v < A; ++v) {
    cond[static_cast<std::size_t>(v)].resize(Sc);
    parallel_for(Sc, 0, [&](std::size_t s, std::size_t) {
      cond[static_cast<std::size_t>(v)][s] =
          chains[static_cast<std::size_t>(v)].conditional(cut_to_enc[s], h, spec.phi(v));
    });
  }

  ValueTable table;
  table.space = cut;
  table.values.assign(static_cast<std::size_t>(K + 1), std::vector<double>(Sc, 0.0));
  table.argmin.assign(static_cast<std::size_t>(K), std::vector<std::int32_t>(Sc, 0));
  for (std::size_t s = 0; s < Sc; ++s)
    table.values[static_cast<std::size_t>(K)][s] = spec.psi().eval_state(cut.state(s), N);

  for (int k = K - 1; k >= 0; --k) {
    const std::vector<double>& next = table.values[static_cast<std::size_t>(k) + 1];
    for (std::size_t s = 0; s < Sc; ++s) {
      double best = 0.0;
      std::int32_t best_v = 0;
      for (int v = 0; v < A; ++v) {
        const auto& c = cond[static_cast<std::size_t>(v)][s];
        double p_in = 0.0;
        double cost_in = 0.0;
        double u_in = 0.0;
        for (std::size_t y = 0; y < Sc; ++y) {
          const std::size_t ye = cut_to_enc[y];
          p_in += c.end_prob[ye];
          cost_in += c.cost_by_end[ye];
          u_in += c.end_prob[ye] * next[y];
        }
        if (p_in <= 0.0) continue;
        const double q = spec.r(v).eval_state(cut.state(s), N) + (cost_in + u_in) / p_in;
        if (v == 0 || q < best) {
          best = q;
          best_v = static_cast<std::int32_t>(v);
        }
      }
      table.values[static_cast<std::size_t>(k)][s] = best;
      table.argmin[static_cast<std::size_t>(k)][s] = best_v;
    }
  }
  return table;
}

ExactDiscounted exact_discounted_vi(const JumpModel& model, const CostSpec& spec,
                                    double stage_width, const TruncatedSpace& cut,
                                    const TruncatedSpace& enclosing, double tol) {
  if (spec.discount <= 0.0) throw ConfigError("exact discounted VI requires beta > 0");
  const int A = model.num_controls();
  const double N = static_cast<double>(model.scaling());
  const double lambda = std::exp(-spec.discount * stage_width);
  const std::size_t Sc = cut.size();
  std::vector<std::size_t> cut_to_enc(Sc);
  for (std::size_t s = 0; s < Sc; ++s) cut_to_enc[s] = enclosing.rank(cut.state(s));
  std::vector<std::vector<UniformizedChain::Conditional>> cond(static_cast<std::size_t>(A));
  for (int v = 0; v < A; ++v) {
    UniformizedChain chain(model, v, enclosing);
    cond[static_cast<std::size_t>(v)].resize(Sc);
    parallel_for(Sc, 0, [&](std::size_t s, std::size_t) {
      cond[static_cast<std::size_t>(v)][s] = chain.conditional(cut_to_enc[s], stage_width, spec.phi(v));
    });
  }
  ExactDiscounted out;
  out.values.assign(Sc, 0.0);
  out.policy.assign(Sc, 0);
  std::vector<double> U(Sc, 0.0);
  for (int sweep = 0; sweep < 100000; ++sweep) {
    double change = 0.0;
    for (std::size_t s = 0; s < Sc; ++s) {
      double best = 0.0;
      std::int32_t best_v = 0;
      for (int v = 0; v < A; ++v) {
        const auto& c = cond[static_cast<std::size_t>(v)][s];
        double p_in = 0.0, cost_in = 0.0, u_in = 0.0;
        for (std::size_t y = 0; y < Sc; ++y) {
          const std::size_t ye = cut_to_enc[y];
          p_in += c.end_prob[ye];
          cost_in += c.cost_by_end[ye];
          u_in += c.end_prob[ye] * U[y];
        }
        if (p_in <= 0.0) continue;
        const double q = spec.r(v).eval_state(cut.state(s), N) + (cost_in + lambda * u_in) / p_in;
        if (v == 0 || q < best) {
          best = q;
          best_v = static_cast<std::int32_t>(v);
        }
      }
      change = std::max(change, std::abs(best - U[s]));
      out.values[s] = best;
      out.policy[s] = best_v;
    }
    U = out.values;
    if (change < tol) return out;
  }
  throw NumericalError("exact discounted VI did not converge");
}

ExactCost exact_open_loop_cost(const JumpModel& model, const StagedHorizon& horizon,
                               const CostSpec& spec, const std::vector<int>& policy,
                               const std::vector<double>& z0, const TruncatedSpace& enclosing) {
  if (static_cast<int>(policy.size()) != horizon.num_stages())
    throw ConfigError("policy length mismatch");
  const std::size_t S = enclosing.size();
  const State x0 = state_from_density(model, z0);
  if (!enclosing.contains(x0)) throw ConfigError("initial state outside the enclosing box");
  std::vector<double> dist(S, 0.0);
  dist[enclosing.rank(x0)] = 1.0;
  ExactCost out;
  std::vector<double> r_vals, psi_vals;
  for (int j = 0; j < horizon.num_stages(); ++j) {
    const int v = policy[static_cast<std::size_t>(j)];
    UniformizedChain chain(model, v, enclosing);
    const double h = horizon.stage_times[static_cast<std::size_t>(j) + 1] -
                     horizon.stage_times[static_cast<std::size_t>(j)];
    r_vals = phi_on_densities(model, spec.r(v), enclosing);
    for (std::size_t s = 0; s < S; ++s) out.cost += dist[s] * r_vals[s];
    out.cost += chain.expected_running_cost(h, dist, spec.phi(v));
    UniformizedChain::Transient tr = chain.transient(h, dist);
    dist = tr.probs;
    out.sink_mass += tr.sink;
  }
  psi_vals = phi_on_densities(model, spec.psi(), enclosing);
  for (std::size_t s = 0; s < S; ++s) out.cost += dist[s] * psi_vals[s];
  return out;
}

}  // namespace jumpctrl
