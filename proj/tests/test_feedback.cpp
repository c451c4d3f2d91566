#include <doctest.h>

#include <cmath>

#include "jumpctrl/builtin.hpp"
#include "jumpctrl/feedback.hpp"

using namespace jumpctrl;

namespace {

TruncatedSpace box1d(std::int64_t lo, std::int64_t hi) {
  TruncatedSpace s;
  s.lo = {lo};
  s.hi = {hi};
  return s;
}

}  // namespace

TEST_CASE("bellman_backup: single control, deterministic model") {
  // zero-rate: backup reduces to r + phi * width + U(z, k+1)
  const ParsedModel p = parse_model(
      "model m\nscaling N = 10\nspecies A\nreaction r0: A -> 2 A unary(A)\n"
      "controls:\n  nu0: r0 = 0.0\nstages: t = [0, 1]\n"
      "cost: r = 2; phi = abs(z_A - 1.0); psi = 0; beta = 0\n");
  const TruncatedSpace space = box1d(0, 30);
  std::vector<double> next(space.size(), 5.0);
  FeedbackSolveOptions options;
  options.num_paths = 16;
  options.seed = 3;
  const BackupResult res = bellman_backup(p.model, p.cost, space, next, {12}, 0, 0.0, 1.0, options);
  CHECK(res.argmin_control == 0);
  CHECK(res.value == doctest::Approx(2.0 + 0.2 + 5.0).epsilon(1e-12));
  CHECK(res.stderr_ < 1e-12);
}

TEST_CASE("bellman_backup: exact ties resolve to the lowest control index") {
  // two identical controls produce identical Q estimates from shared logic
  const ParsedModel p = parse_model(
      "model m\nscaling N = 10\nspecies A\nreaction r0: A -> 2 A unary(A)\n"
      "controls:\n  nu0: r0 = 0.0\n  nu1: r0 = 0.0\nstages: t = [0, 1]\n"
      "cost: r = 0; phi = abs(z_A - 1.0); psi = 0; beta = 0\n");
  const TruncatedSpace space = box1d(0, 30);
  std::vector<double> next(space.size(), 0.0);
  FeedbackSolveOptions options;
  options.num_paths = 8;
  options.seed = 4;
  const BackupResult res = bellman_backup(p.model, p.cost, space, next, {12}, 0, 0.0, 1.0, options);
  CHECK(res.q_values[0] == res.q_values[1]);
  CHECK(res.argmin_control == 0);
}

TEST_CASE("solve_feedback_dp: K=1 with constant terminal cost") {
  const ParsedModel p = parse_model(
      "model m\nscaling N = 10\nspecies A\n"
      "reaction birth: A -> 2 A unary(A)\nreaction death: A -> 0 unary(A)\n"
      "controls:\n  nu0: birth = 1.0, death = 0.6\n  nu1: birth = 0.8, death = 1.0\n"
      "stages: t = [0, 1]\ncost: r = 0; phi = 0; psi = 3.5; beta = 0\n");
  const TruncatedSpace space = box1d(2, 25);
  FeedbackSolveOptions options;
  options.num_paths = 32;
  options.seed = 5;
  const FeedbackSolution sol = solve_feedback_dp(p.model, p.horizon, p.cost, space, options);
  for (std::size_t s = 0; s < space.size(); ++s) {
    CHECK(sol.table.values[0][s] == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(sol.table.values[1][s] == doctest::Approx(3.5).epsilon(1e-12));
  }
}

TEST_CASE("solve_feedback_dp: adding a constant to psi shifts values, not decisions") {
  const std::string base =
      "model m\nscaling N = 10\nspecies A\n"
      "reaction birth: A -> 2 A unary(A)\nreaction death: A -> 0 unary(A)\n"
      "controls:\n  nu0: birth = 1.0, death = 0.6\n  nu1: birth = 0.8, death = 1.0\n"
      "stages: t = [0, 1, 2, 3]\n";
  const ParsedModel p0 = parse_model(base + "cost: r = 0; phi = abs(z_A - 1.0); psi = 0; beta = 0\n");
  const ParsedModel p7 = parse_model(base + "cost: r = 0; phi = abs(z_A - 1.0); psi = 7; beta = 0\n");
  const TruncatedSpace space = box1d(5, 20);
  FeedbackSolveOptions options;
  options.num_paths = 40;
  options.seed = 6;
  const FeedbackSolution a = solve_feedback_dp(p0.model, p0.horizon, p0.cost, space, options);
  const FeedbackSolution b = solve_feedback_dp(p7.model, p7.horizon, p7.cost, space, options);
  for (int k = 0; k < 3; ++k) {
    for (std::size_t s = 0; s < space.size(); ++s) {
      CHECK(b.table.values[static_cast<std::size_t>(k)][s] -
                a.table.values[static_cast<std::size_t>(k)][s] ==
            doctest::Approx(7.0).epsilon(1e-10));
      CHECK(a.table.argmin[static_cast<std::size_t>(k)][s] ==
            b.table.argmin[static_cast<std::size_t>(k)][s]);
    }
  }
}

TEST_CASE("solve_feedback_dp: worker count does not change the tables") {
  const ParsedModel p = builtin_model("birth_death_A1");
  const JumpModel model = p.model.with_scaling(10);
  const TruncatedSpace space = box1d(5, 20);
  FeedbackSolveOptions options;
  options.num_paths = 20;
  options.seed = 7;
  options.workers = 1;
  const FeedbackSolution a = solve_feedback_dp(model, p.horizon, p.cost, space, options);
  options.workers = 2;
  const FeedbackSolution b = solve_feedback_dp(model, p.horizon, p.cost, space, options);
  CHECK(a.table.values == b.table.values);
  CHECK(a.table.argmin == b.table.argmin);
}

TEST_CASE("uniformization: t = 0 and zero-rate edge cases") {
  const ParsedModel p = builtin_model("birth_death_A1");
  const JumpModel model = p.model.with_scaling(10);
  const TruncatedSpace box = box1d(0, 40);
  const UniformizedChain chain(model, 0, box);
  std::vector<double> init(box.size(), 0.0);
  init[box.rank({12})] = 1.0;
  const auto at0 = chain.transient(0.0, init);
  CHECK(at0.probs == init);

  const ParsedModel z = parse_model(
      "model m\nscaling N = 10\nspecies A\nreaction r0: A -> 2 A unary(A)\n"
      "controls:\n  nu0: r0 = 0.0\nstages: t = [0, 1]\n");
  const UniformizedChain dead(z.model, 0, box1d(0, 5));
  CHECK(dead.uniformization_rate() == 0.0);
  std::vector<double> init2(6, 0.0);
  init2[3] = 1.0;
  CHECK(dead.transient(2.0, init2).probs == init2);
}

TEST_CASE("uniformization: mass conservation including the sink") {
  const ParsedModel p = builtin_model("birth_death_A1");
  const JumpModel model = p.model.with_scaling(10);
  const TruncatedSpace box = box1d(6, 20);  // tight box so the sink matters
  const UniformizedChain chain(model, 0, box);
  std::vector<double> init(box.size(), 0.0);
  init[box.rank({12})] = 1.0;
  const auto tr = chain.transient(1.0, init);
  double total = tr.sink;
  for (double v : tr.probs) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tr.sink > 0.01);  // the tight box leaks
}

TEST_CASE("uniformization: pure-birth marginal is Poisson") {
  // zero-order arrivals at rate N: x(t) ~ Poisson(N t) from x = 0
  const JumpModel model = builtin_model("unit_poisson").model.with_scaling(10);
  const double t = 1.0;
  const double mean = 10.0;
  // box holds ~8 standard deviations
  const TruncatedSpace box = box1d(0, 36);
  const UniformizedChain chain(model, 0, box);
  std::vector<double> init(box.size(), 0.0);
  init[0] = 1.0;
  const auto tr = chain.transient(t, init);
  double tv = 0.0;
  double pk = std::exp(-mean);
  for (std::size_t k = 0; k < box.size(); ++k) {
    tv += std::abs(tr.probs[k] - pk);
    pk *= mean / static_cast<double>(k + 1);
  }
  CHECK(0.5 * tv < 1e-6);
  CHECK(tr.sink < 1e-8);
}

TEST_CASE("uniformization: running-cost expectation against a closed form") {
  // pure birth at unit rate per particle: E x(t) = x0 e^t; with phi = z,
  // E int_0^t phi = x0 (e^t - 1) / N
  const ParsedModel p = parse_model(
      "model m\nscaling N = 10\nspecies A\nreaction birth: A -> 2 A unary(A)\n"
      "controls:\n  nu0: birth = 1.0\nstages: t = [0, 1]\n"
      "cost: r = 0; phi = 1*abs(z_A - 0); psi = 0; beta = 0\n");
  const TruncatedSpace box = box1d(0, 120);
  const UniformizedChain chain(p.model, 0, box);
  std::vector<double> init(box.size(), 0.0);
  init[box.rank({5})] = 1.0;
  const double got = chain.expected_running_cost(1.0, init, p.cost.phi(0));
  CHECK(got == doctest::Approx(0.5 * (std::exp(1.0) - 1.0)).epsilon(1e-6));
}

TEST_CASE("uniformization: conditional decomposition is consistent") {
  const ParsedModel p = builtin_model("birth_death_A1");
  const JumpModel model = p.model.with_scaling(10);
  const TruncatedSpace box = box1d(0, 60);
  const UniformizedChain chain(model, 0, box);
  const std::size_t start = box.rank({12});
  const auto cond = chain.conditional(start, 1.0, p.cost.phi(0));
  std::vector<double> init(box.size(), 0.0);
  init[start] = 1.0;
  const auto tr = chain.transient(1.0, init);
  double prob_total = cond.sink_prob;
  double cost_total = cond.sink_cost;
  for (std::size_t s = 0; s < box.size(); ++s) {
    CHECK(cond.end_prob[s] == doctest::Approx(tr.probs[s]).epsilon(1e-10));
    prob_total += cond.end_prob[s];
    cost_total += cond.cost_by_end[s];
  }
  CHECK(prob_total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cost_total ==
        doctest::Approx(chain.expected_running_cost(1.0, init, p.cost.phi(0))).epsilon(1e-10));
}

TEST_CASE("MC feedback DP agrees with the uniformization oracle (tiny)") {
  const ParsedModel p = builtin_model("birth_death_A1");
  const JumpModel model = p.model.with_scaling(10);
  const TruncatedSpace cut = box1d(2, 25);
  const TruncatedSpace enclosing = box1d(0, 250);
  const ValueTable exact = exact_feedback_dp(model, p.horizon, p.cost, cut, enclosing);
  FeedbackSolveOptions options;
  options.num_paths = 400;
  options.seed = 11;
  const FeedbackSolution mc = solve_feedback_dp(model, p.horizon, p.cost, cut, options);
  int checked = 0, inside = 0;
  for (int k = 0; k < 3; ++k) {
    for (std::size_t s = 0; s < cut.size(); ++s) {
      const double err = std::abs(mc.table.values[static_cast<std::size_t>(k)][s] -
                                  exact.values[static_cast<std::size_t>(k)][s]);
      const double se = mc.table.value_stderr[static_cast<std::size_t>(k)][s];
      ++checked;
      if (err <= 3.0 * std::max(se, 1e-9) + 3.0 / std::sqrt(400.0) * 0.05) ++inside;
    }
  }
  CHECK(inside >= checked * 95 / 100);
}

TEST_CASE("discounted VI: constant costs hit the geometric fixed point") {
  const ParsedModel p = parse_model(
      "model m\nscaling N = 10\nspecies A\n"
      "reaction birth: A -> 2 A unary(A)\nreaction death: A -> 0 unary(A)\n"
      "controls:\n  nu0: birth = 1.0, death = 0.6\n  nu1: birth = 0.8, death = 1.0\n"
      "stages: t = [0, 1]\ncost: r = 2; phi = 3; psi = 0; beta = 0.5\n");
  const TruncatedSpace space = box1d(5, 20);
  DiscountedSolveOptions options;
  options.num_paths = 10;
  options.seed = 12;
  options.tol = 1e-10;
  const DiscountedSolution sol = solve_discounted_vi(p.model, p.cost, 1.0, space, options);
  const double lambda = std::exp(-0.5);
  const double expected = (2.0 + 3.0) / (1.0 - lambda);
  for (double v : sol.values) CHECK(v == doctest::Approx(expected).epsilon(1e-7));
  // frozen noise makes the sweep operator an exact lambda-contraction
  for (std::size_t i = 1; i < sol.sweep_changes.size(); ++i)
    CHECK(sol.sweep_changes[i] <= lambda * sol.sweep_changes[i - 1] + 1e-12);
}

TEST_CASE("discounted VI agrees with the exact oracle (tiny)") {
  const std::string doc =
      "model m\nscaling N = 10\nspecies A\n"
      "reaction birth: A -> 2 A unary(A)\nreaction death: A -> 0 unary(A)\n"
      "controls:\n  nu0: birth = 1.0, death = 0.6\n  nu1: birth = 0.8, death = 1.0\n"
      "stages: t = [0, 1]\ncost: r = 0; phi = abs(z_A - 1.0); psi = 0; beta = 0.5\n";
  const ParsedModel p = parse_model(doc);
  const TruncatedSpace cut = box1d(2, 25);
  const TruncatedSpace enclosing = box1d(0, 250);
  const ExactDiscounted oracle = exact_discounted_vi(p.model, p.cost, 1.0, cut, enclosing);
  DiscountedSolveOptions options;
  options.num_paths = 600;
  options.seed = 13;
  options.tol = 1e-9;
  const DiscountedSolution mc = solve_discounted_vi(p.model, p.cost, 1.0, cut, options);
  int inside = 0;
  const int total = static_cast<int>(cut.size());
  for (std::size_t s = 0; s < cut.size(); ++s) {
    // one-backup stderr, amplified by the fixed-point factor 1/(1-lambda)
    const double tol = 3.0 * mc.value_stderr[s] / (1.0 - std::exp(-0.5));
    if (std::abs(mc.values[s] - oracle.values[s]) <= tol) ++inside;
  }
  CHECK(inside >= total * 95 / 100);
}

TEST_CASE("exact open-loop cost: deterministic sanity") {
  // zero-rate: cost = |z0 - 1| * T exactly
  const ParsedModel z = parse_model(
      "model m\nscaling N = 10\nspecies A\nreaction r0: A -> 2 A unary(A)\n"
      "controls:\n  nu0: r0 = 0.0\nstages: t = [0, 1, 2, 3]\n"
      "cost: r = 0; phi = abs(z_A - 1.0); psi = 0; beta = 0\n");
  const ExactCost cost = exact_open_loop_cost(z.model, z.horizon, z.cost, {0, 0, 0}, {1.2},
                                              box1d(0, 30));
  CHECK(cost.cost == doctest::Approx(0.6).epsilon(1e-10));
  CHECK(cost.sink_mass == 0.0);
}
