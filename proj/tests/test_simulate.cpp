#include <doctest.h>

#include <cmath>

#include "jumpctrl/builtin.hpp"
#include "jumpctrl/cost_ops.hpp"
#include "jumpctrl/io.hpp"

using namespace jumpctrl;

namespace {

ParsedModel pure_birth(double kappa, std::int64_t N) {
  return parse_model("model m\nscaling N = " + std::to_string(N) +
                     "\nspecies A\nreaction birth: A -> 2 A unary(A)\n"
                     "controls:\n  nu0: birth = " + std::to_string(kappa) +
                     "\nstages: t = [0, 1]\n");
}

}  // namespace

TEST_CASE("rng: streams are reproducible and distinct") {
  RngStream a(123, 7), b(123, 7), c(123, 8);
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t v = a.next_u64();
    CHECK(v == b.next_u64());
  }
  int differs = 0;
  RngStream a2(123, 7);
  for (int i = 0; i < 100; ++i) differs += a2.next_u64() != c.next_u64();
  CHECK(differs > 90);
}

TEST_CASE("rng: poisson moments") {
  RngStream rng(99, 1);
  for (double mean : {0.5, 3.0, 25.0, 400.0}) {
    const int M = 40000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < M; ++i) {
      const double k = static_cast<double>(rng.poisson(mean));
      sum += k;
      sum2 += k * k;
    }
    const double m = sum / M;
    const double var = sum2 / M - m * m;
    CHECK(std::abs(m - mean) < 4.0 * std::sqrt(mean / M));
    CHECK(std::abs(var - mean) < 0.05 * mean + 4.0 * mean * std::sqrt(2.0 / M));
  }
}

TEST_CASE("ssa_step: absorbing state returns infinite wait") {
  const JumpModel bd = builtin_model("birth_death_A1").model.with_scaling(10);
  RngStream rng(1, 1);
  const SsaStep step = ssa_step(bd, 0, {0}, rng);
  CHECK(std::isinf(step.wait));
  CHECK(step.next == State{0});
}

TEST_CASE("ssa_step: birth-death waiting time and branch probability") {
  const JumpModel bd = builtin_model("birth_death_A1").model.with_scaling(10);
  // x = 12 under nu0: birth 12.0, death 7.2, total 19.2
  RngStream rng(2024, 5);
  const int M = 100000;
  double wait_sum = 0.0;
  int births = 0;
  for (int i = 0; i < M; ++i) {
    const SsaStep step = ssa_step(bd, 0, {12}, rng);
    wait_sum += step.wait;
    if (step.next[0] == 13) ++births;
  }
  const double mean_wait = wait_sum / M;
  const double wait_tol = 3.0 / 19.2 / std::sqrt(static_cast<double>(M));
  CHECK(std::abs(mean_wait - 1.0 / 19.2) < wait_tol);
  const double p = 12.0 / 19.2;
  const double binom_tol = 3.0 * std::sqrt(p * (1.0 - p) / M);
  CHECK(std::abs(static_cast<double>(births) / M - p) < binom_tol);
}

TEST_CASE("ssa_step: pure birth always increments") {
  const ParsedModel p = pure_birth(1.0, 10);
  RngStream rng(3, 3);
  for (int i = 0; i < 50; ++i) {
    const SsaStep step = ssa_step(p.model, 0, {5}, rng);
    CHECK(step.next == State{6});
  }
}

TEST_CASE("select_tau") {
  const ParsedModel p = pure_birth(1.0, 1000);
  // lambda = x, x = 100, eps = 0.03, g = 1: min(3/100, 9/100)
  CHECK(select_tau(p.model, 0, {100}, 0.03) == doctest::Approx(0.03));
  // all rates zero -> infinity
  const ParsedModel z = parse_model(
      "model m\nscaling N = 10\nspecies A\nreaction r0: A -> 2 A unary(A)\n"
      "controls:\n  nu0: r0 = 0.0\nstages: t = [0, 1]\n");
  CHECK(std::isinf(select_tau(z.model, 0, {4}, 0.03)));
  // halving eps never increases tau
  const JumpModel pp = builtin_model("predator_prey").model.with_scaling(100);
  RngStream rng(5, 5);
  for (int i = 0; i < 100; ++i) {
    const State x{static_cast<std::int64_t>(1 + rng.uniform_below(300)),
                  static_cast<std::int64_t>(1 + rng.uniform_below(300))};
    for (int v = 0; v < 3; ++v) {
      const double eps = 0.005 + 0.06 * rng.uniform01();
      CHECK(select_tau(pp, v, x, eps / 2.0) <= select_tau(pp, v, x, eps) + 1e-15);
    }
  }
}

TEST_CASE("tau_leap_step: zero intensity leaves the state unchanged") {
  const ParsedModel z = parse_model(
      "model m\nscaling N = 10\nspecies A\nreaction r0: A -> 2 A unary(A)\n"
      "controls:\n  nu0: r0 = 0.0\nstages: t = [0, 1]\n");
  RngStream rng(6, 6);
  CHECK(tau_leap_step(z.model, 0, {7}, 5.0, rng) == State{7});
}

TEST_CASE("tau_leap_step: Poisson increment mean") {
  const ParsedModel p = pure_birth(1.0, 1000);
  RngStream rng(7, 7);
  const int M = 100000;
  double sum = 0.0;
  for (int i = 0; i < M; ++i) {
    const State next = tau_leap_step(p.model, 0, {100}, 0.03, rng);
    sum += static_cast<double>(next[0] - 100);
  }
  // one leap of the full window: increment ~ Poisson(3)
  const double mean = sum / M;
  CHECK(std::abs(mean - 3.0) < 3.0 * std::sqrt(3.0 / M));
}

TEST_CASE("tau_leap_step: rejection keeps states non-negative") {
  const ParsedModel p = parse_model(
      "model m\nscaling N = 10\nspecies A\nreaction death: A -> 0 unary(A)\n"
      "controls:\n  nu0: death = 5.0\nstages: t = [0, 1]\n");
  RngStream rng(8, 8);
  for (int i = 0; i < 200; ++i) {
    const State next = tau_leap_step(p.model, 0, {1}, 10.0, rng);
    CHECK(next[0] >= 0);
  }
}

TEST_CASE("simulate: reproducible event lists for both methods") {
  const ParsedModel p = builtin_model("birth_death_A1");
  const JumpModel model = p.model.with_scaling(100);
  const Policy policy = OpenLoopPolicy{{1, 1, 0}};
  const Trajectory a = simulate_ssa(model, policy, p.horizon, {1.2}, RngStream(42, 9));
  const Trajectory b = simulate_ssa(model, policy, p.horizon, {1.2}, RngStream(42, 9));
  CHECK(a.times == b.times);
  CHECK(a.states_flat == b.states_flat);
  CHECK(a.exact);
  const Trajectory c = simulate_tau_leap(model, policy, p.horizon, {1.2}, RngStream(42, 9));
  const Trajectory d = simulate_tau_leap(model, policy, p.horizon, {1.2}, RngStream(42, 9));
  CHECK(c.times == d.times);
  CHECK(c.states_flat == d.states_flat);
  CHECK_FALSE(c.exact);
  CHECK(a.times != c.times);
}

TEST_CASE("simulate: trajectory invariants") {
  const ParsedModel p = builtin_model("predator_prey");
  const JumpModel model = p.model.with_scaling(50);
  for (int m = 0; m < 2; ++m) {
    const Policy policy = OpenLoopPolicy{{0, 2, 1, 0, 2}};
    const Trajectory traj =
        m == 0 ? simulate_ssa(model, policy, p.horizon, {1.0, 0.4}, RngStream(11, 1))
               : simulate_tau_leap(model, policy, p.horizon, {1.0, 0.4}, RngStream(11, 1));
    REQUIRE(traj.num_events() > 0);
    double prev = 0.0;
    for (std::size_t e = 0; e < traj.num_events(); ++e) {
      CHECK(traj.times[e] > prev);
      prev = traj.times[e];
      const State x = traj.state_at_event(e);
      for (std::int64_t v : x) CHECK(v >= 0);
    }
    CHECK(prev <= p.horizon.total_time());
    CHECK(traj.controls_applied == std::vector<int>{0, 2, 1, 0, 2});
  }
}

TEST_CASE("simulate: zero-rate model has no events") {
  const ParsedModel z = parse_model(
      "model m\nscaling N = 10\nspecies A\nreaction r0: A -> 2 A unary(A)\n"
      "controls:\n  nu0: r0 = 0.0\nstages: t = [0, 1, 2]\n");
  const Trajectory traj =
      simulate_ssa(z.model, OpenLoopPolicy{{0, 0}}, z.horizon, {1.2}, RngStream(1, 1));
  CHECK(traj.num_events() == 0);
  CHECK(traj.state_at(1.5) == State{12});
}

TEST_CASE("simulate: feedback policy switches at stage boundaries only") {
  const ParsedModel p = builtin_model("birth_death_A2");
  const JumpModel model = p.model.with_scaling(50);
  TruncatedSpace space;
  space.lo = {0};
  space.hi = {200};
  FeedbackPolicy fb;
  fb.space = space;
  // stage 0/2 -> control 0, stage 1 -> control 1, regardless of state
  fb.stage_controls = {std::vector<std::int32_t>(201, 0), std::vector<std::int32_t>(201, 1),
                       std::vector<std::int32_t>(201, 0)};
  const Trajectory traj = simulate_ssa(model, fb, p.horizon, {1.2}, RngStream(13, 2));
  CHECK(traj.controls_applied == std::vector<int>{0, 1, 0});
}

TEST_CASE("trajectory CSV has the documented shape") {
  const ParsedModel p = builtin_model("birth_death_A1");
  const JumpModel model = p.model.with_scaling(10);
  const Trajectory traj =
      simulate_ssa(model, OpenLoopPolicy{{0, 1, 0}}, p.horizon, {1.2}, RngStream(3, 1));
  const std::string csv = trajectory_csv(traj, model, p.horizon);
  CHECK(csv.rfind("time,A,control_index\n0,12,0\n", 0) == 0);
  const std::size_t rows = static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n'));
  CHECK(rows == traj.num_events() + 2);  // header + initial + events
}

TEST_CASE("tau-leap cost tracks SSA cost on birth-death") {
  const ParsedModel p = builtin_model("birth_death_A1");
  const JumpModel model = p.model.with_scaling(200);
  const Policy policy = OpenLoopPolicy{{1, 1, 0}};
  const McEstimate ssa =
      mc_cost_estimate(model, policy, p.cost, p.horizon, {1.2}, 2000, 7, SimMethod::Ssa);
  const McEstimate tau =
      mc_cost_estimate(model, policy, p.cost, p.horizon, {1.2}, 2000, 7, SimMethod::TauLeap);
  CHECK(std::abs(ssa.mean - tau.mean) / ssa.mean < 0.04);
  CHECK(tau.total_steps * 5 < ssa.total_steps);  // leaping actually leaps
}

TEST_CASE("ssa endpoint marginal matches the uniformization oracle (tiny)") {
  // single stage, fixed control, N = 4: total-variation distance of the
  // endpoint distribution against the exact transient
  const ParsedModel p = builtin_model("birth_death_A1");
  const JumpModel model = p.model.with_scaling(4);
  TruncatedSpace box;
  box.lo = {0};
  box.hi = {120};
  const UniformizedChain chain(model, 0, box);
  std::vector<double> init(box.size(), 0.0);
  init[box.rank({5})] = 1.0;
  const auto exact = chain.transient(1.0, init);

  const int M = 100000;
  std::vector<double> hist(box.size(), 0.0);
  SimScratch ws;
  NullObserver obs;
  for (int i = 0; i < M; ++i) {
    RngStream rng(2718, static_cast<std::uint64_t>(i));
    State x{5};
    ssa_segment(model, 0, x, 0.0, 1.0, rng, ws, obs);
    hist[box.rank(x)] += 1.0 / M;
  }
  double tv = 0.0;
  for (std::size_t s = 0; s < box.size(); ++s) tv += std::abs(hist[s] - exact.probs[s]);
  CHECK(0.5 * tv < 0.02);
}

TEST_CASE("empirical mean density tracks the ODE at large N") {
  const ParsedModel p = builtin_model("birth_death_A1");
  const JumpModel model = p.model.with_scaling(4000);
  const std::vector<int> policy{1, 1, 0};
  const OdePath ode = integrate_piecewise(p.model, policy, {1.2}, p.horizon, 1e-3);

  const int M = 2000;
  std::vector<double> mean_at_stage(4, 0.0);
  const CompiledSpec no_cost(zero_cost_spec(), model);
  const State x0 = state_from_density(model, {1.2});
  SimScratch ws;
  for (int i = 0; i < M; ++i) {
    RngStream rng(3141, static_cast<std::uint64_t>(i));
    run_policy_path(model, Policy{OpenLoopPolicy{policy}}, p.horizon, no_cost, x0,
                    SimMethod::Ssa, kDefaultEpsTau, rng, ws, [&](int j, const State& x) {
                      mean_at_stage[static_cast<std::size_t>(j)] +=
                          static_cast<double>(x[0]) / 4000.0 / M;
                    });
  }
  for (int j = 1; j <= 3; ++j) {
    const std::vector<double> z =
        j < 3 ? ode.stages[static_cast<std::size_t>(j)].values.front()
              : ode.final_value();
    CHECK(std::abs(mean_at_stage[static_cast<std::size_t>(j)] - z[0]) < 0.02);
  }
}
