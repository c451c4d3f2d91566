#include <doctest.h>

#include <cmath>

#include "jumpctrl/builtin.hpp"
#include "jumpctrl/openloop.hpp"

using namespace jumpctrl;

TEST_CASE("enumerate_policies") {
  CHECK(enumerate_policies(2, 3).size() == 8);
  CHECK(enumerate_policies(3, 5).size() == 243);
  const auto single = enumerate_policies(1, 4);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == std::vector<int>{0, 0, 0, 0});
  // lexicographic order
  const auto all = enumerate_policies(2, 2);
  CHECK(all == std::vector<std::vector<int>>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  CHECK_THROWS_AS(enumerate_policies(10, 7, 1000000), ResourceCapError);
}

TEST_CASE("rank_policies: ODE method is deterministic and finds the A1/A2 optima") {
  const ParsedModel a1 = builtin_model("birth_death_A1");
  const PolicyRanking r1 =
      rank_policies(a1.model, a1.horizon, a1.cost, {1.2}, 0, 1, RankMethod::Ode);
  CHECK(r1.best().policy == std::vector<int>{1, 1, 0});
  CHECK(r1.best().stderr_ == 0.0);
  CHECK(r1.entries.size() == 8);
  for (std::size_t i = 0; i + 1 < r1.entries.size(); ++i)
    CHECK(r1.entries[i].cost <= r1.entries[i + 1].cost);

  const ParsedModel a2 = builtin_model("birth_death_A2");
  const PolicyRanking r2 =
      rank_policies(a2.model, a2.horizon, a2.cost, {1.2}, 0, 1, RankMethod::Ode);
  CHECK(r2.best().policy == std::vector<int>{1, 0, 1});
}

TEST_CASE("rank_policies: deterministic zero-rate costs break ties lexicographically") {
  // both controls are dead: every policy has the same cost
  const ParsedModel p = parse_model(
      "model m\nscaling N = 10\nspecies A\nreaction r0: A -> 2 A unary(A)\n"
      "controls:\n  nu0: r0 = 0.0\n  nu1: r0 = 0.0\nstages: t = [0, 1, 2]\n"
      "cost: r = 0; phi = abs(z_A - 1.0); psi = 0; beta = 0\n");
  const PolicyRanking r =
      rank_policies(p.model, p.horizon, p.cost, {1.2}, 16, 3, RankMethod::McSsa);
  REQUIRE(r.entries.size() == 4);
  CHECK(r.entries[0].policy == std::vector<int>{0, 0});
  CHECK(r.entries[1].policy == std::vector<int>{0, 1});
  CHECK(r.entries[3].policy == std::vector<int>{1, 1});
}

TEST_CASE("rank_policies: reruns are identical") {
  const ParsedModel p = builtin_model("birth_death_A1");
  const JumpModel model = p.model.with_scaling(40);
  const PolicyRanking a =
      rank_policies(model, p.horizon, p.cost, {1.2}, 200, 99, RankMethod::McSsa, kDefaultEpsTau, 2);
  const PolicyRanking b =
      rank_policies(model, p.horizon, p.cost, {1.2}, 200, 99, RankMethod::McSsa, kDefaultEpsTau, 1);
  REQUIRE(a.entries.size() == b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    CHECK(a.entries[i].policy == b.entries[i].policy);
    CHECK(a.entries[i].cost == b.entries[i].cost);  // bitwise, worker-count independent
    CHECK(a.entries[i].stderr_ == b.entries[i].stderr_);
  }
}

TEST_CASE("good_policies") {
  PolicyRanking ranking;
  ranking.entries = {{{0, 0}, 10.0, 0.1}, {{0, 1}, 10.4, 0.1}, {{1, 0}, 10.6, 0.1},
                     {{1, 1}, 12.0, 0.1}};
  // n_ol = 1: exactly the best
  CHECK(good_policies(ranking, 1, 0.5).size() == 1);
  // n_ol = 3, eps_ol = 0.05: 10.4 <= 10.5 passes, 10.6 does not
  const auto good = good_policies(ranking, 3, 0.05);
  REQUIRE(good.size() == 2);
  CHECK(good[0].policy == std::vector<int>{0, 0});
  CHECK(good[1].policy == std::vector<int>{0, 1});
  // eps_ol = 0 with a unique minimum: singleton regardless of n_ol
  CHECK(good_policies(ranking, 4, 0.0).size() == 1);
  // cost cut is binding: 12.0 > 1.05 * 10.0 even with a large n_ol
  const auto capped = good_policies(ranking, 10, 0.05);
  CHECK(capped.size() == 2);
  // result is a prefix of the ranking
  for (std::size_t i = 0; i < capped.size(); ++i)
    CHECK(capped[i].policy == ranking.entries[i].policy);
}

TEST_CASE("stage_statistics: deterministic model has zero spread") {
  const ParsedModel p = parse_model(
      "model m\nscaling N = 10\nspecies A\nreaction r0: A -> 2 A unary(A)\n"
      "controls:\n  nu0: r0 = 0.0\nstages: t = [0, 1, 2]\n");
  const std::vector<RankedPolicy> good = {{{0, 0}, 0.0, 0.0}};
  const StageStatistics stats = stage_statistics(p.model, good, p.horizon, {1.2}, 100, 1);
  REQUIRE(stats.policies.size() == 1);
  for (int j = 0; j < 2; ++j) {
    CHECK(stats.policies[0].mean[static_cast<std::size_t>(j)][0] == doctest::Approx(1.2));
    CHECK(stats.policies[0].stddev[static_cast<std::size_t>(j)][0] < 1e-12);
  }
}

TEST_CASE("stage_statistics: CLT scale shrinks like 1/sqrt(N)") {
  const ParsedModel p = builtin_model("birth_death_A1");
  const std::vector<RankedPolicy> good = {{{1, 1, 0}, 0.0, 0.0}};
  const StageStatistics s40 =
      stage_statistics(p.model.with_scaling(40), good, p.horizon, {1.2}, 4000, 17);
  const StageStatistics s640 =
      stage_statistics(p.model.with_scaling(640), good, p.horizon, {1.2}, 4000, 18);
  // sigma ratio at t = 1 should be ~ 1/4 (N ratio 16), within MC slack
  const double ratio = s640.policies[0].stddev[1][0] / s40.policies[0].stddev[1][0];
  CHECK(ratio < 0.25 * 1.3);
  CHECK(ratio > 0.25 / 1.3);
}
