#include <doctest.h>

#include "jumpctrl/builtin.hpp"
#include "jumpctrl/model_text.hpp"
#include "jumpctrl/rng.hpp"

using namespace jumpctrl;

namespace {

const char* kBirthDeathDoc = R"(
model birth_death
scaling N = 100
species A
reaction birth:  A -> 2 A   unary(A)
reaction death:  A -> 0     unary(A)
controls:
  nu0: birth = 1.0, death = 0.6
  nu1: birth = 0.8, death = 1.0
stages: t = [0.0, 1.0, 2.0, 3.0]
)";

JumpModel birth_death_a1(std::int64_t N) {
  return builtin_model("birth_death_A1").model.with_scaling(N);
}

}  // namespace

TEST_CASE("parse: birth-death document") {
  const ParsedModel parsed = parse_model(kBirthDeathDoc);
  CHECK(parsed.model.num_species() == 1);
  CHECK(parsed.model.num_reactions() == 2);
  CHECK(parsed.model.num_controls() == 2);
  CHECK(parsed.model.scaling() == 100);
  CHECK(parsed.horizon.num_stages() == 3);
  CHECK(parsed.horizon.total_time() == 3.0);
  CHECK(parsed.model.control_set().controls[0].rate_constants ==
        std::vector<double>{1.0, 0.6});
  // no cost section: zero cost spec
  CHECK(parsed.cost.phi(0).is_zero());
}

TEST_CASE("parse: unknown species is a semantic error") {
  const std::string doc = R"(
model bad
scaling N = 10
species A
reaction r1: A -> A + C  unary(A)
controls:
  nu0: r1 = 1.0
stages: t = [0.0, 1.0]
)";
  CHECK_THROWS_AS(parse_model(doc), ConfigError);
}

TEST_CASE("parse: predator-prey builtin") {
  const ParsedModel parsed = builtin_model("predator_prey");
  CHECK(parsed.model.num_species() == 2);
  CHECK(parsed.model.num_reactions() == 6);
  CHECK(parsed.model.num_controls() == 3);
  CHECK(parsed.horizon.num_stages() == 5);
  REQUIRE(parsed.init_density.has_value());
  CHECK((*parsed.init_density) == std::vector<double>{1.0, 0.4});
  // running cost has the two absolute-deviation terms
  CHECK(parsed.cost.phi(0).terms.size() == 2);
}

TEST_CASE("parse: more semantic errors") {
  CHECK_THROWS_AS(parse_model("model m\nscaling N = 0\nspecies A\n"
                              "reaction r: A -> 0 unary(A)\ncontrols:\n  nu0: r = 1\n"
                              "stages: t = [0, 1]\n"),
                  ConfigError);
  // propensity/stoichiometry mismatch: unary with two reactant molecules
  CHECK_THROWS_AS(parse_model("model m\nscaling N = 5\nspecies A\n"
                              "reaction r: 2 A -> A unary(A)\ncontrols:\n  nu0: r = 1\n"
                              "stages: t = [0, 1]\n"),
                  ConfigError);
  // control missing a reaction rate
  CHECK_THROWS_AS(parse_model("model m\nscaling N = 5\nspecies A\n"
                              "reaction r: A -> 0 unary(A)\nreaction s: A -> 2 A unary(A)\n"
                              "controls:\n  nu0: r = 1\nstages: t = [0, 1]\n"),
                  ConfigError);
}

TEST_CASE("propensity forms") {
  // zero-order: kappa * N
  const ParsedModel zero = parse_model(
      "model m\nscaling N = 5\nspecies A\nreaction r: 0 -> A zero\n"
      "controls:\n  nu0: r = 2.0\nstages: t = [0, 1]\n");
  CHECK(zero.model.propensity(0, {7}, 0) == doctest::Approx(10.0));

  // binary self: (kappa / N) x (x - 1)
  const ParsedModel self = parse_model(
      "model m\nscaling N = 10\nspecies A\nreaction r: 2 A -> A binary_self(A)\n"
      "controls:\n  nu0: r = 1.0\nstages: t = [0, 1]\n");
  CHECK(self.model.propensity(0, {4}, 0) == doctest::Approx(1.2));
  CHECK(self.model.propensity(0, {1}, 0) == doctest::Approx(0.0));

  // unary at an empty population
  const JumpModel bd = birth_death_a1(10);
  CHECK(bd.propensity(0, {0}, 0) == 0.0);
  CHECK(bd.propensity(0, {0}, 1) == 0.0);
}

TEST_CASE("jump_rate_table: birth-death rates and aggregation") {
  const JumpModel bd = birth_death_a1(10);
  const auto table = jump_rate_table(bd, 0, {12});
  REQUIRE(table.size() == 2);
  for (const auto& e : table) {
    if (e.jump == std::vector<std::int64_t>{1})
      CHECK(e.rate == doctest::Approx(12.0));
    else
      CHECK(e.rate == doctest::Approx(7.2));
  }
  // absorbing state: empty table
  CHECK(jump_rate_table(bd, 0, {0}).empty());
}

TEST_CASE("jump_rate_table: reactions sharing a jump vector aggregate") {
  // X -> 0 (unary) and X + Y -> Y (pair) both jump by (-1, 0)
  const ParsedModel p = parse_model(
      "model m\nscaling N = 10\nspecies X\nspecies Y\n"
      "reaction decay: X -> 0 unary(X)\n"
      "reaction eaten: X + Y -> Y binary_pair(X, Y)\n"
      "controls:\n  nu0: decay = 1.0, eaten = 1.5\nstages: t = [0, 1]\n");
  // rates at x = (3, 10): 3.0 and 1.5/10*30 = 4.5
  const auto table = jump_rate_table(p.model, 0, {3, 10});
  REQUIRE(table.size() == 1);
  CHECK(table[0].jump == std::vector<std::int64_t>{-1, 0});
  CHECK(table[0].rate == doctest::Approx(7.5));
}

TEST_CASE("density_rate identities") {
  const JumpModel bd = birth_death_a1(10);
  CHECK(density_rate(bd, 0, {1.2}, {0.1}) == doctest::Approx(12.0));
  CHECK(density_rate(bd, 0, {0.0}, {0.1}) == 0.0);
  CHECK_THROWS_AS(density_rate(bd, 0, {0.123}, {0.1}), ConfigError);

  // density-dependent identity f_d(z, l/N) = N eta(z, l)
  const ParsedModel p = parse_model(
      "model m\nscaling N = 100\nspecies A\nreaction birth: A -> 2 A unary(A)\n"
      "controls:\n  nu0: birth = 1.0\nstages: t = [0, 1]\n");
  CHECK(density_rate(p.model, 0, {0.5}, {0.01}) == doctest::Approx(50.0));
}

TEST_CASE("density_rate equals jump_rate_table on a lattice sweep") {
  const JumpModel model = builtin_model("predator_prey").model.with_scaling(7);
  const double N = 7.0;
  for (std::int64_t a = 0; a <= 4; ++a) {
    for (std::int64_t b = 0; b <= 4; ++b) {
      const State x{a, b};
      for (int v = 0; v < model.num_controls(); ++v) {
        for (const auto& e : jump_rate_table(model, v, x)) {
          std::vector<double> z{static_cast<double>(a) / N, static_cast<double>(b) / N};
          std::vector<double> l{static_cast<double>(e.jump[0]) / N,
                                static_cast<double>(e.jump[1]) / N};
          CHECK(density_rate(model, v, z, l) == doctest::Approx(e.rate).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("aggregated total equals per-reaction sum") {
  const JumpModel model = builtin_model("predator_prey").model.with_scaling(13);
  RngStream rng(7, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const State x{static_cast<std::int64_t>(rng.uniform_below(40)),
                  static_cast<std::int64_t>(rng.uniform_below(40))};
    for (int v = 0; v < model.num_controls(); ++v) {
      double from_reactions = 0.0;
      for (int k = 0; k < model.num_reactions(); ++k) from_reactions += model.propensity(v, x, k);
      double from_table = 0.0;
      for (const auto& e : jump_rate_table(model, v, x)) {
        CHECK(e.rate > 0.0);
        from_table += e.rate;
      }
      CHECK(from_table == doctest::Approx(from_reactions).epsilon(1e-12));
    }
  }
}

TEST_CASE("density-dependent scaling: rate doubles with N") {
  // kinds 1/2/4 only
  const JumpModel model = builtin_model("predator_prey").model;
  const JumpModel m1 = model.with_scaling(20);
  const JumpModel m2 = model.with_scaling(40);
  for (std::int64_t a = 1; a <= 3; ++a) {
    for (std::int64_t b = 1; b <= 3; ++b) {
      const std::vector<double> z{a / 10.0, b / 10.0};
      for (int v = 0; v < model.num_controls(); ++v) {
        for (const auto& e : jump_rate_table(m1, v, State{2 * a, 2 * b})) {
          std::vector<double> l(2);
          for (int i = 0; i < 2; ++i) l[static_cast<std::size_t>(i)] = static_cast<double>(e.jump[static_cast<std::size_t>(i)]) / 20.0;
          std::vector<double> l2(2);
          for (int i = 0; i < 2; ++i) l2[static_cast<std::size_t>(i)] = static_cast<double>(e.jump[static_cast<std::size_t>(i)]) / 40.0;
          CHECK(density_rate(m2, v, z, l2) == doctest::Approx(2.0 * density_rate(m1, v, z, l)));
        }
      }
    }
  }
}

TEST_CASE("parser round-trip: parse(format(model)) is structurally equal") {
  for (const std::string& name : builtin_model_names()) {
    const ParsedModel a = builtin_model(name);
    const ParsedModel b = parse_model(format_model(a));
    CHECK(a.model == b.model);
    CHECK(a.horizon == b.horizon);
    CHECK(a.cost == b.cost);
    CHECK(a.init_density == b.init_density);
  }
}

TEST_CASE("staged horizon lookup") {
  const StagedHorizon h{{0.0, 1.0, 2.0, 3.0}};
  CHECK(h.stage_at(0.0) == 0);
  CHECK(h.stage_at(0.999) == 0);
  CHECK(h.stage_at(1.0) == 1);
  CHECK(h.stage_at(2.5) == 2);
  CHECK(h.stage_at(3.0) == 2);  // final stage right-closed
  CHECK(h.max_stage_width() == 1.0);
}
