#include <doctest.h>

#include <cmath>

#include "jumpctrl/builtin.hpp"
#include "jumpctrl/odelimit.hpp"

using namespace jumpctrl;

namespace {

// closed-form cost of the birth-death limit ODE: z(t) = z_j e^{a (t - t_j)}
// stage-wise, integrand |z - 1|
double exp_abs_integral(double z0, double a, double width) {
  // int_0^w |z0 e^{a t} - 1| dt
  auto prim = [&](double t) { return a == 0.0 ? z0 * t : z0 / a * (std::exp(a * t) - 1.0); };
  double cross = -1.0;
  if (a != 0.0 && z0 > 0.0) {
    const double tc = std::log(1.0 / z0) / a;
    if (tc > 0.0 && tc < width) cross = tc;
  }
  auto piece = [&](double t0, double t1) {
    const double area = prim(t1) - prim(t0) - (t1 - t0);
    return std::abs(area);
  };
  if (cross < 0.0) return piece(0.0, width);
  return piece(0.0, cross) + piece(cross, width);
}

double birth_death_ode_cost(const JumpModel& model, const std::vector<int>& policy, double z0) {
  double z = z0;
  double total = 0.0;
  for (int control : policy) {
    const auto& k = model.control_set().controls[static_cast<std::size_t>(control)].rate_constants;
    const double a = k[0] - k[1];  // birth - death
    total += exp_abs_integral(z, a, 1.0);
    z *= std::exp(a);
  }
  return total;
}

}  // namespace

TEST_CASE("vector_field examples") {
  const JumpModel bd = builtin_model("birth_death_A1").model;
  CHECK(vector_field(bd, 0, {1.2})[0] == doctest::Approx(0.48));

  const JumpModel pp = builtin_model("predator_prey").model;
  const auto F = vector_field(pp, 0, {1.0, 0.4});
  CHECK(F[0] == doctest::Approx(1.5));
  CHECK(F[1] == doctest::Approx(0.08));

  // z = 0: only zero-order contributions
  CHECK(vector_field(pp, 0, {0.0, 0.0}) == std::vector<double>{0.0, 0.0});
  const JumpModel poisson = builtin_model("unit_poisson").model;
  CHECK(vector_field(poisson, 0, {0.0})[0] == doctest::Approx(1.0));
}

TEST_CASE("binary-self limit field uses z^2") {
  const ParsedModel p = parse_model(
      "model m\nscaling N = 10\nspecies A\nreaction dimer: 2 A -> A binary_self(A)\n"
      "controls:\n  nu0: dimer = 3.0\nstages: t = [0, 1]\n");
  CHECK(vector_field(p.model, 0, {0.5})[0] == doctest::Approx(-3.0 * 0.25));
  // finite-N field keeps the 1/N correction
  CHECK(vector_field_finite(p.model, 0, {0.5})[0] == doctest::Approx(-3.0 * 0.5 * 0.4));
}

TEST_CASE("integrate_piecewise: exponential closed form") {
  const ParsedModel p = builtin_model("birth_death_A2");
  // nu1: birth 0.8, death 1.0 -> a = -0.2
  const StagedHorizon one_stage{{0.0, 1.0}};
  const OdePath path = integrate_piecewise(p.model, {1}, {1.2}, one_stage, 1e-3);
  const double expected = 1.2 * std::exp(-0.2);
  CHECK(std::abs(path.final_value()[0] - expected) < 1e-9);
}

TEST_CASE("integrate_piecewise: zero field is constant") {
  const ParsedModel p = parse_model(
      "model m\nscaling N = 10\nspecies A\nreaction r0: A -> 2 A unary(A)\n"
      "controls:\n  nu0: r0 = 0.0\nstages: t = [0, 1, 2]\n");
  const OdePath path = integrate_piecewise(p.model, {0, 0}, {1.2}, p.horizon, 1e-2);
  CHECK(path.final_value()[0] == 1.2);
}

TEST_CASE("RK4 order: halving dt reduces error ~16x") {
  const ParsedModel p = builtin_model("birth_death_A2");
  const StagedHorizon one_stage{{0.0, 1.0}};
  const double expected = 1.2 * std::exp(-0.2);
  const double dt = 1.0 / 16.0;
  const double e1 =
      std::abs(integrate_piecewise(p.model, {1}, {1.2}, one_stage, dt).final_value()[0] - expected);
  const double e2 = std::abs(
      integrate_piecewise(p.model, {1}, {1.2}, one_stage, dt / 2.0).final_value()[0] - expected);
  const double order = std::log2(e1 / e2);
  CHECK(order >= 3.8);
  CHECK(order <= 4.5);
}

TEST_CASE("flow property under a constant control") {
  const ParsedModel p = builtin_model("birth_death_A1");
  const StagedHorizon whole{{0.0, 2.0}};
  const StagedHorizon halves{{0.0, 1.0, 2.0}};
  const auto z_whole = integrate_piecewise(p.model, {0}, {1.2}, whole, 1e-3).final_value();
  const auto z_halves = integrate_piecewise(p.model, {0, 0}, {1.2}, halves, 1e-3).final_value();
  CHECK(std::abs(z_whole[0] - z_halves[0]) < 1e-10);
}

TEST_CASE("stage boundaries are bit-exact across stages") {
  const ParsedModel p = builtin_model("birth_death_A1");
  const OdePath path = integrate_piecewise(p.model, {0, 1, 0}, {1.2}, p.horizon, 1e-3);
  for (std::size_t j = 0; j + 1 < path.stages.size(); ++j) {
    CHECK(path.stages[j].values.back() == path.stages[j + 1].values.front());
    CHECK(path.stages[j].times.back() == path.stages[j + 1].times.front());
  }
}

TEST_CASE("guard box blow-up raises") {
  const ParsedModel p = builtin_model("birth_death_A1");
  DomainBox tight{{0.0}, {1.25}};
  const StagedHorizon one_stage{{0.0, 3.0}};
  // growth under nu0 exits z < 1.25 quickly
  CHECK_THROWS_AS(integrate_piecewise(p.model, {0}, {1.2}, one_stage, 1e-3, &tight),
                  NumericalError);
}

TEST_CASE("ode_cost: degenerate constant path") {
  const ParsedModel p = parse_model(
      "model m\nscaling N = 10\nspecies A\nreaction r0: A -> 2 A unary(A)\n"
      "controls:\n  nu0: r0 = 0.0\nstages: t = [0, 1, 2, 3]\n"
      "cost: r = 0; phi = abs(z_A - 1.0); psi = 0; beta = 0\n");
  const OdePath path = integrate_piecewise(p.model, {0, 0, 0}, {1.2}, p.horizon, 1e-3);
  CHECK(ode_cost(path, p.model, p.cost, p.horizon) == doctest::Approx(0.6).epsilon(1e-10));
}

TEST_CASE("ode_cost matches the exponential closed form") {
  const ParsedModel p = builtin_model("birth_death_A2");
  const std::vector<int> policy{1, 0, 1};
  const OdePath path = integrate_piecewise(p.model, policy, {1.2}, p.horizon, 1e-3);
  const double expected = birth_death_ode_cost(p.model, policy, 1.2);
  CHECK(ode_cost(path, p.model, p.cost, p.horizon) == doctest::Approx(expected).epsilon(1e-6));

  // all 8 policies, both control sets
  for (const std::string name : {"birth_death_A1", "birth_death_A2"}) {
    const ParsedModel m = builtin_model(name);
    for (int bits = 0; bits < 8; ++bits) {
      const std::vector<int> u{(bits >> 2) & 1, (bits >> 1) & 1, bits & 1};
      const OdePath path_u = integrate_piecewise(m.model, u, {1.2}, m.horizon, 1e-3);
      CHECK(ode_cost(path_u, m.model, m.cost, m.horizon) ==
            doctest::Approx(birth_death_ode_cost(m.model, u, 1.2)).epsilon(1e-6));
    }
  }
}

TEST_CASE("ode_cost: grid refinement is converged") {
  const ParsedModel p = builtin_model("birth_death_A2");
  const std::vector<int> policy{1, 0, 1};
  const OdePath coarse = integrate_piecewise(p.model, policy, {1.2}, p.horizon, 1e-3);
  const OdePath fine = integrate_piecewise(p.model, policy, {1.2}, p.horizon, 5e-4);
  CHECK(std::abs(ode_cost(coarse, p.model, p.cost, p.horizon) -
                 ode_cost(fine, p.model, p.cost, p.horizon)) < 1e-8);
}
