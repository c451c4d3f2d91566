#include "jumpctrl/builtin.hpp"

#include <map>

namespace jumpctrl {

namespace {

const std::string kBirthDeathA1 = R"(# birth-death process, control set A1
model birth_death_A1
scaling N = 100
species A
reaction birth: A -> 2 A   unary(A)
reaction death: A -> 0     unary(A)
controls:
  nu0: birth = 1.0, death = 0.6
  nu1: birth = 0.8, death = 1.0
stages: t = [0.0, 1.0, 2.0, 3.0]
cost: r = 0; phi = abs(z_A - 1.0); psi = 0; beta = 0
init: z = [1.2]
)";

const std::string kBirthDeathA2 = R"(# birth-death process, control set A2
model birth_death_A2
scaling N = 100
species A
reaction birth: A -> 2 A   unary(A)
reaction death: A -> 0     unary(A)
controls:
  nu0: birth = 1.0, death = 0.8
  nu1: birth = 0.8, death = 1.0
stages: t = [0.0, 1.0, 2.0, 3.0]
cost: r = 0; phi = abs(z_A - 1.0); psi = 0; beta = 0
init: z = [1.2]
)";

const std::string kPredatorPrey = R"(# two-species predator-prey model, three controls
model predator_prey
scaling N = 100
species A
species B
reaction prey_birth: A -> 2 A        unary(A)
reaction prey_death: A -> 0          unary(A)
reaction pred_birth: B -> 2 B        unary(B)
reaction pred_death: B -> 0          unary(B)
reaction predation:  A + B -> B      binary_pair(A, B)
reaction conversion: A + B -> A + 2 B  binary_pair(A, B)
controls:
  nu0: prey_birth = 2.5, prey_death = 0.2, pred_birth = 0.2, pred_death = 2.0, predation = 2.0, conversion = 2.0
  nu1: prey_birth = 2.7, prey_death = 0.2, pred_birth = 0.2, pred_death = 1.5, predation = 2.0, conversion = 2.0
  nu2: prey_birth = 2.5, prey_death = 0.2, pred_birth = 0.2, pred_death = 2.5, predation = 2.0, conversion = 2.0
stages: t = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0]
cost: r = 0; phi = abs(z_A - 2*z_B) + abs(z_A - 1.5); psi = 0; beta = 0
init: z = [1.0, 0.4]
)";

// Unit-rate immigration; the density path matches a scaled unit Poisson
// process started from zero.
const std::string kUnitPoisson = R"(model unit_poisson
scaling N = 100
species A
reaction arrive: 0 -> A   zero
controls:
  nu0: arrive = 1.0
stages: t = [0.0, 1.0]
cost: r = 0; phi = 0; psi = 0; beta = 0
init: z = [0.0]
domain: A in [0.0, 4.0)
)";

const std::map<std::string, const std::string*>& registry() {
  static const std::map<std::string, const std::string*> reg = {
      {"birth_death_A1", &kBirthDeathA1},
      {"birth_death_A2", &kBirthDeathA2},
      {"predator_prey", &kPredatorPrey},
      {"unit_poisson", &kUnitPoisson},
  };
  return reg;
}

}  // namespace

std::vector<std::string> builtin_model_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : registry()) names.push_back(name);
  return names;
}

const std::string& builtin_model_text(const std::string& name) {
  auto it = registry().find(name);
  if (it == registry().end()) throw ConfigError("unknown builtin model: " + name);
  return *it->second;
}

ParsedModel builtin_model(const std::string& name) {
  return parse_model(builtin_model_text(name));
}

}  // namespace jumpctrl
