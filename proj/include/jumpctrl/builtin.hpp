#pragma once

#include <string>
#include <vector>

#include "jumpctrl/model_text.hpp"

namespace jumpctrl {

// Built-in example models: "birth_death_A1", "birth_death_A2",
// "predator_prey", "unit_poisson".
std::vector<std::string> builtin_model_names();
const std::string& builtin_model_text(const std::string& name);
ParsedModel builtin_model(const std::string& name);

}  // namespace jumpctrl
