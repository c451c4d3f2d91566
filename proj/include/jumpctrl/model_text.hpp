#pragma once

#include <optional>
#include <string>
#include <vector>

#include "jumpctrl/cost.hpp"
#include "jumpctrl/model.hpp"

namespace jumpctrl {

struct ParsedModel {
  JumpModel model;
  StagedHorizon horizon;
  CostSpec cost;
  std::optional<std::vector<double>> init_density;
};

// Parses the line-oriented model format (see README / builtin models).
// Throws ConfigError with line/column on syntax errors and ConfigError
// on semantic errors (unknown species, stoichiometry/propensity
// mismatch, non-positive N, ...).
ParsedModel parse_model(const std::string& text);

// Canonical writer; parse(format_model(p)) is structurally equal to p.
std::string format_model(const ParsedModel& parsed);

}  // namespace jumpctrl
