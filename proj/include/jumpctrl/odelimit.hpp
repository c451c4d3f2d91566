#pragma once

#include <vector>

#include "jumpctrl/cost.hpp"
#include "jumpctrl/model.hpp"

namespace jumpctrl {

// Dense output of the piecewise-controlled limit ODE. Each stage carries a
// uniform RK4 grid including exact stage-boundary values; the path is
// continuous across stage boundaries.
struct OdePath {
  struct Stage {
    int control = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> values;  // one density vector per time
  };
  std::vector<Stage> stages;
  double step = 0.0;

  // density at time t by cubic Hermite interpolation on the stage grid
  std::vector<double> at(const JumpModel& model, double t) const;
  const std::vector<double>& final_value() const { return stages.back().values.back(); }
};

// Limiting drift field of the density process under a fixed control.
std::vector<double> vector_field(const JumpModel& model, int control, const std::vector<double>& z);

// Finite-N drift field (differs from vector_field only through
// second-order self-interactions).
std::vector<double> vector_field_finite(const JumpModel& model, int control,
                                        const std::vector<double>& z);

// Classical RK4 with fixed step inside each stage; the last substep is
// shortened to land on the stage boundary exactly. Throws NumericalError
// if the path leaves guard_box (when given).
OdePath integrate_piecewise(const JumpModel& model, const std::vector<int>& open_loop,
                            const std::vector<double>& z0, const StagedHorizon& horizon,
                            double dt = 1e-3, const DomainBox* guard_box = nullptr);

// Deterministic cost of an ODE path: stage costs at grid starts, running
// cost by composite Simpson with local x4 refinement around sign changes
// of abs-term arguments, terminal cost at T.
double ode_cost(const OdePath& path, const JumpModel& model, const CostSpec& spec,
                const StagedHorizon& horizon);

}  // namespace jumpctrl
