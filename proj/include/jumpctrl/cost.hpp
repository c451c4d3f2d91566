#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jumpctrl/model.hpp"

namespace jumpctrl {

// Cost functions come from a closed catalogue: weighted absolute
// deviations w*|a.z - c|, squared deviations w*(a.z - c)^2 and constants,
// summed. Keeping the catalogue closed lets Lipschitz constants and sup
// bounds over a box be derived per term instead of estimated.
enum class CostTermKind { Constant, AbsDeviation, SquaredDeviation };

struct CostTerm {
  CostTermKind kind = CostTermKind::Constant;
  double weight = 0.0;
  std::vector<double> coeffs;  // a, one entry per species (empty for Constant)
  double offset = 0.0;         // c

  bool operator==(const CostTerm&) const = default;
};

struct CostFunction {
  std::vector<CostTerm> terms;

  double eval(const std::vector<double>& z) const;
  double eval_state(const State& x, double scaling) const;
  bool is_zero() const;

  // Lipschitz constant and sup bound on the box, per term via the linear
  // functional's range over the box corners.
  double lipschitz_on(const DomainBox& box) const;
  double bound_on(const DomainBox& box) const;

  bool operator==(const CostFunction&) const = default;
};

CostFunction zero_cost();
CostFunction constant_cost(double value);

struct CostSpec {
  // indexed by control; size 1 means shared across controls
  std::vector<CostFunction> stage_cost;    // r(z, nu)
  std::vector<CostFunction> running_cost;  // phi(z, nu)
  CostFunction terminal_cost;              // psi(z)
  double discount = 0.0;                   // beta >= 0

  const CostFunction& r(int control) const {
    return stage_cost.size() == 1 ? stage_cost[0] : stage_cost[static_cast<std::size_t>(control)];
  }
  const CostFunction& phi(int control) const {
    return running_cost.size() == 1 ? running_cost[0] : running_cost[static_cast<std::size_t>(control)];
  }
  const CostFunction& psi() const { return terminal_cost; }

  void validate(int num_species, int num_controls) const;

  bool operator==(const CostSpec&) const = default;
};

CostSpec zero_cost_spec();

// Flat evaluator for the simulation hot loop: linear coefficients are
// premultiplied by 1/N so terms apply directly to integer states.
class CompiledCostFunction {
 public:
  CompiledCostFunction() = default;
  CompiledCostFunction(const CostFunction& f, int num_species, double scaling);

  bool is_zero() const { return trivial_ && constant_ == 0.0; }

  double eval(const std::int64_t* x) const {
    if (trivial_) return constant_;
    double total = constant_;
    const double* p = data_.data();
    for (int t = 0; t < n_abs_; ++t) {
      const double w = p[0];
      double lin = p[1];
      p += 2;
      for (int i = 0; i < n_; ++i) lin += p[i] * static_cast<double>(x[i]);
      p += n_;
      total += w * std::abs(lin);
    }
    for (int t = 0; t < n_sq_; ++t) {
      const double w = p[0];
      double lin = p[1];
      p += 2;
      for (int i = 0; i < n_; ++i) lin += p[i] * static_cast<double>(x[i]);
      p += n_;
      total += w * lin * lin;
    }
    return total;
  }

 private:
  bool trivial_ = true;  // only the constant part is present
  double constant_ = 0.0;
  int n_ = 0;
  int n_abs_ = 0;
  int n_sq_ = 0;
  std::vector<double> data_;  // per term: w, -c, then n_ scaled coefficients
};

// per-control compiled r/phi plus psi for one model instance
struct CompiledSpec {
  std::vector<CompiledCostFunction> stage_cost;
  std::vector<CompiledCostFunction> running_cost;
  CompiledCostFunction terminal;

  CompiledSpec(const CostSpec& spec, const JumpModel& model);

  const CompiledCostFunction& r(int control) const {
    return stage_cost.size() == 1 ? stage_cost[0] : stage_cost[static_cast<std::size_t>(control)];
  }
  const CompiledCostFunction& phi(int control) const {
    return running_cost.size() == 1 ? running_cost[0]
                                    : running_cost[static_cast<std::size_t>(control)];
  }
};


}  // namespace jumpctrl
