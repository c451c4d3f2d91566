#include "jumpctrl/cost.hpp"

#include <cmath>

namespace jumpctrl {

namespace {

// range of the linear functional a.z - c over the box
void linear_range(const CostTerm& t, const DomainBox& box, double& lo, double& hi) {
  lo = -t.offset;
  hi = -t.offset;
  for (std::size_t i = 0; i < t.coeffs.size(); ++i) {
    const double a = t.coeffs[i];
    if (a >= 0.0) {
      lo += a * box.low[i];
      hi += a * box.high[i];
    } else {
      lo += a * box.high[i];
      hi += a * box.low[i];
    }
  }
}

double coeff_norm(const CostTerm& t) {
  double s = 0.0;
  for (double a : t.coeffs) s += a * a;
  return std::sqrt(s);
}

}  // namespace

double CostFunction::eval(const std::vector<double>& z) const {
  double total = 0.0;
  for (const CostTerm& t : terms) {
    if (t.kind == CostTermKind::Constant) {
      total += t.weight;
      continue;
    }
    double lin = -t.offset;
    for (std::size_t i = 0; i < t.coeffs.size(); ++i) lin += t.coeffs[i] * z[i];
    if (t.kind == CostTermKind::AbsDeviation)
      total += t.weight * std::abs(lin);
    else
      total += t.weight * lin * lin;
  }
  return total;
}

double CostFunction::eval_state(const State& x, double scaling) const {
  double total = 0.0;
  for (const CostTerm& t : terms) {
    if (t.kind == CostTermKind::Constant) {
      total += t.weight;
      continue;
    }
    double lin = -t.offset;
    for (std::size_t i = 0; i < t.coeffs.size(); ++i)
      lin += t.coeffs[i] * static_cast<double>(x[i]) / scaling;
    if (t.kind == CostTermKind::AbsDeviation)
      total += t.weight * std::abs(lin);
    else
      total += t.weight * lin * lin;
  }
  return total;
}

bool CostFunction::is_zero() const {
  for (const CostTerm& t : terms) {
    if (t.kind == CostTermKind::Constant && t.weight != 0.0) return false;
    if (t.kind != CostTermKind::Constant && t.weight != 0.0) {
      for (double a : t.coeffs)
        if (a != 0.0) return false;
      if (t.offset != 0.0) return false;
    }
  }
  return true;
}

double CostFunction::lipschitz_on(const DomainBox& box) const {
  double L = 0.0;
  for (const CostTerm& t : terms) {
    if (t.kind == CostTermKind::Constant) continue;
    const double norm = coeff_norm(t);
    if (t.kind == CostTermKind::AbsDeviation) {
      L += std::abs(t.weight) * norm;
    } else {
      double lo, hi;
      linear_range(t, box, lo, hi);
      L += 2.0 * std::abs(t.weight) * norm * std::max(std::abs(lo), std::abs(hi));
    }
  }
  return L;
}

double CostFunction::bound_on(const DomainBox& box) const {
  double M = 0.0;
  for (const CostTerm& t : terms) {
    if (t.kind == CostTermKind::Constant) {
      M += std::abs(t.weight);
      continue;
    }
    double lo, hi;
    linear_range(t, box, lo, hi);
    const double amax = std::max(std::abs(lo), std::abs(hi));
    M += std::abs(t.weight) * (t.kind == CostTermKind::AbsDeviation ? amax : amax * amax);
  }
  return M;
}

CostFunction zero_cost() { return CostFunction{}; }

CompiledCostFunction::CompiledCostFunction(const CostFunction& f, int num_species,
                                           double scaling) {
  n_ = num_species;
  std::vector<const CostTerm*> abs_terms, sq_terms;
  for (const CostTerm& t : f.terms) {
    switch (t.kind) {
      case CostTermKind::Constant: constant_ += t.weight; break;
      case CostTermKind::AbsDeviation: abs_terms.push_back(&t); break;
      case CostTermKind::SquaredDeviation: sq_terms.push_back(&t); break;
    }
  }
  n_abs_ = static_cast<int>(abs_terms.size());
  n_sq_ = static_cast<int>(sq_terms.size());
  trivial_ = n_abs_ == 0 && n_sq_ == 0;
  auto pack = [&](const CostTerm& t) {
    data_.push_back(t.weight);
    data_.push_back(-t.offset);
    for (int i = 0; i < n_; ++i) data_.push_back(t.coeffs[static_cast<std::size_t>(i)] / scaling);
  };
  for (const CostTerm* t : abs_terms) pack(*t);
  for (const CostTerm* t : sq_terms) pack(*t);
}

CompiledSpec::CompiledSpec(const CostSpec& spec, const JumpModel& model) {
  const int n = model.num_species();
  const double N = static_cast<double>(model.scaling());
  for (const CostFunction& f : spec.stage_cost) stage_cost.emplace_back(f, n, N);
  for (const CostFunction& f : spec.running_cost) running_cost.emplace_back(f, n, N);
  terminal = CompiledCostFunction(spec.terminal_cost, n, N);
}

CostFunction constant_cost(double value) {
  CostFunction f;
  f.terms.push_back(CostTerm{CostTermKind::Constant, value, {}, 0.0});
  return f;
}

void CostSpec::validate(int num_species, int num_controls) const {
  auto check_fun = [&](const CostFunction& f, const char* which) {
    for (const CostTerm& t : f.terms)
      if (t.kind != CostTermKind::Constant && static_cast<int>(t.coeffs.size()) != num_species)
        throw ConfigError(std::string(which) + ": cost term dimension mismatch");
  };
  auto check_table = [&](const std::vector<CostFunction>& fs, const char* which) {
    if (fs.empty()) throw ConfigError(std::string(which) + ": missing cost function");
    if (fs.size() != 1 && static_cast<int>(fs.size()) != num_controls)
      throw ConfigError(std::string(which) + ": per-control table size mismatch");
    for (const CostFunction& f : fs) check_fun(f, which);
  };
  check_table(stage_cost, "r");
  check_table(running_cost, "phi");
  check_fun(terminal_cost, "psi");
  if (discount < 0.0) throw ConfigError("discount beta must be >= 0");
}

CostSpec zero_cost_spec() {
  CostSpec spec;
  spec.stage_cost = {zero_cost()};
  spec.running_cost = {zero_cost()};
  spec.terminal_cost = zero_cost();
  return spec;
}

}  // namespace jumpctrl
