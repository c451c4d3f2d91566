#pragma once

#include <cstdint>
#include <vector>

#include "jumpctrl/errors.hpp"
#include "jumpctrl/model.hpp"

namespace jumpctrl {

// Hypercube truncation of the integer state lattice: per-species bounds
// [lo_i, hi_i] (both inclusive). Enumeration is row-major by species index.
struct TruncatedSpace {
  std::vector<std::int64_t> lo;
  std::vector<std::int64_t> hi;

  // bounds [floor(c_i N), ceil(c'_i N)] from density cut-offs
  static TruncatedSpace from_density(const JumpModel& model, const std::vector<double>& c_low,
                                     const std::vector<double>& c_high);

  int dims() const { return static_cast<int>(lo.size()); }
  std::size_t size() const;
  bool contains(const State& x) const;
  std::size_t rank(const State& x) const;
  State state(std::size_t rank) const;
  State clamp(const State& x) const;
  void validate(std::size_t size_cap = 0) const;

  bool operator==(const TruncatedSpace&) const = default;
};

// Box suggestion from per-stage mean/std statistics: componentwise
// min/max of mean -/+ margin_sigmas * std across stages and policies,
// floored at zero.
TruncatedSpace suggest_space(const JumpModel& model,
                             const std::vector<std::vector<std::vector<double>>>& stage_means,
                             const std::vector<std::vector<std::vector<double>>>& stage_stds,
                             double margin_sigmas = 4.0);

}  // namespace jumpctrl
