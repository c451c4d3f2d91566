#include "jumpctrl/trunc_space.hpp"

#include <algorithm>
#include <cmath>

namespace jumpctrl {

TruncatedSpace TruncatedSpace::from_density(const JumpModel& model,
                                            const std::vector<double>& c_low,
                                            const std::vector<double>& c_high) {
  if (c_low.size() != c_high.size() ||
      static_cast<int>(c_low.size()) != model.num_species())
    throw ConfigError("truncation bounds dimension mismatch");
  TruncatedSpace space;
  const double N = static_cast<double>(model.scaling());
  for (std::size_t i = 0; i < c_low.size(); ++i) {
    space.lo.push_back(static_cast<std::int64_t>(std::floor(c_low[i] * N)));
    space.hi.push_back(static_cast<std::int64_t>(std::ceil(c_high[i] * N)));
  }
  space.validate();
  return space;
}

std::size_t TruncatedSpace::size() const {
  std::size_t total = 1;
  for (std::size_t i = 0; i < lo.size(); ++i)
    total *= static_cast<std::size_t>(hi[i] - lo[i] + 1);
  return total;
}

bool TruncatedSpace::contains(const State& x) const {
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  return true;
}

std::size_t TruncatedSpace::rank(const State& x) const {
  std::size_t r = 0;
  for (std::size_t i = 0; i < lo.size(); ++i)
    r = r * static_cast<std::size_t>(hi[i] - lo[i] + 1) + static_cast<std::size_t>(x[i] - lo[i]);
  return r;
}

State TruncatedSpace::state(std::size_t rank) const {
  State x(lo.size());
  for (std::size_t i = lo.size(); i-- > 0;) {
    const std::size_t width = static_cast<std::size_t>(hi[i] - lo[i] + 1);
    x[i] = lo[i] + static_cast<std::int64_t>(rank % width);
    rank /= width;
  }
  return x;
}

State TruncatedSpace::clamp(const State& x) const {
  State out = x;
  for (std::size_t i = 0; i < lo.size(); ++i) out[i] = std::clamp(out[i], lo[i], hi[i]);
  return out;
}

void TruncatedSpace::validate(std::size_t size_cap) const {
  if (lo.empty() || lo.size() != hi.size()) throw ConfigError("truncated space: empty or mismatched bounds");
  double total = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (lo[i] > hi[i]) throw ConfigError("truncated space: lo > hi");
    total *= static_cast<double>(hi[i] - lo[i] + 1);
  }
  if (size_cap > 0 && total > static_cast<double>(size_cap))
    throw ResourceCapError("truncated space has " + std::to_string(total) +
                           " states, exceeding the cap of " + std::to_string(size_cap) +
                           "; tighten the box");
}

TruncatedSpace suggest_space(const JumpModel& model,
                             const std::vector<std::vector<std::vector<double>>>& stage_means,
                             const std::vector<std::vector<std::vector<double>>>& stage_stds,
                             double margin_sigmas) {
  const int n = model.num_species();
  std::vector<double> c_low(static_cast<std::size_t>(n), 1e300);
  std::vector<double> c_high(static_cast<std::size_t>(n), -1e300);
  for (std::size_t p = 0; p < stage_means.size(); ++p) {
    for (std::size_t j = 0; j < stage_means[p].size(); ++j) {
      for (int i = 0; i < n; ++i) {
        const double m = stage_means[p][j][static_cast<std::size_t>(i)];
        const double s = stage_stds[p][j][static_cast<std::size_t>(i)];
        c_low[static_cast<std::size_t>(i)] = std::min(c_low[static_cast<std::size_t>(i)], m - margin_sigmas * s);
        c_high[static_cast<std::size_t>(i)] = std::max(c_high[static_cast<std::size_t>(i)], m + margin_sigmas * s);
      }
    }
  }
  for (int i = 0; i < n; ++i) c_low[static_cast<std::size_t>(i)] = std::max(0.0, c_low[static_cast<std::size_t>(i)]);
  return TruncatedSpace::from_density(model, c_low, c_high);
}

}  // namespace jumpctrl
