#pragma once

#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "jumpctrl/stage_sets.hpp"
#include "jumpctrl/trunc_space.hpp"

namespace jumpctrl {

// provenance of a per-stage control decision
enum class LookupTag { InSet, Near, OpenLoop };

struct OpenLoopPolicy {
  std::vector<int> controls;  // control index per stage

  int control_at(int stage) const { return controls[static_cast<std::size_t>(stage)]; }
};

// Per-stage state -> control tables on a truncated hypercube. States
// outside the hypercube resolve to the nearest in-space state when
// clamp_outside is set, and raise otherwise.
struct FeedbackPolicy {
  TruncatedSpace space;
  std::vector<std::vector<std::int32_t>> stage_controls;  // [stage][state rank]
  bool clamp_outside = true;

  int control_at(int stage, const State& x) const;
};

// Feedback tables on the adaptive stage sets, a nearest-neighbor rule
// within density distance eps_near, and an open-loop fallback elsewhere.
struct HybridPolicy {
  std::shared_ptr<const StageStateSets> sets;
  std::vector<std::vector<std::int32_t>> stage_controls;  // [stage][index in S_j]
  OpenLoopPolicy fallback;
  double eps_near = 0.0;
  std::int64_t scaling = 1;

  struct Lookup {
    int control;
    LookupTag tag;
  };
  Lookup lookup(int stage, const State& x) const;
};

using Policy = std::variant<OpenLoopPolicy, FeedbackPolicy, HybridPolicy>;

int policy_control(const Policy& policy, int stage, const State& x, LookupTag* tag = nullptr);

}  // namespace jumpctrl
