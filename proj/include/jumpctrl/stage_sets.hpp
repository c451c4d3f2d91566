#pragma once

#include <vector>

#include "jumpctrl/kdtree.hpp"
#include "jumpctrl/model.hpp"

namespace jumpctrl {

// Adaptively truncated per-stage state sets: one deduplicated set S_j per
// control stage j = 0..K-1, each with a k-d tree index. With a
// deterministic start, S_0 is the singleton {N*z0}.
struct StageStateSets {
  struct StageSet {
    KdTree tree;  // points are lexicographically sorted and deduplicated

    const std::vector<State>& states() const { return tree.points(); }
    bool empty() const { return tree.empty(); }
    std::size_t size() const { return tree.size(); }
    // index of x if present, -1 otherwise (binary search over the sorted list)
    std::ptrdiff_t index_of(const State& x) const;
  };

  std::vector<StageSet> stages;

  int num_stages() const { return static_cast<int>(stages.size()); }
};

StageStateSets::StageSet make_stage_set(std::vector<State> states);

struct NearestState {
  bool found = false;
  State state;
  double distance = 0.0;
  std::size_t index = 0;
};

// exact nearest neighbor in S_j; ties to the lexicographically smallest state
NearestState nearest_state(const StageStateSets& sets, int stage, const State& x);

}  // namespace jumpctrl
