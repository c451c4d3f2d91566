#include "jumpctrl/stage_sets.hpp"

#include <algorithm>
#include <cmath>

namespace jumpctrl {

std::ptrdiff_t StageStateSets::StageSet::index_of(const State& x) const {
  const auto& pts = tree.points();
  auto it = std::lower_bound(pts.begin(), pts.end(), x);
  if (it == pts.end() || *it != x) return -1;
  return it - pts.begin();
}

StageStateSets::StageSet make_stage_set(std::vector<State> states) {
  std::sort(states.begin(), states.end());
  states.erase(std::unique(states.begin(), states.end()), states.end());
  StageStateSets::StageSet set;
  set.tree = KdTree(std::move(states));
  return set;
}

NearestState nearest_state(const StageStateSets& sets, int stage, const State& x) {
  NearestState out;
  const auto& set = sets.stages[static_cast<std::size_t>(stage)];
  auto res = set.tree.nearest(x);
  if (!res) return out;
  out.found = true;
  out.index = res->index;
  out.state = set.states()[res->index];
  out.distance = std::sqrt(static_cast<double>(res->dist2));
  return out;
}

}  // namespace jumpctrl
