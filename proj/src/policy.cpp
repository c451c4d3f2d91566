#include "jumpctrl/policy.hpp"

namespace jumpctrl {

int FeedbackPolicy::control_at(int stage, const State& x) const {
  State q = x;
  if (!space.contains(q)) {
    if (!clamp_outside)
      throw ConfigError("feedback policy: state outside the truncated space and clamping disabled");
    q = space.clamp(q);
  }
  return stage_controls[static_cast<std::size_t>(stage)][space.rank(q)];
}

HybridPolicy::Lookup HybridPolicy::lookup(int stage, const State& x) const {
  const auto& set = sets->stages[static_cast<std::size_t>(stage)];
  const auto& table = stage_controls[static_cast<std::size_t>(stage)];
  if (!set.empty()) {
    // exact membership always uses the table, including when eps_near = 0
    const std::ptrdiff_t idx = set.index_of(x);
    if (idx >= 0) return {table[static_cast<std::size_t>(idx)], LookupTag::InSet};
    if (eps_near > 0.0) {
      const NearestState near = nearest_state(*sets, stage, x);
      if (near.found && near.distance / static_cast<double>(scaling) < eps_near)
        return {table[near.index], LookupTag::Near};
    }
  }
  return {fallback.control_at(stage), LookupTag::OpenLoop};
}

int policy_control(const Policy& policy, int stage, const State& x, LookupTag* tag) {
  if (tag) *tag = LookupTag::OpenLoop;
  if (const auto* ol = std::get_if<OpenLoopPolicy>(&policy)) return ol->control_at(stage);
  if (const auto* fb = std::get_if<FeedbackPolicy>(&policy)) {
    if (tag) *tag = LookupTag::InSet;
    return fb->control_at(stage, x);
  }
  const auto& hy = std::get<HybridPolicy>(policy);
  const auto res = hy.lookup(stage, x);
  if (tag) *tag = res.tag;
  return res.control;
}

}  // namespace jumpctrl
