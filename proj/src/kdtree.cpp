#include "jumpctrl/kdtree.hpp"

#include <algorithm>

namespace jumpctrl {

std::int64_t squared_distance(const State& a, const State& b) {
  std::int64_t d2 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::int64_t d = a[i] - b[i];
    d2 += d * d;
  }
  return d2;
}

namespace {

// candidate replaces best on smaller distance, or on equal distance and
// lexicographically smaller point
bool better(std::int64_t d2, const State& pt, std::int64_t best_d2, const State& best_pt) {
  if (d2 != best_d2) return d2 < best_d2;
  return pt < best_pt;
}

}  // namespace

KdTree::KdTree(std::vector<State> points) : points_(std::move(points)) {
  if (points_.empty()) return;
  dims_ = static_cast<int>(points_[0].size());
  std::vector<std::uint32_t> idx(points_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::uint32_t>(i);
  nodes_.reserve(points_.size());
  root_ = build(idx, 0, idx.size(), 0);
}

std::int32_t KdTree::build(std::vector<std::uint32_t>& idx, std::size_t begin, std::size_t end,
                           int axis) {
  if (begin >= end) return -1;
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(idx.begin() + static_cast<std::ptrdiff_t>(begin),
                   idx.begin() + static_cast<std::ptrdiff_t>(mid),
                   idx.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::uint32_t a, std::uint32_t b) {
                     if (points_[a][axis] != points_[b][axis]) return points_[a][axis] < points_[b][axis];
                     return points_[a] < points_[b];
                   });
  Node node;
  node.axis = axis;
  node.point = idx[mid];
  const std::int32_t self = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);
  const int next_axis = (axis + 1) % dims_;
  const std::int32_t left = build(idx, begin, mid, next_axis);
  const std::int32_t right = build(idx, mid + 1, end, next_axis);
  nodes_[static_cast<std::size_t>(self)].left = left;
  nodes_[static_cast<std::size_t>(self)].right = right;
  return self;
}

void KdTree::search(std::int32_t node_id, const State& q, Result& best, bool& has_best) const {
  if (node_id < 0) return;
  const Node& node = nodes_[static_cast<std::size_t>(node_id)];
  const State& pt = points_[node.point];
  const std::int64_t d2 = squared_distance(pt, q);
  if (!has_best || better(d2, pt, best.dist2, points_[best.index])) {
    best.index = node.point;
    best.dist2 = d2;
    has_best = true;
  }
  const std::int64_t delta = q[node.axis] - pt[node.axis];
  const std::int32_t near_child = delta < 0 ? node.left : node.right;
  const std::int32_t far_child = delta < 0 ? node.right : node.left;
  search(near_child, q, best, has_best);
  // the far side can still hold an equal-distance, lexicographically
  // smaller point, so prune only on strict excess
  if (delta * delta <= best.dist2) search(far_child, q, best, has_best);
}

std::optional<KdTree::Result> KdTree::nearest(const State& query) const {
  if (points_.empty()) return std::nullopt;
  Result best;
  bool has_best = false;
  search(root_, query, best, has_best);
  return best;
}

std::optional<KdTree::Result> nearest_linear_scan(const std::vector<State>& points,
                                                  const State& query) {
  if (points.empty()) return std::nullopt;
  KdTree::Result best{0, squared_distance(points[0], query)};
  for (std::size_t i = 1; i < points.size(); ++i) {
    const std::int64_t d2 = squared_distance(points[i], query);
    if (better(d2, points[i], best.dist2, points[best.index])) {
      best.index = i;
      best.dist2 = d2;
    }
  }
  return best;
}

}  // namespace jumpctrl
