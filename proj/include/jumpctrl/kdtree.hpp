#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "jumpctrl/model.hpp"

namespace jumpctrl {

// Static k-d tree over integer lattice points with exact squared Euclidean
// distances. Equal-distance ties resolve to the lexicographically smallest
// point, matching the linear-scan reference used in tests.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::vector<State> points);

  struct Result {
    std::size_t index = 0;
    std::int64_t dist2 = 0;
  };

  std::optional<Result> nearest(const State& query) const;

  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }
  const std::vector<State>& points() const { return points_; }

 private:
  struct Node {
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t axis = 0;
    std::uint32_t point = 0;
  };

  std::int32_t build(std::vector<std::uint32_t>& idx, std::size_t begin, std::size_t end, int axis);
  void search(std::int32_t node, const State& q, Result& best, bool& has_best) const;

  std::vector<State> points_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
  int dims_ = 0;
};

// reference implementation with the same tie rule
std::optional<KdTree::Result> nearest_linear_scan(const std::vector<State>& points, const State& query);

std::int64_t squared_distance(const State& a, const State& b);

}  // namespace jumpctrl
