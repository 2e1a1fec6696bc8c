#ifndef XREG_SPATIAL_INDEX_HPP_
#define XREG_SPATIAL_INDEX_HPP_

#include "xreg/geometry.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <span>
#include <utility>
#include <vector>

namespace xreg {

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
};

/// Exact kd-tree over a fixed point set. Queries are const and may run
/// concurrently. Among equidistant candidates the lowest point index wins.
class SpatialIndex {
 public:
  SpatialIndex() = default;

  explicit SpatialIndex(std::span<const Point3> points) : points_(points.begin(), points.end()) {
    order_.resize(points_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<std::uint32_t>(i);
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    if (!points_.empty()) build(0, order_.size());
  }

  explicit SpatialIndex(const PointCloud& cloud) : SpatialIndex(std::span<const Point3>(cloud.points)) {}

  std::size_t size() const noexcept { return points_.size(); }
  const Point3& point(std::size_t i) const { return points_[i]; }

  Neighbor nearest(const Point3& query) const {
    if (points_.empty()) throw Error("spatial-index", "nearest-neighbor query on an empty index");
    Best best{std::numeric_limits<double>::infinity(), std::numeric_limits<std::size_t>::max()};
    nearest_rec(0, query, best);
    return {best.index, std::sqrt(best.d2)};
  }

  /// k nearest neighbors sorted by (distance, index). Returns fewer when the
  /// index holds fewer than k points.
  std::vector<Neighbor> knn(const Point3& query, std::size_t k) const {
    std::vector<Neighbor> out;
    if (points_.empty() || k == 0) return out;
    Heap heap;
    knn_rec(0, query, k, heap);
    std::vector<Best> found;
    found.reserve(heap.size());
    while (!heap.empty()) {
      found.push_back(heap.top());
      heap.pop();
    }
    std::reverse(found.begin(), found.end());
    out.reserve(found.size());
    for (const auto& b : found) out.push_back({b.index, std::sqrt(b.d2)});
    return out;
  }

  /// All points within `radius` (inclusive), sorted by (distance, index).
  std::vector<Neighbor> radius_search(const Point3& query, double radius) const {
    std::vector<Best> found;
    if (!points_.empty()) radius_rec(0, query, radius * radius, found);
    std::sort(found.begin(), found.end());
    std::vector<Neighbor> out;
    out.reserve(found.size());
    for (const auto& b : found) out.push_back({b.index, std::sqrt(b.d2)});
    return out;
  }

 private:
  static constexpr std::size_t kLeafSize = 8;

  struct Node {
    std::size_t begin = 0, end = 0;
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
    std::size_t left = 0, right = 0;
    Point3 lo, hi;
  };

  struct Best {
    double d2;
    std::size_t index;
    bool operator<(const Best& o) const { return d2 < o.d2 || (d2 == o.d2 && index < o.index); }
  };
  using Heap = std::priority_queue<Best>;  // max-heap on (d2, index)

  std::size_t build(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.emplace_back();
    Node node;
    node.begin = begin;
    node.end = end;
    node.lo = node.hi = points_[order_[begin]];
    for (std::size_t i = begin; i < end; ++i) {
      node.lo = node.lo.cwiseMin(points_[order_[i]]);
      node.hi = node.hi.cwiseMax(points_[order_[i]]);
    }
    if (end - begin > kLeafSize) {
      int axis = 0;
      (node.hi - node.lo).maxCoeff(&axis);
      const std::size_t mid = begin + (end - begin) / 2;
      std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                       [&](std::uint32_t a, std::uint32_t b) {
                         const double pa = points_[a][axis], pb = points_[b][axis];
                         return pa < pb || (pa == pb && a < b);
                       });
      node.axis = axis;
      node.split = points_[order_[mid]][axis];
      node.left = build(begin, mid);
      node.right = build(mid, end);
    }
    nodes_[id] = node;
    return id;
  }

  static double box_d2(const Node& n, const Point3& q) {
    const Point3 d = (n.lo - q).cwiseMax(Point3::Zero()).cwiseMax(q - n.hi);
    return d.squaredNorm();
  }

  void nearest_rec(std::size_t id, const Point3& q, Best& best) const {
    const Node& n = nodes_[id];
    if (n.axis < 0) {
      for (std::size_t i = n.begin; i < n.end; ++i) {
        const Best cand{(points_[order_[i]] - q).squaredNorm(), order_[i]};
        if (cand < best) best = cand;
      }
      return;
    }
    const bool go_left = q[n.axis] <= n.split;
    const std::size_t first = go_left ? n.left : n.right;
    const std::size_t second = go_left ? n.right : n.left;
    if (box_d2(nodes_[first], q) <= best.d2) nearest_rec(first, q, best);
    if (box_d2(nodes_[second], q) <= best.d2) nearest_rec(second, q, best);
  }

  void knn_rec(std::size_t id, const Point3& q, std::size_t k, Heap& heap) const {
    const Node& n = nodes_[id];
    if (n.axis < 0) {
      for (std::size_t i = n.begin; i < n.end; ++i) {
        const Best cand{(points_[order_[i]] - q).squaredNorm(), order_[i]};
        if (heap.size() < k) {
          heap.push(cand);
        } else if (cand < heap.top()) {
          heap.pop();
          heap.push(cand);
        }
      }
      return;
    }
    const bool go_left = q[n.axis] <= n.split;
    const std::size_t first = go_left ? n.left : n.right;
    const std::size_t second = go_left ? n.right : n.left;
    for (std::size_t child : {first, second}) {
      if (heap.size() < k || box_d2(nodes_[child], q) <= heap.top().d2) knn_rec(child, q, k, heap);
    }
  }

  void radius_rec(std::size_t id, const Point3& q, double r2, std::vector<Best>& out) const {
    const Node& n = nodes_[id];
    if (box_d2(n, q) > r2) return;
    if (n.axis < 0) {
      for (std::size_t i = n.begin; i < n.end; ++i) {
        const double d2 = (points_[order_[i]] - q).squaredNorm();
        if (d2 <= r2) out.push_back({d2, order_[i]});
      }
      return;
    }
    radius_rec(n.left, q, r2, out);
    radius_rec(n.right, q, r2, out);
  }

  std::vector<Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

inline Neighbor nearest_neighbor(const SpatialIndex& index, const Point3& query) {
  return index.nearest(query);
}

}  // namespace xreg

#endif  // XREG_SPATIAL_INDEX_HPP_
