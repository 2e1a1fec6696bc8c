#ifndef XREG_SUPERVOXEL_HPP_
#define XREG_SUPERVOXEL_HPP_

// Geometry-only supervoxel clustering: grid seeding, boundary-respecting
// breadth-first growth over a k-NN graph, and centroid re-seeding.

#include "xreg/geometry.hpp"
#include "xreg/spatial_index.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>
#include <vector>

namespace xreg {

struct SupervoxelParams {
  double spatial_weight = 1.0;
  double normal_weight = 4.0;
  std::size_t connectivity_k = 8;
  std::size_t normal_k = 15;
  int refine_iterations = 5;
  // Clusters smaller than this are merged into a neighbor; the shape
  // descriptor needs at least three points.
  std::size_t min_size = 3;
};

struct SuperVoxel {
  std::vector<std::size_t> member_indices;
  Point3 centroid = Point3::Zero();
  std::size_t seed_index = 0;
};

/// Unit normals from a plane fit over the k nearest neighbors (self included).
inline std::vector<Point3> estimate_normals(const PointCloud& cloud, const SpatialIndex& index, std::size_t k) {
  std::vector<Point3> normals(cloud.size(), Point3::UnitZ());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto nn = index.knn(cloud.points[i], k);
    Point3 mean = Point3::Zero();
    for (const auto& n : nn) mean += cloud.points[n.index];
    mean /= static_cast<double>(nn.size());
    Matrix3 cov = Matrix3::Zero();
    for (const auto& n : nn) {
      const Point3 d = cloud.points[n.index] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Matrix3> eig(cov);
    normals[i] = eig.eigenvectors().col(0).normalized();
  }
  return normals;
}

/// Symmetrized k-NN adjacency lists (self excluded), each sorted ascending.
inline std::vector<std::vector<std::size_t>> knn_graph(const PointCloud& cloud, const SpatialIndex& index,
                                                       std::size_t k, bool symmetric) {
  std::vector<std::vector<std::size_t>> adj(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (const auto& n : index.knn(cloud.points[i], k + 1)) {
      if (n.index == i) continue;
      if (adj[i].size() == k) break;
      adj[i].push_back(n.index);
    }
  }
  if (symmetric) {
    auto sym = adj;
    for (std::size_t i = 0; i < adj.size(); ++i) {
      for (std::size_t j : adj[i]) sym[j].push_back(i);
    }
    adj = std::move(sym);
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return adj;
}

namespace detail {

struct Seed {
  std::size_t point;  // cloud index the growth starts from
  Point3 position;
  Point3 normal;
};

// Layered breadth-first growth. In every layer each unclaimed point touched
// by a frontier goes to the touching seed with the smallest distance measure.
inline std::vector<int> grow_clusters(const PointCloud& cloud, const std::vector<Point3>& normals,
                                      const std::vector<std::vector<std::size_t>>& adj,
                                      const std::vector<Seed>& seeds, double voxel_radius,
                                      const SupervoxelParams& params) {
  std::vector<int> owner(cloud.size(), -1);
  std::vector<std::size_t> frontier;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    if (owner[seeds[s].point] < 0) {
      owner[seeds[s].point] = static_cast<int>(s);
      frontier.push_back(seeds[s].point);
    }
  }
  auto measure = [&](std::size_t i, std::size_t s) {
    const double spatial = (cloud.points[i] - seeds[s].position).norm() / voxel_radius;
    const double normal = 1.0 - std::abs(normals[i].dot(seeds[s].normal));
    return params.spatial_weight * spatial + params.normal_weight * normal;
  };

  std::vector<double> cand_d(cloud.size(), std::numeric_limits<double>::infinity());
  std::vector<int> cand_s(cloud.size(), -1);
  std::vector<std::size_t> touched;
  while (!frontier.empty()) {
    touched.clear();
    for (std::size_t p : frontier) {
      const auto s = static_cast<std::size_t>(owner[p]);
      for (std::size_t q : adj[p]) {
        if (owner[q] >= 0) continue;
        const double d = measure(q, s);
        if (cand_s[q] < 0) touched.push_back(q);
        if (d < cand_d[q] || (d == cand_d[q] && static_cast<int>(s) < cand_s[q])) {
          cand_d[q] = d;
          cand_s[q] = static_cast<int>(s);
        }
      }
    }
    std::sort(touched.begin(), touched.end());
    for (std::size_t q : touched) {
      owner[q] = cand_s[q];
      cand_s[q] = -1;
      cand_d[q] = std::numeric_limits<double>::infinity();
    }
    frontier.swap(touched);
  }
  return owner;
}

}  // namespace detail

/// Partitions the cloud into supervoxels. Nodes are ordered by the world grid
/// cell of their seed, then by seeds created for otherwise unreachable
/// components, so the output is deterministic.
inline std::vector<SuperVoxel> segment_supervoxels(const PointCloud& cloud, double voxel_radius,
                                                   const SupervoxelParams& params = {}) {
  if (cloud.size() < 10) {
    throw Error("structure-extraction", "cloud '" + cloud.id + "' has fewer than 10 points; normals cannot be estimated");
  }
  if (!(voxel_radius > 0.0)) throw Error("structure-extraction", "voxel radius must be positive");

  const SpatialIndex index(cloud);
  const auto normals = estimate_normals(cloud, index, params.normal_k);
  const auto adj = knn_graph(cloud, index, params.connectivity_k, /*symmetric=*/true);

  // Seeds: centers of a world-anchored grid of spacing 2r, snapped to the
  // nearest point and kept only when that point lies within r.
  const double spacing = 2.0 * voxel_radius;
  using Cell = std::tuple<std::int64_t, std::int64_t, std::int64_t>;
  std::map<Cell, bool> cells;
  for (const auto& p : cloud.points) {
    const Point3 g = (p / spacing).array().floor();
    cells.emplace(Cell{static_cast<std::int64_t>(g.x()), static_cast<std::int64_t>(g.y()),
                       static_cast<std::int64_t>(g.z())},
                  true);
  }
  std::vector<detail::Seed> seeds;
  std::vector<char> is_seed(cloud.size(), 0);
  for (const auto& [cell, unused] : cells) {
    const auto& [cx, cy, cz] = cell;
    const Point3 center = (Point3(static_cast<double>(cx), static_cast<double>(cy), static_cast<double>(cz)) +
                           Point3::Constant(0.5)) * spacing;
    const Neighbor nn = index.nearest(center);
    if (nn.distance > voxel_radius || is_seed[nn.index]) continue;
    is_seed[nn.index] = 1;
    seeds.push_back({nn.index, cloud.points[nn.index], normals[nn.index]});
  }

  auto grow_all = [&]() {
    auto owner = detail::grow_clusters(cloud, normals, adj, seeds, voxel_radius, params);
    // Components no seed can reach get their own seed at the lowest free index.
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (owner[i] >= 0) continue;
      seeds.push_back({i, cloud.points[i], normals[i]});
      owner = detail::grow_clusters(cloud, normals, adj, seeds, voxel_radius, params);
    }
    return owner;
  };

  std::vector<int> owner = grow_all();
  for (int it = 0; it < params.refine_iterations; ++it) {
    std::vector<Point3> sum(seeds.size(), Point3::Zero());
    std::vector<std::size_t> count(seeds.size(), 0);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      sum[owner[i]] += cloud.points[i];
      ++count[owner[i]];
    }
    std::vector<detail::Seed> next;
    next.reserve(seeds.size());
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      if (count[s] == 0) continue;
      const Point3 c = sum[s] / static_cast<double>(count[s]);
      // Re-seed at the member nearest to the centroid.
      std::size_t best = seeds[s].point;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (owner[i] != static_cast<int>(s)) continue;
        const double d = (cloud.points[i] - c).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      next.push_back({best, c, normals[best]});
    }
    seeds = std::move(next);
    owner = grow_all();
  }

  std::vector<std::vector<std::size_t>> members(seeds.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) members[owner[i]].push_back(i);

  // Fold undersized clusters into the neighboring cluster with the nearest
  // centroid (or the nearest cluster overall when isolated).
  auto cluster_centroid = [&](const std::vector<std::size_t>& m) {
    Point3 c = Point3::Zero();
    for (std::size_t i : m) c += cloud.points[i];
    return Point3(c / static_cast<double>(m.size()));
  };
  for (std::size_t s = 0; s < members.size(); ++s) {
    if (members[s].empty() || members[s].size() >= params.min_size) continue;
    const Point3 c = cluster_centroid(members[s]);
    std::vector<std::size_t> candidates;
    for (std::size_t i : members[s]) {
      for (std::size_t j : adj[i]) {
        if (owner[j] != static_cast<int>(s) && !members[owner[j]].empty()) candidates.push_back(owner[j]);
      }
    }
    if (candidates.empty()) {
      for (std::size_t t = 0; t < members.size(); ++t) {
        if (t != s && !members[t].empty()) candidates.push_back(t);
      }
    }
    if (candidates.empty()) break;  // a single undersized cluster is all there is
    std::sort(candidates.begin(), candidates.end());
    std::size_t target = candidates.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t t : candidates) {
      const double d = (cluster_centroid(members[t]) - c).squaredNorm();
      if (d < best_d) {
        best_d = d;
        target = t;
      }
    }
    for (std::size_t i : members[s]) owner[i] = static_cast<int>(target);
    members[target].insert(members[target].end(), members[s].begin(), members[s].end());
    std::sort(members[target].begin(), members[target].end());
    members[s].clear();
  }

  std::vector<SuperVoxel> out;
  for (std::size_t s = 0; s < members.size(); ++s) {
    if (members[s].empty()) continue;
    SuperVoxel v;
    v.member_indices = std::move(members[s]);
    v.centroid = cluster_centroid(v.member_indices);
    v.seed_index = seeds[s].point;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace xreg

#endif  // XREG_SUPERVOXEL_HPP_
