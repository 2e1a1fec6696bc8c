#ifndef XREG_STRUCTURE_HPP_
#define XREG_STRUCTURE_HPP_

// Macro/micro structure of a cloud: supervoxel centroids with shape
// descriptors (nodes) joined by directed adjacency edges.

#include "xreg/edge_descriptor.hpp"
#include "xreg/esf.hpp"
#include "xreg/geometry.hpp"
#include "xreg/spatial_index.hpp"
#include "xreg/supervoxel.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

namespace xreg {

struct GraphEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  bool operator==(const GraphEdge&) const = default;
  auto operator<=>(const GraphEdge&) const = default;
};

struct StructureGraph {
  std::vector<Point3> centroids;
  std::vector<EsfDescriptor> descriptors;
  std::vector<GraphEdge> edges;  // sorted, no self-loops, no duplicates
  std::vector<EdgeDescriptor> edge_descriptors;
  std::vector<SuperVoxel> voxels;  // provenance of each node; may be empty for hand-built graphs
  double radius = 1.0;             // radius of the source cloud, the unit for lengths
  double voxel_radius = 0.0;

  std::size_t node_count() const noexcept { return centroids.size(); }
  std::size_t edge_count() const noexcept { return edges.size(); }

  /// Node-edge incidence: G(i, c) = 1 when edge c leaves node i.
  Eigen::MatrixXd tail_incidence() const {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(node_count(), edge_count());
    for (std::size_t c = 0; c < edges.size(); ++c) g(edges[c].from, c) = 1.0;
    return g;
  }
  /// H(j, c) = 1 when edge c enters node j.
  Eigen::MatrixXd head_incidence() const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(node_count(), edge_count());
    for (std::size_t c = 0; c < edges.size(); ++c) h(edges[c].to, c) = 1.0;
    return h;
  }

  /// Recomputes every edge descriptor from the centroids.
  void refresh_edge_descriptors() {
    edge_descriptors.clear();
    edge_descriptors.reserve(edges.size());
    for (const auto& e : edges) edge_descriptors.push_back(edge_descriptor(centroids[e.from], centroids[e.to]));
  }

  /// Out-neighbors of every node, ascending.
  std::vector<std::vector<std::size_t>> successors() const {
    std::vector<std::vector<std::size_t>> out(node_count());
    for (const auto& e : edges) out[e.from].push_back(e.to);
    return out;
  }
};

/// Normalizes and sorts an edge list, dropping self-loops and duplicates.
inline std::vector<GraphEdge> canonical_edges(std::vector<GraphEdge> edges) {
  std::erase_if(edges, [](const GraphEdge& e) { return e.from == e.to; });
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

/// Directed edge i->j when some member of voxel i has a member of voxel j
/// among its k nearest neighbors. No symmetrization is applied.
inline StructureGraph build_adjacency(const PointCloud& cloud, const std::vector<SuperVoxel>& voxels,
                                      std::size_t k = 8) {
  std::vector<int> owner(cloud.size(), -1);
  for (std::size_t v = 0; v < voxels.size(); ++v) {
    for (std::size_t i : voxels[v].member_indices) {
      if (i >= cloud.size() || owner[i] >= 0) {
        throw Error("structure-extraction", "supervoxels do not form a partition of the cloud");
      }
      owner[i] = static_cast<int>(v);
    }
  }
  if (std::find(owner.begin(), owner.end(), -1) != owner.end()) {
    throw Error("structure-extraction", "supervoxels do not cover the cloud");
  }

  StructureGraph g;
  g.voxels = voxels;
  for (const auto& v : voxels) g.centroids.push_back(v.centroid);
  const SpatialIndex index(cloud);
  const auto adj = knn_graph(cloud, index, k, /*symmetric=*/false);
  std::vector<GraphEdge> edges;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t j : adj[i]) {
      if (owner[i] != owner[j]) {
        edges.push_back({static_cast<std::size_t>(owner[i]), static_cast<std::size_t>(owner[j])});
      }
    }
  }
  g.edges = canonical_edges(std::move(edges));
  return g;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline EsfDescriptor compute_esf(const PointCloud& cloud, const SuperVoxel& voxel, std::uint64_t rng_seed,
                                 const EsfParams& params = {}) {
  std::vector<Point3> pts;
  pts.reserve(voxel.member_indices.size());
  for (std::size_t i : voxel.member_indices) pts.push_back(cloud.points.at(i));
  return compute_esf(std::span<const Point3>(pts), rng_seed, params);
}

struct StructureParams {
  double voxel_radius_fraction = 0.01;
  SupervoxelParams supervoxel;
  EsfParams esf;
  std::size_t adjacency_k = 8;
};

inline StructureGraph extract_structure(const PointCloud& cloud, std::uint64_t rng_seed,
                                        const StructureParams& params = {}) {
  if (cloud.size() < 10) {
    throw Error("structure-extraction", "cloud '" + cloud.id + "' needs at least 10 points");
  }
  const double radius = cloud_radius(cloud);
  const double voxel_radius = params.voxel_radius_fraction * radius;
  auto voxels = segment_supervoxels(cloud, voxel_radius, params.supervoxel);
  StructureGraph g = build_adjacency(cloud, voxels, params.adjacency_k);
  g.radius = radius;
  g.voxel_radius = voxel_radius;
  g.descriptors.reserve(g.voxels.size());
  for (std::size_t v = 0; v < g.voxels.size(); ++v) {
    g.descriptors.push_back(compute_esf(cloud, g.voxels[v], mix_seed(rng_seed, v), params.esf));
  }
  g.refresh_edge_descriptors();
  return g;
}

}  // namespace xreg

#endif  // XREG_STRUCTURE_HPP_
