#ifndef XREG_AFFINITY_HPP_
#define XREG_AFFINITY_HPP_

// Node and edge affinity matrices between two structure graphs.

#include "xreg/structure.hpp"

#include <Eigen/Core>

#include <fstream>
#include <iomanip>
#include <limits>
#include <string>

namespace xreg {

enum class AffinityMode {
  kSimilarity,    // 1 - normalized distance; larger is better
  kDistance,  // the normalized distance itself
};

inline AffinityMode parse_affinity_mode(const std::string& s) {
  if (s == "similarity") return AffinityMode::kSimilarity;
  if (s == "distance") return AffinityMode::kDistance;
  throw Error("config", "unknown affinity mode '" + s + "' (expected similarity or distance)");
}

inline std::string to_string(AffinityMode m) {
  return m == AffinityMode::kSimilarity ? "similarity" : "distance";
}

struct AffinityPair {
  Eigen::MatrixXd node;  // n1 x n2
  Eigen::MatrixXd edge;  // m1 x m2
};

/// Divides by the global maximum and, in similarity mode, flips to 1 - D.
inline Eigen::MatrixXd distance_to_affinity(const Eigen::MatrixXd& dist, AffinityMode mode) {
  const double max = dist.size() ? dist.maxCoeff() : 0.0;
  if (!(max > 0.0)) {
    return mode == AffinityMode::kSimilarity ? Eigen::MatrixXd::Ones(dist.rows(), dist.cols())
                                             : Eigen::MatrixXd::Zero(dist.rows(), dist.cols());
  }
  const Eigen::MatrixXd normalized = dist / max;
  if (mode == AffinityMode::kDistance) return normalized;
  return Eigen::MatrixXd::Ones(dist.rows(), dist.cols()) - normalized;
}

inline Eigen::MatrixXd node_affinity(const StructureGraph& g1, const StructureGraph& g2,
                                     AffinityMode mode = AffinityMode::kSimilarity) {
  if (g1.node_count() == 0 || g2.node_count() == 0) throw Error("graph-construction", "graph without nodes");
  Eigen::MatrixXd dist(g1.node_count(), g2.node_count());
  for (std::size_t i = 0; i < g1.node_count(); ++i) {
    for (std::size_t j = 0; j < g2.node_count(); ++j) dist(i, j) = g1.descriptors[i].distance(g2.descriptors[j]);
  }
  return distance_to_affinity(dist, mode);
}

/// Edge descriptor as a 4-vector with the length expressed in units of the
/// owning cloud's radius, so angles and length are commensurate.
inline Eigen::Vector4d edge_feature(const EdgeDescriptor& e, double radius) {
  return {e.x_angle, e.y_angle, e.z_angle, e.d / radius};
}

inline Eigen::MatrixXd edge_affinity(const StructureGraph& g1, const StructureGraph& g2,
                                     AffinityMode mode = AffinityMode::kSimilarity) {
  if (g1.edge_count() == 0 || g2.edge_count() == 0) {
    throw Error("graph-construction", "graph without edges (degenerate structure)");
  }
  std::vector<Eigen::Vector4d> f2;
  f2.reserve(g2.edge_count());
  for (const auto& e : g2.edge_descriptors) f2.push_back(edge_feature(e, g2.radius));
  Eigen::MatrixXd dist(g1.edge_count(), g2.edge_count());
  for (std::size_t a = 0; a < g1.edge_count(); ++a) {
    const Eigen::Vector4d f1 = edge_feature(g1.edge_descriptors[a], g1.radius);
    for (std::size_t b = 0; b < g2.edge_count(); ++b) dist(a, b) = (f1 - f2[b]).norm();
  }
  return distance_to_affinity(dist, mode);
}

inline AffinityPair compute_affinities(const StructureGraph& g1, const StructureGraph& g2,
                                       AffinityMode mode = AffinityMode::kSimilarity) {
  return {node_affinity(g1, g2, mode), edge_affinity(g1, g2, mode)};
}

inline void write_matrix_csv(const Eigen::MatrixXd& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot open " + path);
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << m(r, c);
    out << '\n';
  }
}

}  // namespace xreg

#endif  // XREG_AFFINITY_HPP_
