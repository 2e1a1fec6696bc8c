#ifndef XREG_TESTS_TEST_SUPPORT_HPP_
#define XREG_TESTS_TEST_SUPPORT_HPP_

// Oracles and fixtures shared by the unit and acceptance tests.

#include "xreg/xreg.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace xreg::fixtures {

inline Matrix3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline Point3 random_point(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

inline EsfDescriptor random_descriptor(std::mt19937_64& rng) {
  EsfDescriptor d;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& b : d.bins) b = u(rng);
  return d;
}

/// Random graph with distinct random descriptors and `edge_prob` chance for
/// each ordered pair to be an edge; every node gets at least one out-edge.
inline StructureGraph random_graph(std::size_t n, double edge_prob, std::mt19937_64& rng) {
  StructureGraph g;
  std::bernoulli_distribution coin(edge_prob);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    g.centroids.push_back(random_point(rng));
    g.descriptors.push_back(random_descriptor(rng));
  }
  std::vector<GraphEdge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && coin(rng)) edges.push_back({i, j});
    }
    std::size_t j = pick(rng);
    while (j == i) j = pick(rng);
    edges.push_back({i, j});
  }
  g.edges = canonical_edges(edges);
  g.radius = 1.0;
  g.voxel_radius = 0.1;
  g.refresh_edge_descriptors();
  return g;
}

/// Copy of g with nodes relabelled: node i of g becomes node perm[i].
inline StructureGraph permute_graph(const StructureGraph& g, const std::vector<std::size_t>& perm) {
  StructureGraph out = g;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    out.centroids[perm[i]] = g.centroids[i];
    out.descriptors[perm[i]] = g.descriptors[i];
  }
  std::vector<GraphEdge> edges;
  for (const auto& e : g.edges) edges.push_back({perm[e.from], perm[e.to]});
  out.edges = canonical_edges(edges);
  out.refresh_edge_descriptors();
  return out;
}

/// Applies a similarity to every centroid.
inline StructureGraph move_graph(const StructureGraph& g, const SimilarityTransform& t) {
  StructureGraph out = g;
  for (auto& c : out.centroids) c = t(c);
  out.radius = g.radius * t.scale;
  out.refresh_edge_descriptors();
  return out;
}

/// Dense affinity over vec(X) (column-major, index i1 + n1 * i2) built from
/// the node-edge incidence matrices:
///   K = diag(vec Kp) + kron(H2, H1) diag(vec Kq) kron(G2, G1)'.
inline Eigen::MatrixXd dense_affinity(const StructureGraph& g1, const StructureGraph& g2, const AffinityPair& aff) {
  const Eigen::MatrixXd g = Eigen::kroneckerProduct(g2.tail_incidence(), g1.tail_incidence()).eval();
  const Eigen::MatrixXd h = Eigen::kroneckerProduct(g2.head_incidence(), g1.head_incidence()).eval();
  const Eigen::VectorXd kq = Eigen::Map<const Eigen::VectorXd>(aff.edge.data(), aff.edge.size());
  const Eigen::VectorXd kp = Eigen::Map<const Eigen::VectorXd>(aff.node.data(), aff.node.size());
  Eigen::MatrixXd k = h * kq.asDiagonal() * g.transpose();
  k.diagonal() += kp;
  return k;
}

inline Eigen::VectorXd vec(const Eigen::MatrixXd& x) { return Eigen::Map<const Eigen::VectorXd>(x.data(), x.size()); }

/// Visits every partial permutation that matches min(rows, cols) pairs.
inline void for_each_assignment(int rows, int cols, const std::function<void(const std::vector<int>&)>& visit) {
  const bool transpose = rows > cols;
  const int small = transpose ? cols : rows;
  const int large = transpose ? rows : cols;
  std::vector<int> cols_of(large);
  std::iota(cols_of.begin(), cols_of.end(), 0);
  std::vector<int> row_to_col(rows);
  // Injective maps small -> large are the distinct length-`small` prefixes
  // of the permutations of the large side; lexicographic order makes
  // repeats consecutive.
  std::vector<int> last;
  do {
    std::vector<int> prefix(cols_of.begin(), cols_of.begin() + small);
    if (prefix == last) continue;
    last = prefix;
    std::fill(row_to_col.begin(), row_to_col.end(), -1);
    for (int k = 0; k < small; ++k) {
      if (transpose) {
        row_to_col[prefix[k]] = k;
      } else {
        row_to_col[k] = prefix[k];
      }
    }
    visit(row_to_col);
  } while (std::next_permutation(cols_of.begin(), cols_of.end()));
}

inline double brute_force_lap(const Eigen::MatrixXd& profit) {
  double best = -std::numeric_limits<double>::infinity();
  for_each_assignment(static_cast<int>(profit.rows()), static_cast<int>(profit.cols()), [&](const std::vector<int>& a) {
    double v = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] >= 0) v += profit(static_cast<Eigen::Index>(i), a[i]);
    }
    best = std::max(best, v);
  });
  return best;
}

inline Eigen::MatrixXd assignment_matrix(const std::vector<int>& a, Eigen::Index cols) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.size()), cols);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] >= 0) x(static_cast<Eigen::Index>(i), a[i]) = 1.0;
  }
  return x;
}

/// Best x'Kx over all partial permutations, by enumeration.
inline double brute_force_match(const MatchingProblem& p) {
  double best = -std::numeric_limits<double>::infinity();
  for_each_assignment(static_cast<int>(p.n1()), static_cast<int>(p.n2()), [&](const std::vector<int>& a) {
    best = std::max(best, score(p, assignment_matrix(a, p.n2())));
  });
  return best;
}

inline double golden_section_max(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-10) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  while (b - a > tol) {
    if (f(c) > f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - r * (b - a);
    d = a + r * (b - a);
  }
  return 0.5 * (a + b);
}

/// Points sampled on a closed asymmetric surface (fixed procedural mesh).
inline PointCloud sample_blob(std::size_t target = 3000) {
  return downsample_uniform(upsample_mesh(make_procedural_mesh("blob")), target);
}

}  // namespace xreg::fixtures

#endif  // XREG_TESTS_TEST_SUPPORT_HPP_
