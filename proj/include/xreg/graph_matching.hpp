#ifndef XREG_GRAPH_MATCHING_HPP_
#define XREG_GRAPH_MATCHING_HPP_

// Graph matching by convex-concave path following with Frank-Wolfe steps and
// a rigidity (distance-preservation) term that refines each search direction.
//
// The affinity K of the quadratic score x'Kx is never materialized. For
// x = vec(X), entry K[(i1,i2),(j1,j2)] is Kp(i1,i2) on the diagonal and
// Kq(c1,c2) when edge c1 runs j1->i1 in the first graph and edge c2 runs
// j2->i2 in the second; everything else is zero.

#include "xreg/affinity.hpp"
#include "xreg/assignment.hpp"
#include "xreg/structure.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace xreg {

struct MatchingProblem {
  Eigen::MatrixXd kp;  // n1 x n2
  Eigen::MatrixXd kq;  // m1 x m2
  std::vector<GraphEdge> edges1, edges2;
  std::vector<std::vector<std::size_t>> successors1, predecessors1;
  std::vector<std::vector<double>> successor_len1, predecessor_len1;  // matching edge lengths in nodes1 units
  // Node positions in units of the owning cloud's radius.
  std::vector<Point3> nodes1, nodes2;
  Eigen::MatrixXd node_dist2;  // n2 x n2 pairwise distances of nodes2
  // Spectral bounds of the symmetrized K: mu_min <= lambda_min, mu_max >= lambda_max.
  double mu_min = 0.0;
  double mu_max = 0.0;

  Eigen::Index n1() const { return kp.rows(); }
  Eigen::Index n2() const { return kp.cols(); }
};

/// Gershgorin interval of (K + K')/2 computed from the factors.
inline void gershgorin_bounds(MatchingProblem& p) {
  Eigen::MatrixXd into = Eigen::MatrixXd::Zero(p.n1(), p.n2());
  Eigen::MatrixXd out_of = Eigen::MatrixXd::Zero(p.n1(), p.n2());
  for (std::size_t b = 0; b < p.edges2.size(); ++b) {
    for (std::size_t a = 0; a < p.edges1.size(); ++a) {
      const double v = std::abs(p.kq(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
      into(p.edges1[a].to, p.edges2[b].to) += v;
      out_of(p.edges1[a].from, p.edges2[b].from) += v;
    }
  }
  const Eigen::MatrixXd radius = 0.5 * (into + out_of);
  p.mu_max = (p.kp + radius).maxCoeff();
  p.mu_min = (p.kp - radius).minCoeff();
}

inline MatchingProblem make_problem(const StructureGraph& g1, const StructureGraph& g2, const AffinityPair& aff) {
  if (aff.node.rows() != static_cast<Eigen::Index>(g1.node_count()) ||
      aff.node.cols() != static_cast<Eigen::Index>(g2.node_count()) ||
      aff.edge.rows() != static_cast<Eigen::Index>(g1.edge_count()) ||
      aff.edge.cols() != static_cast<Eigen::Index>(g2.edge_count())) {
    throw Error("graph-matching", "affinity dimensions do not match the graphs");
  }
  MatchingProblem p;
  p.kp = aff.node;
  p.kq = aff.edge;
  p.edges1 = g1.edges;
  p.edges2 = g2.edges;
  p.successors1.assign(g1.node_count(), {});
  p.predecessors1.assign(g1.node_count(), {});
  for (const auto& e : g1.edges) {
    p.successors1[e.from].push_back(e.to);
    p.predecessors1[e.to].push_back(e.from);
  }
  for (const auto& c : g1.centroids) p.nodes1.push_back(c / g1.radius);
  p.successor_len1.assign(g1.node_count(), {});
  p.predecessor_len1.assign(g1.node_count(), {});
  for (std::size_t i = 0; i < g1.node_count(); ++i) {
    for (std::size_t j : p.successors1[i]) p.successor_len1[i].push_back((p.nodes1[i] - p.nodes1[j]).norm());
    for (std::size_t k : p.predecessors1[i]) p.predecessor_len1[i].push_back((p.nodes1[k] - p.nodes1[i]).norm());
  }
  for (const auto& c : g2.centroids) p.nodes2.push_back(c / g2.radius);
  p.node_dist2.resize(p.n2(), p.n2());
  for (Eigen::Index a = 0; a < p.n2(); ++a) {
    for (Eigen::Index b = 0; b < p.n2(); ++b) p.node_dist2(a, b) = (p.nodes2[a] - p.nodes2[b]).norm();
  }
  gershgorin_bounds(p);
  return p;
}

/// K x, reshaped to n1 x n2.
inline Eigen::MatrixXd apply_affinity(const MatchingProblem& p, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out = p.kp.cwiseProduct(x);
  for (std::size_t b = 0; b < p.edges2.size(); ++b) {
    const auto& e2 = p.edges2[b];
    for (std::size_t a = 0; a < p.edges1.size(); ++a) {
      const auto& e1 = p.edges1[a];
      out(e1.to, e2.to) += p.kq(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * x(e1.from, e2.from);
    }
  }
  return out;
}

/// (K + K')/2 x, reshaped to n1 x n2.
inline Eigen::MatrixXd apply_symmetric_affinity(const MatchingProblem& p, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out = p.kp.cwiseProduct(x);
  for (std::size_t b = 0; b < p.edges2.size(); ++b) {
    const auto& e2 = p.edges2[b];
    for (std::size_t a = 0; a < p.edges1.size(); ++a) {
      const auto& e1 = p.edges1[a];
      const double half = 0.5 * p.kq(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      out(e1.to, e2.to) += half * x(e1.from, e2.from);
      out(e1.from, e2.from) += half * x(e1.to, e2.to);
    }
  }
  return out;
}

/// Matching score x'Kx: node affinities of matched pairs plus the edge
/// affinities of every pair of edges whose endpoints are matched.
inline double score(const MatchingProblem& p, const Eigen::MatrixXd& x) {
  if (x.rows() != p.n1() || x.cols() != p.n2()) throw Error("graph-matching", "assignment dimensions do not match");
  double s = (p.kp.array() * x.array() * x.array()).sum();
  for (std::size_t b = 0; b < p.edges2.size(); ++b) {
    const auto& e2 = p.edges2[b];
    for (std::size_t a = 0; a < p.edges1.size(); ++a) {
      const auto& e1 = p.edges1[a];
      s += p.kq(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * x(e1.to, e2.to) * x(e1.from, e2.from);
    }
  }
  return s;
}

/// Rigidity penalty of a discrete mapping (always <= 0): the summed change of
/// length over every graph edge of G1 whose two ends are matched, divided by
/// n1 * n2.
inline double smooth_term(const MatchingProblem& p, const std::vector<int>& row_to_col) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.successors1.size(); ++i) {
    if (row_to_col[i] < 0) continue;
    for (std::size_t j : p.successors1[i]) {
      if (row_to_col[j] < 0) continue;
      const double d1 = (p.nodes1[i] - p.nodes1[j]).norm();
      const double d2 = p.node_dist2(row_to_col[i], row_to_col[j]);
      sum += std::abs(d1 - d2);
    }
  }
  return -sum / static_cast<double>(p.n1() * p.n2());
}

inline double smooth_term(const MatchingProblem& p, const Assignment& a) { return smooth_term(p, a.row_to_col); }

/// Shift used by the blended objective: J_alpha(x) = x'Kx - shift(alpha) x'x.
/// alpha = 0 gives the concave relaxation (unique maximizer region), alpha = 1
/// the convex one (maximized at vertices).
inline double relaxation_shift(const MatchingProblem& p, double alpha) {
  return (1.0 - alpha) * p.mu_max + alpha * p.mu_min;
}

struct Relaxations {
  double concave = 0.0;  // x'Kx - mu_max x'x
  double convex = 0.0;   // x'Kx - mu_min x'x
};

inline Relaxations relaxations(const MatchingProblem& p, const Eigen::MatrixXd& x) {
  const double quad = score(p, x);
  const double sq = x.squaredNorm();
  return {quad - p.mu_max * sq, quad - p.mu_min * sq};
}

inline double blended_objective(const MatchingProblem& p, const Eigen::MatrixXd& x, double alpha) {
  return score(p, x) - relaxation_shift(p, alpha) * x.squaredNorm();
}

inline Eigen::MatrixXd blended_gradient(const MatchingProblem& p, const Eigen::MatrixXd& x, double alpha) {
  return 2.0 * apply_symmetric_affinity(p, x) - 2.0 * relaxation_shift(p, alpha) * x;
}

/// Gain of sending node i of G1 to node i2 of G2 while every other node keeps
/// its image under `mapping`; the negated rigidity penalty of the edges at i.
inline Eigen::MatrixXd smooth_gain(const MatchingProblem& p, const std::vector<int>& mapping) {
  Eigen::MatrixXd gain = Eigen::MatrixXd::Zero(p.n1(), p.n2());
  const double norm = static_cast<double>(p.n1() * p.n2());
  for (Eigen::Index i = 0; i < p.n1(); ++i) {
    const auto& succ = p.successors1[i];
    const auto& pred = p.predecessors1[i];
    for (Eigen::Index i2 = 0; i2 < p.n2(); ++i2) {
      double pen = 0.0;
      for (std::size_t s = 0; s < succ.size(); ++s) {
        const int m = mapping[succ[s]];
        if (m >= 0) pen += std::abs(p.successor_len1[i][s] - p.node_dist2(i2, m));
      }
      for (std::size_t s = 0; s < pred.size(); ++s) {
        const int m = mapping[pred[s]];
        if (m >= 0) pen += std::abs(p.predecessor_len1[i][s] - p.node_dist2(m, i2));
      }
      gain(i, i2) = -pen / norm;
    }
  }
  return gain;
}

struct Direction {
  Assignment initial;  // from the blended objective alone
  Assignment final;    // after adding the rigidity gain around `initial`
  Eigen::MatrixXd gradient;
};

namespace detail {

inline Direction direction_from_gradient(const MatchingProblem& p, Eigen::MatrixXd gradient, double smooth_weight) {
  Direction d;
  d.gradient = std::move(gradient);
  d.initial = solve_lap(d.gradient);
  if (smooth_weight == 0.0) {
    d.final = d.initial;
    return d;
  }
  d.final = solve_lap(d.gradient + smooth_weight * smooth_gain(p, d.initial.row_to_col));
  return d;
}

}  // namespace detail

inline Direction fw_direction(const MatchingProblem& p, const Eigen::MatrixXd& x, double alpha,
                              double smooth_weight) {
  return detail::direction_from_gradient(p, blended_gradient(p, x, alpha), smooth_weight);
}

struct Step {
  Eigen::MatrixXd x;
  double lambda = 0.0;
  double objective = 0.0;  // J_alpha at the new point
  Eigen::MatrixXd kx;      // symmetric affinity applied to x
};

namespace detail {

// Line search given kx = (K + K')/2 x, so J_alpha(x) = <x, kx> - mu |x|^2.
inline Step line_search(const MatchingProblem& p, const Eigen::MatrixXd& x, const Eigen::MatrixXd& kx,
                        const Eigen::MatrixXd& y, double alpha) {
  const Eigen::MatrixXd dir = y - x;
  const double mu = relaxation_shift(p, alpha);
  const double f0 = x.cwiseProduct(kx).sum() - mu * x.squaredNorm();
  const Eigen::MatrixXd kd = apply_symmetric_affinity(p, dir);
  const double lin = 2.0 * ((kx - mu * x).cwiseProduct(dir)).sum();
  const double quad = kd.cwiseProduct(dir).sum() - mu * dir.squaredNorm();
  auto value = [&](double t) { return f0 + t * lin + t * t * quad; };

  double best_t = 0.0, best_v = f0;
  std::vector<double> candidates{1.0};
  if (quad < 0.0) candidates.push_back(std::clamp(-lin / (2.0 * quad), 0.0, 1.0));
  for (double t : candidates) {
    if (value(t) > best_v) {
      best_v = value(t);
      best_t = t;
    }
  }
  Step s;
  s.lambda = best_t;
  s.x = x;
  s.kx = kx;
  s.objective = f0;
  if (best_t > 0.0) {
    Eigen::MatrixXd nx = x + best_t * dir;
    Eigen::MatrixXd nkx = kx + best_t * kd;
    const double v = nx.cwiseProduct(nkx).sum() - mu * nx.squaredNorm();
    // Rounding can leave the new value a hair under f0; keep x then.
    if (v >= f0) {
      s.x = std::move(nx);
      s.kx = std::move(nkx);
      s.objective = v;
    } else {
      s.lambda = 0.0;
    }
  }
  return s;
}

}  // namespace detail

/// Exact line search of J_alpha on the segment x + lambda (y - x), lambda in [0, 1].
inline Step fw_step(const MatchingProblem& p, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double alpha) {
  return detail::line_search(p, x, apply_symmetric_affinity(p, x), y, alpha);
}

struct MatchConfig {
  double smooth_weight = 1.0;
  double alpha_step = 0.01;
  int max_inner_iterations = 100;
  double gap_tolerance = 1e-8;
};

struct AlphaTrace {
  double alpha = 0.0;
  int iterations = 0;
  std::vector<double> objective;  // J_alpha after each accepted step, starting value first
  double candidate_score = 0.0;   // score + weighted rigidity of this alpha's discretization
};

struct PathFollowingState {
  Eigen::MatrixXd x;  // relaxed assignment at the end of the path
  double alpha = 0.0;
  std::vector<AlphaTrace> trace;
};

struct MatchResult {
  Assignment assignment;
  double score = 0.0;   // x'Kx of the discrete result
  double smooth = 0.0;  // rigidity term of the discrete result
  PathFollowingState state;
};

/// Value of the enhanced objective on a discrete assignment.
inline double enhanced_score(const MatchingProblem& p, const Assignment& a, double smooth_weight) {
  const double s = score(p, a.matrix(p.n2()));
  return smooth_weight == 0.0 ? s : s + smooth_weight * smooth_term(p, a);
}

inline MatchResult match(const MatchingProblem& p, const MatchConfig& config = {}) {
  if (p.n1() < 1 || p.n2() < 1) throw Error("graph-matching", "empty graph");
  const double uniform = 1.0 / static_cast<double>(std::max(p.n1(), p.n2()));
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(p.n1(), p.n2(), uniform);

  MatchResult result;
  double best = -std::numeric_limits<double>::infinity();
  // Every vertex the path visits is a temporary solution; the best one on
  // the enhanced objective is kept.
  auto consider = [&](const Assignment& a) {
    const double v = enhanced_score(p, a, config.smooth_weight);
    if (v > best) {
      best = v;
      result.assignment = a;
    }
    return v;
  };
  const int steps = static_cast<int>(std::lround(1.0 / config.alpha_step));
  for (int k = 0; k <= steps; ++k) {
    const double alpha = std::min(1.0, k * config.alpha_step);
    AlphaTrace tr;
    tr.alpha = alpha;
    const double mu = relaxation_shift(p, alpha);
    Eigen::MatrixXd kx = apply_symmetric_affinity(p, x);
    tr.objective.push_back(x.cwiseProduct(kx).sum() - mu * x.squaredNorm());
    for (int it = 0; it < config.max_inner_iterations; ++it) {
      const Direction d = detail::direction_from_gradient(p, 2.0 * (kx - mu * x), config.smooth_weight);
      const Eigen::MatrixXd y0 = d.initial.matrix(p.n2());
      const double gap = d.gradient.cwiseProduct(y0 - x).sum();
      if (gap < config.gap_tolerance) break;
      consider(d.initial);
      if (d.final.row_to_col != d.initial.row_to_col) consider(d.final);
      Step s = detail::line_search(p, x, kx, d.final.matrix(p.n2()), alpha);
      if (s.lambda == 0.0 && d.final.row_to_col != d.initial.row_to_col) {
        // The rigidity-adjusted vertex does not ascend; take the plain step.
        s = detail::line_search(p, x, kx, y0, alpha);
      }
      ++tr.iterations;
      if (s.lambda == 0.0) break;
      x = std::move(s.x);
      kx = std::move(s.kx);
      tr.objective.push_back(s.objective);
    }
    tr.candidate_score = consider(discretize(x));
    result.state.trace.push_back(std::move(tr));
    result.state.alpha = alpha;
  }
  result.state.x = x;
  result.score = score(p, result.assignment.matrix(p.n2()));
  result.smooth = smooth_term(p, result.assignment);
  return result;
}

inline MatchResult match(const StructureGraph& g1, const StructureGraph& g2, const MatchConfig& config = {},
                         AffinityMode mode = AffinityMode::kSimilarity) {
  if (g1.node_count() < 3 || g2.node_count() < 3 || g1.edge_count() < 1 || g2.edge_count() < 1) {
    throw Error("graph-matching", "degenerate graph (need >= 3 nodes and >= 1 edge)");
  }
  return match(make_problem(g1, g2, compute_affinities(g1, g2, mode)), config);
}

}  // namespace xreg

#endif  // XREG_GRAPH_MATCHING_HPP_
