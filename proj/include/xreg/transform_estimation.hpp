#ifndef XREG_TRANSFORM_ESTIMATION_HPP_
#define XREG_TRANSFORM_ESTIMATION_HPP_

#include "xreg/geometry.hpp"
#include "xreg/spatial_index.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace xreg {

struct CorrespondenceSet {
  std::vector<Point3> source;
  std::vector<Point3> target;
  std::vector<bool> inlier_mask;  // empty means "use every pair"

  std::size_t size() const noexcept { return source.size(); }
  void add(const Point3& s, const Point3& t) {
    source.push_back(s);
    target.push_back(t);
  }
};

/// Least-squares transform taking source onto target (Kabsch; Umeyama when
/// with_scale). Throws on fewer than 3 pairs or a collinear source.
inline SimilarityTransform fit_rigid(const CorrespondenceSet& pairs, bool with_scale = false) {
  if (pairs.source.size() != pairs.target.size()) throw Error("transform-estimation", "mismatched correspondence lists");
  const bool masked = !pairs.inlier_mask.empty();
  std::size_t n = 0;
  Point3 cs = Point3::Zero(), ct = Point3::Zero();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (masked && !pairs.inlier_mask[i]) continue;
    cs += pairs.source[i];
    ct += pairs.target[i];
    ++n;
  }
  if (n < 3) throw Error("transform-estimation", "need at least 3 correspondences");
  cs /= static_cast<double>(n);
  ct /= static_cast<double>(n);

  Matrix3 cov = Matrix3::Zero();
  double var_s = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (masked && !pairs.inlier_mask[i]) continue;
    const Point3 a = pairs.source[i] - cs, b = pairs.target[i] - ct;
    cov += b * a.transpose();
    var_s += a.squaredNorm();
  }
  cov /= static_cast<double>(n);
  var_s /= static_cast<double>(n);

  // Collinearity: the source scatter must have rank >= 2.
  Matrix3 scatter = Matrix3::Zero();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (masked && !pairs.inlier_mask[i]) continue;
    const Point3 a = pairs.source[i] - cs;
    scatter += a * a.transpose();
  }
  Eigen::JacobiSVD<Matrix3> scatter_svd(scatter);
  const auto sv = scatter_svd.singularValues();
  if (!(sv(0) > 0.0) || sv(1) <= 1e-12 * sv(0)) {
    throw Error("transform-estimation", "degenerate (collinear or coincident) correspondences");
  }

  Eigen::JacobiSVD<Matrix3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix3 d = Matrix3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  SimilarityTransform t;
  t.rotation = svd.matrixU() * d * svd.matrixV().transpose();
  if (with_scale) t.scale = (svd.singularValues().asDiagonal() * d).trace() / var_s;
  t.translation = ct - t.scale * (t.rotation * cs);
  return t;
}

inline double residual(const SimilarityTransform& t, const Point3& s, const Point3& target) {
  return (t(s) - target).norm();
}

struct RansacResult {
  SimilarityTransform transform;
  std::vector<bool> inlier_mask;
  std::size_t inliers = 0;
  int iterations = 0;
};

/// Consensus-maximizing rigid fit over minimal 3-pair samples, refit on the
/// consensus set. Stops early once the p = 0.999 confidence bound is met.
inline RansacResult ransac_rigid(const CorrespondenceSet& pairs, double threshold, int max_iters = 2000,
                                 std::uint64_t rng_seed = 0) {
  const std::size_t n = pairs.size();
  if (n < 3) throw Error("transform-estimation", "RANSAC needs at least 3 correspondences");
  if (!(threshold > 0.0)) throw Error("transform-estimation", "RANSAC threshold must be positive");

  auto consensus = [&](const SimilarityTransform& t, std::vector<bool>& mask) {
    mask.assign(n, false);
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (residual(t, pairs.source[i], pairs.target[i]) < threshold) {
        mask[i] = true;
        ++count;
      }
    }
    return count;
  };

  std::mt19937_64 rng(rng_seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  RansacResult best;
  std::vector<bool> mask;
  long long needed = max_iters;
  int it = 0;
  for (; it < max_iters && it < needed; ++it) {
    CorrespondenceSet sample;
    std::size_t idx[3];
    idx[0] = pick(rng);
    do { idx[1] = pick(rng); } while (idx[1] == idx[0]);
    do { idx[2] = pick(rng); } while (idx[2] == idx[0] || idx[2] == idx[1]);
    for (std::size_t k : idx) sample.add(pairs.source[k], pairs.target[k]);
    SimilarityTransform model;
    try {
      model = fit_rigid(sample);
    } catch (const Error&) {
      continue;  // collinear sample
    }
    const std::size_t count = consensus(model, mask);
    if (count > best.inliers) {
      best.inliers = count;
      best.transform = model;
      best.inlier_mask = mask;
      const double w = static_cast<double>(count) / static_cast<double>(n);
      const double miss = 1.0 - w * w * w;
      if (miss <= 0.0) {
        needed = it + 1;
      } else {
        needed = static_cast<long long>(std::ceil(std::log(1.0 - 0.999) / std::log(miss)));
      }
    }
  }
  if (best.inliers < 3) throw Error("transform-estimation", "insufficient consensus");

  // Refit on the consensus set; keep the refit only if it does not shrink it.
  CorrespondenceSet inl = pairs;
  inl.inlier_mask = best.inlier_mask;
  try {
    const SimilarityTransform refit = fit_rigid(inl);
    const std::size_t count = consensus(refit, mask);
    if (count >= best.inliers) {
      best.transform = refit;
      best.inliers = count;
      best.inlier_mask = mask;
    }
  } catch (const Error&) {
    // Collinear consensus set: the minimal-sample model stands.
  }
  best.iterations = it;
  return best;
}

struct IcpResult {
  SimilarityTransform transform;
  int iterations = 0;
  double final_rmse = 0.0;
  bool converged = false;
  std::vector<double> rmse_trace;
};

struct IcpParams {
  int max_iters = 50;
  double tol = 1e-6;
  double reject_factor = 3.0;  // matches beyond factor * median distance are ignored
  bool estimate_scale = false;  // similarity instead of rigid refinement
};

/// Point-to-point ICP of source onto target starting from `init`.
///
/// Matches farther than reject_factor times the median match distance are
/// left out of each fit. The gate only ever shrinks, and the reported RMSE is
/// the truncated one, sqrt(mean(min(d, gate)^2)); under a shrinking gate each
/// fit-and-rematch round cannot raise it, so the trace is non-increasing.
inline IcpResult icp_refine(const PointCloud& source, const PointCloud& target, const SimilarityTransform& init,
                            const IcpParams& params = {}) {
  if (source.empty() || target.empty()) throw Error("icp", "empty cloud");
  const SpatialIndex index(target);
  const std::size_t n = source.size();

  std::vector<double> dist(n);
  std::vector<std::size_t> match(n);
  auto rematch = [&](const SimilarityTransform& t) {
    for (std::size_t i = 0; i < n; ++i) {
      const Neighbor nn = index.nearest(t(source.points[i]));
      dist[i] = nn.distance;
      match[i] = nn.index;
    }
  };
  auto median_gate = [&] {
    std::vector<double> sorted = dist;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n / 2), sorted.end());
    return params.reject_factor * sorted[n / 2];
  };
  auto truncated_rmse = [&](double gate) {
    double sum = 0.0;
    for (double d : dist) sum += std::min(d, gate) * std::min(d, gate);
    return std::sqrt(sum / static_cast<double>(n));
  };

  IcpResult res;
  SimilarityTransform current = init;
  rematch(current);
  double gate = median_gate();
  double rmse = truncated_rmse(gate);
  res.rmse_trace.push_back(rmse);
  for (int it = 0; it < params.max_iters; ++it) {
    ++res.iterations;
    if (rmse == 0.0) {
      res.converged = true;
      break;
    }
    CorrespondenceSet moved;
    for (std::size_t i = 0; i < n; ++i) {
      if (dist[i] <= gate) moved.add(current(source.points[i]), target.points[match[i]]);
    }
    SimilarityTransform step;
    try {
      step = fit_rigid(moved, params.estimate_scale);
    } catch (const Error&) {
      break;
    }
    const SimilarityTransform next = step * current;
    const std::vector<double> prev_dist = dist;
    const std::vector<std::size_t> prev_match = match;
    rematch(next);
    const double next_gate = std::min(gate, median_gate());
    const double next_rmse = truncated_rmse(next_gate);
    if (next_rmse > rmse) {
      // Only rounding can get here; keep the previous estimate.
      dist = prev_dist;
      match = prev_match;
      res.converged = true;
      break;
    }
    const double improvement = rmse - next_rmse;
    current = next;
    gate = next_gate;
    rmse = next_rmse;
    res.rmse_trace.push_back(rmse);
    if (improvement < params.tol) {
      res.converged = true;
      break;
    }
  }
  res.transform = current;
  res.final_rmse = rmse;
  return res;
}

}  // namespace xreg

#endif  // XREG_TRANSFORM_ESTIMATION_HPP_
