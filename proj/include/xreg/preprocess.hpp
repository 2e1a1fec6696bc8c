#ifndef XREG_PREPROCESS_HPP_
#define XREG_PREPROCESS_HPP_

#include "xreg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <tuple>
#include <utility>
#include <vector>

namespace xreg {

enum class RadiusMode {
  kMax,           // max distance to the centroid
  kPercentile95,  // 95th-percentile distance; tolerates a few far outliers
};

struct ScaleEstimate {
  double scale = 1.0;
  double source_radius = 1.0;
  double target_radius = 1.0;
};

inline double robust_radius(const PointCloud& cloud, RadiusMode mode) {
  if (mode == RadiusMode::kMax) return cloud_radius(cloud);
  const Point3 c = centroid(cloud);
  std::vector<double> d;
  d.reserve(cloud.size());
  for (const auto& p : cloud.points) d.push_back((p - c).norm());
  const auto k = static_cast<std::size_t>(std::floor(0.95 * static_cast<double>(d.size() - 1)));
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  return d[k];
}

/// Ratio of the radius of P to the radius of Q. Multiplying Q by the returned
/// scale gives both clouds the same radius.
inline ScaleEstimate estimate_scale(const PointCloud& p, const PointCloud& q,
                                    RadiusMode mode = RadiusMode::kMax) {
  for (const PointCloud* c : {&p, &q}) {
    if (c->size() < 2) throw Error("preprocess", "cloud '" + c->id + "' needs at least 2 points for scale estimation");
  }
  ScaleEstimate est;
  est.source_radius = robust_radius(p, mode);
  est.target_radius = robust_radius(q, mode);
  for (auto [r, c] : {std::pair{est.source_radius, &p}, std::pair{est.target_radius, &q}}) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw Error("preprocess", "cloud '" + c->id + "' is degenerate (zero radius)");
    }
  }
  est.scale = est.source_radius / est.target_radius;
  return est;
}

/// Rescales Q about its own centroid so its radius matches P's. P is never
/// modified.
inline std::pair<PointCloud, ScaleEstimate> normalize_scale(const PointCloud& p, const PointCloud& q,
                                                            RadiusMode mode = RadiusMode::kMax) {
  const ScaleEstimate est = estimate_scale(p, q, mode);
  const Point3 c = centroid(q);
  PointCloud out;
  out.id = q.id;
  out.faces = q.faces;
  out.points.reserve(q.size());
  for (const auto& pt : q.points) out.points.push_back(c + est.scale * (pt - c));
  return {std::move(out), est};
}

namespace detail {

// One representative per occupied cell: the member nearest the cell's
// centroid, ties by lowest index. Output keeps input order.
inline std::vector<std::size_t> voxel_representatives(const std::vector<Point3>& pts, const Point3& origin,
                                                      double cell) {
  using Key = std::tuple<std::int64_t, std::int64_t, std::int64_t>;
  std::vector<std::pair<Key, std::size_t>> keyed(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point3 g = ((pts[i] - origin) / cell).array().floor();
    keyed[i] = {Key{static_cast<std::int64_t>(g.x()), static_cast<std::int64_t>(g.y()),
                    static_cast<std::int64_t>(g.z())},
                i};
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::size_t> reps;
  for (std::size_t b = 0; b < keyed.size();) {
    std::size_t e = b;
    Point3 sum = Point3::Zero();
    while (e < keyed.size() && keyed[e].first == keyed[b].first) sum += pts[keyed[e++].second];
    const Point3 c = sum / static_cast<double>(e - b);
    std::size_t best = keyed[b].second;
    double best_d = (pts[best] - c).squaredNorm();
    for (std::size_t k = b + 1; k < e; ++k) {
      const double d = (pts[keyed[k].second] - c).squaredNorm();
      if (d < best_d) {  // members are sorted by index within a cell
        best_d = d;
        best = keyed[k].second;
      }
    }
    reps.push_back(best);
    b = e;
  }
  std::sort(reps.begin(), reps.end());
  return reps;
}

}  // namespace detail

/// Voxel-grid decimation to roughly target_count points. The cell edge is
/// found by bisection (at most 32 steps) until the output is within +-10% of
/// the target; the closest count seen is used if the band is never hit.
inline PointCloud downsample_uniform(const PointCloud& cloud, std::size_t target_count) {
  if (target_count == 0) throw Error("preprocess", "downsample target must be at least 1");
  if (cloud.size() <= target_count) return cloud;

  Point3 lo = cloud.points.front(), hi = lo;
  for (const auto& p : cloud.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double extent = std::max((hi - lo).norm(), 1e-12);
  const double low_band = 0.9 * static_cast<double>(target_count);
  const double high_band = 1.1 * static_cast<double>(target_count);

  double small = extent * 1e-6, large = extent * 1.01;
  std::vector<std::size_t> best;
  double best_err = std::numeric_limits<double>::infinity();
  for (int step = 0; step < 32; ++step) {
    const double cell = std::sqrt(small * large);
    auto reps = detail::voxel_representatives(cloud.points, lo, cell);
    const auto count = static_cast<double>(reps.size());
    const double err = std::abs(count - static_cast<double>(target_count));
    if (err < best_err) {
      best_err = err;
      best = std::move(reps);
    }
    if (count >= low_band && count <= high_band) break;
    if (count > high_band) {
      small = cell;
    } else {
      large = cell;
    }
  }
  PointCloud out;
  out.id = cloud.id;
  out.points.reserve(best.size());
  for (std::size_t i : best) out.points.push_back(cloud.points[i]);
  return out;
}

}  // namespace xreg

#endif  // XREG_PREPROCESS_HPP_
