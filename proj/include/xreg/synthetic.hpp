#ifndef XREG_SYNTHETIC_HPP_
#define XREG_SYNTHETIC_HPP_

// Synthetic cross-source pairs from a triangle mesh (density change,
// viewpoint change, missing regions, similarity transform, noise, outliers)
// and a few procedural test meshes.

#include "xreg/geometry.hpp"
#include "xreg/structure.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace xreg {

/// Original vertices plus the centroid of every triangle; faces dropped.
inline PointCloud upsample_mesh(const PointCloud& mesh) {
  if (!mesh.has_faces()) throw Error("synthetic-data", "mesh '" + mesh.id + "' has no faces to upsample");
  validate(mesh, "synthetic-data");
  PointCloud out;
  out.id = mesh.id;
  out.points = mesh.points;
  out.points.reserve(mesh.points.size() + mesh.faces.size());
  for (const auto& f : mesh.faces) {
    out.points.push_back((mesh.points[f[0]] + mesh.points[f[1]] + mesh.points[f[2]]) / 3.0);
  }
  return out;
}

enum class OutlierMode {
  kOffset,       // displaced copies of a subsample of the clean cloud
  kUniformBox,   // uniform in the cloud's bounding box
};

struct SynthesisConfig {
  std::uint64_t rng_seed = 0;
  double scale_min = 3.0, scale_max = 5.0;
  double rotation_min_deg = 30.0, rotation_max_deg = 60.0;  // per axis
  double translation_z_min = 0.0, translation_z_max = 0.5;  // fraction of the cloud diameter
  double snr_db = 40.0;                                       // infinity disables noise
  double outlier_fraction = 0.3;
  double outlier_offset_fraction = 0.01;  // of the cloud diameter
  OutlierMode outlier_mode = OutlierMode::kOffset;
  int missing_parts = 10;
  double missing_radius_fraction = 0.05;  // of the view radius
  double view_rotation_deg = 60.0;        // about y
  int density_stride = 3;
  bool corrupt_both = false;  // also add noise and outliers to S1

  /// Cross-source preset.
  static SynthesisConfig database_c(std::uint64_t seed = 0) {
    SynthesisConfig c;
    c.rng_seed = seed;
    return c;
  }

  /// No motion and no corruption: S2 is a sparser copy of S1's visible half.
  static SynthesisConfig clean(std::uint64_t seed = 0) {
    SynthesisConfig c;
    c.rng_seed = seed;
    c.view_rotation_deg = 0.0;
    c.scale_min = c.scale_max = 1.0;
    c.rotation_min_deg = c.rotation_max_deg = 0.0;
    c.translation_z_min = c.translation_z_max = 0.0;
    c.snr_db = std::numeric_limits<double>::infinity();
    c.outlier_fraction = 0.0;
    c.missing_parts = 0;
    return c;
  }

  /// Two partial views of the same scan, rotated in the xz-plane, with noise
  /// and uniform outliers on both.
  static SynthesisConfig same_source(std::uint64_t seed, double angle_deg, double snr_db, double outliers) {
    SynthesisConfig c = clean(seed);
    c.view_rotation_deg = angle_deg;
    c.density_stride = 1;
    c.snr_db = snr_db;
    c.outlier_fraction = outliers;
    c.outlier_mode = OutlierMode::kUniformBox;
    c.corrupt_both = true;
    return c;
  }

  void check() const {
    if (scale_min > scale_max || rotation_min_deg > rotation_max_deg || translation_z_min > translation_z_max) {
      throw Error("synthetic-data", "unordered range in synthesis config");
    }
    if (!(scale_min > 0.0)) throw Error("synthetic-data", "scale range must be positive");
    for (double f : {outlier_fraction, outlier_offset_fraction, missing_radius_fraction, translation_z_min,
                     translation_z_max}) {
      if (f < 0.0 || f > 1.0) throw Error("synthetic-data", "fractions must lie in [0, 1]");
    }
    if (density_stride < 1 || missing_parts < 0) throw Error("synthetic-data", "invalid stride or part count");
  }
};

struct SyntheticPair {
  PointCloud s1;  // target view in the mesh frame
  PointCloud s2;  // transformed, corrupted second view
  SimilarityTransform ground_truth;  // maps S2's frame onto S1's frame
  PointCloud clean_s2;               // S2 before noise and outliers
  SynthesisConfig config;
};

namespace detail {

inline PointCloud crop_nonnegative_z(const std::vector<Point3>& pts, const std::string& id) {
  PointCloud out;
  out.id = id;
  for (const auto& p : pts) {
    if (p.z() >= 0.0) out.points.push_back(p);
  }
  return out;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Gaussian noise with per-axis sigma chosen so that
// 10 log10(mean |p - c|^2 / (3 sigma^2)) = snr_db.
inline void add_noise(PointCloud& cloud, double snr_db, std::mt19937_64& rng) {
  if (!std::isfinite(snr_db)) return;
  const Point3 c = centroid(cloud);
  double signal = 0.0;
  for (const auto& p : cloud.points) signal += (p - c).squaredNorm();
  signal /= static_cast<double>(cloud.size());
  const double sigma = std::sqrt(signal / (3.0 * std::pow(10.0, snr_db / 10.0)));
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto& p : cloud.points) p += Point3(noise(rng), noise(rng), noise(rng));
}

inline std::vector<Point3> make_outliers(const PointCloud& clean, const SynthesisConfig& cfg, std::mt19937_64& rng) {
  const auto count = static_cast<std::size_t>(std::floor(cfg.outlier_fraction * static_cast<double>(clean.size())));
  std::vector<Point3> out;
  if (count == 0) return out;
  out.reserve(count);
  if (cfg.outlier_mode == OutlierMode::kUniformBox) {
    Point3 lo = clean.points.front(), hi = lo;
    for (const auto& p : clean.points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    for (std::size_t k = 0; k < count; ++k) {
      out.emplace_back(uniform(rng, lo.x(), hi.x()), uniform(rng, lo.y(), hi.y()), uniform(rng, lo.z(), hi.z()));
    }
    return out;
  }
  const double offset = cfg.outlier_offset_fraction * 2.0 * cloud_radius(clean);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t idx = k * clean.size() / count;  // stride subsample
    out.push_back(clean.points[idx] +
                  Point3(uniform(rng, -offset, offset), uniform(rng, -offset, offset), uniform(rng, -offset, offset)));
  }
  return out;
}

}  // namespace detail

inline SyntheticPair synthesize_pair(const PointCloud& mesh, const SynthesisConfig& cfg) {
  cfg.check();
  std::mt19937_64 rng(cfg.rng_seed);
  const PointCloud dense = upsample_mesh(mesh);
  if (dense.size() < 100) throw Error("synthetic-data", "mesh '" + mesh.id + "' is too small after upsampling");

  SyntheticPair pair;
  pair.config = cfg;
  pair.s1 = detail::crop_nonnegative_z(dense.points, mesh.id + "_s1");

  // View 2: rotated frame, stride subsampling, visible half.
  const Matrix3 view = rotation_y(deg2rad(cfg.view_rotation_deg));
  std::vector<Point3> rotated;
  for (std::size_t i = 0; i < dense.size(); i += static_cast<std::size_t>(cfg.density_stride)) {
    rotated.push_back(view * dense.points[i]);
  }
  PointCloud view2 = detail::crop_nonnegative_z(rotated, mesh.id + "_s2");
  if (view2.size() < 10 || pair.s1.size() < 10) throw Error("synthetic-data", "degenerate mesh: views are empty");

  // Missing regions: spheres around random view points.
  if (cfg.missing_parts > 0) {
    const double r = cfg.missing_radius_fraction * cloud_radius(view2);
    std::vector<Point3> centers;
    std::uniform_int_distribution<std::size_t> pick(0, view2.size() - 1);
    for (int k = 0; k < cfg.missing_parts; ++k) centers.push_back(view2.points[pick(rng)]);
    std::erase_if(view2.points, [&](const Point3& p) {
      for (const auto& c : centers) {
        if ((p - c).norm() < r) return true;
      }
      return false;
    });
    if (view2.size() < 10) throw Error("synthetic-data", "missing-region removal emptied the view");
  }

  // Random similarity.
  SimilarityTransform motion;
  motion.scale = detail::uniform(rng, cfg.scale_min, cfg.scale_max);
  const double ax = deg2rad(detail::uniform(rng, cfg.rotation_min_deg, cfg.rotation_max_deg));
  const double ay = deg2rad(detail::uniform(rng, cfg.rotation_min_deg, cfg.rotation_max_deg));
  const double az = deg2rad(detail::uniform(rng, cfg.rotation_min_deg, cfg.rotation_max_deg));
  motion.rotation = rotation_z(az) * rotation_y(ay) * rotation_x(ax);
  const double diameter = 2.0 * motion.scale * cloud_radius(view2);
  motion.translation = Point3(0.0, 0.0, detail::uniform(rng, cfg.translation_z_min, cfg.translation_z_max) * diameter);
  view2 = apply_transform(view2, motion);

  SimilarityTransform view_t;
  view_t.rotation = view;
  pair.ground_truth = (motion * view_t).inverse();
  pair.clean_s2 = view2;

  pair.s2 = view2;
  detail::add_noise(pair.s2, cfg.snr_db, rng);
  const auto outliers = detail::make_outliers(view2, cfg, rng);
  pair.s2.points.insert(pair.s2.points.end(), outliers.begin(), outliers.end());

  if (cfg.corrupt_both) {
    const PointCloud clean_s1 = pair.s1;
    detail::add_noise(pair.s1, cfg.snr_db, rng);
    const auto o1 = detail::make_outliers(clean_s1, cfg, rng);
    pair.s1.points.insert(pair.s1.points.end(), o1.begin(), o1.end());
  }
  return pair;
}

// ---------------------------------------------------------------------------
// Procedural meshes

namespace detail {

inline PointCloud icosphere(int subdivisions) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  PointCloud m;
  for (const auto& v : std::vector<Point3>{{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                                           {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}}) {
    m.points.push_back(v.normalized());
  }
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
             {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      const auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      m.points.push_back((m.points[a] + m.points[b]).normalized());
      const int idx = static_cast<int>(m.points.size()) - 1;
      mid.emplace(key, idx);
      return idx;
    };
    std::vector<Face> faces;
    faces.reserve(m.faces.size() * 4);
    for (const auto& f : m.faces) {
      const int ab = midpoint(f[0], f[1]), bc = midpoint(f[1], f[2]), ca = midpoint(f[2], f[0]);
      faces.push_back({f[0], ab, ca});
      faces.push_back({f[1], bc, ab});
      faces.push_back({f[2], ca, bc});
      faces.push_back({ab, bc, ca});
    }
    m.faces = std::move(faces);
  }
  return m;
}

// Grid-parameterized surface (u periodic, v periodic or clamped).
template <typename F>
PointCloud param_surface(int nu, int nv, bool v_periodic, F&& f) {
  PointCloud m;
  const int rows = v_periodic ? nv : nv + 1;
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < nu; ++i) {
      m.points.push_back(f(2.0 * kPi * i / nu, v_periodic ? 2.0 * kPi * j / nv : kPi * j / nv));
    }
  }
  for (int j = 0; j < nv; ++j) {
    if (!v_periodic && j == rows - 1) break;
    for (int i = 0; i < nu; ++i) {
      const int a = j * nu + i, b = j * nu + (i + 1) % nu;
      const int c = ((j + 1) % rows) * nu + i, d = ((j + 1) % rows) * nu + (i + 1) % nu;
      m.faces.push_back({a, b, d});
      m.faces.push_back({a, d, c});
    }
  }
  return m;
}

inline void center_and_scale(PointCloud& m) {
  const Point3 c = centroid(m);
  const double r = cloud_radius(m);
  for (auto& p : m.points) p = (p - c) / r;
}

inline void append_mesh(PointCloud& dst, const PointCloud& src, const SimilarityTransform& t) {
  const int base = static_cast<int>(dst.points.size());
  for (const auto& p : src.points) dst.points.push_back(t(p));
  for (const auto& f : src.faces) dst.faces.push_back({f[0] + base, f[1] + base, f[2] + base});
}

}  // namespace detail

/// Names accepted by make_procedural_mesh.
inline std::vector<std::string> procedural_mesh_names() { return {"blob", "bumpy-torus", "assembly"}; }

/// Asymmetric closed test meshes centered at the origin with unit radius.
inline PointCloud make_procedural_mesh(const std::string& name, int detail_level = 4) {
  PointCloud m;
  if (name == "blob") {
    m = detail::icosphere(detail_level);
    for (auto& p : m.points) {
      const double r = 1.0 + 0.25 * std::sin(3.0 * p.x() + 1.0) * std::cos(2.0 * p.y()) +
                       0.18 * std::sin(5.0 * p.z() + 2.0) + 0.3 * std::exp(-8.0 * (p - Point3(0.6, 0.5, 0.4)).squaredNorm());
      p *= r;
      p.x() *= 1.3;
    }
  } else if (name == "bumpy-torus") {
    const int nu = 24 << (detail_level - 2), nv = 12 << (detail_level - 2);
    m = detail::param_surface(nu, nv, true, [](double u, double v) {
      const double tube = 0.35 + 0.12 * std::sin(3.0 * u) + 0.05 * std::cos(5.0 * v + u);
      const double major = 1.0 + 0.2 * std::cos(2.0 * u + 0.5);
      return Point3((major + tube * std::cos(v)) * std::cos(u), (major + tube * std::cos(v)) * std::sin(u),
                    tube * std::sin(v) + 0.3 * std::sin(u));
    });
  } else if (name == "assembly") {
    // A few primitives arranged without symmetry, like objects on a desk.
    const PointCloud sphere = detail::icosphere(detail_level - 1);
    const int nu = 16 << (detail_level - 2);
    const PointCloud cylinder = detail::param_surface(nu, nu / 2, false, [](double u, double v) {
      return Point3(0.3 * std::cos(u), 0.3 * std::sin(u), 1.2 * (v / kPi - 0.5));
    });
    const PointCloud box = detail::param_surface(nu, nu / 2, false, [](double u, double v) {
      // Superellipsoid, visually box-like.
      auto sgnpow = [](double x, double e) { return std::copysign(std::pow(std::abs(x), e), x); };
      const double e = 0.25;
      return Point3(0.9 * sgnpow(std::sin(v), e) * sgnpow(std::cos(u), e),
                    0.5 * sgnpow(std::sin(v), e) * sgnpow(std::sin(u), e), 0.35 * sgnpow(std::cos(v), e));
    });
    SimilarityTransform t;
    detail::append_mesh(m, box, t);
    t.translation = Point3(0.5, 0.2, 0.6);
    t.scale = 0.45;
    detail::append_mesh(m, sphere, t);
    t.scale = 1.0;
    t.rotation = rotation_y(deg2rad(70.0));
    t.translation = Point3(-0.4, -0.25, 0.55);
    detail::append_mesh(m, cylinder, t);
    t.rotation = rotation_x(deg2rad(35.0));
    t.translation = Point3(-0.1, 0.45, -0.2);
    t.scale = 0.6;
    detail::append_mesh(m, cylinder, t);
  } else {
    throw Error("synthetic-data", "unknown procedural mesh '" + name + "'");
  }
  detail::center_and_scale(m);
  m.id = name;
  return m;
}

}  // namespace xreg

#endif  // XREG_SYNTHETIC_HPP_
