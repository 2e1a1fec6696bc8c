#ifndef XREG_GEOMETRY_HPP_
#define XREG_GEOMETRY_HPP_

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace xreg {

using Point3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;
using Matrix4 = Eigen::Matrix4d;
using Face = std::array<int, 3>;

/// Base exception for every failure raised by the toolkit. The message is
/// prefixed with the stage that failed so CLI errors stay attributable.
class Error : public std::runtime_error {
 public:
  Error(const std::string& stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(stage) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct PointCloud {
  std::vector<Point3> points;
  std::vector<Face> faces;
  std::string id;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
  bool has_faces() const noexcept { return !faces.empty(); }
};

/// Throws when the cloud violates its invariants (non-finite coordinates,
/// face indices out of range).
inline void validate(const PointCloud& cloud, const std::string& stage = "geometry") {
  if (cloud.points.empty()) throw Error(stage, "cloud '" + cloud.id + "' is empty");
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    if (!cloud.points[i].allFinite()) {
      throw Error(stage, "cloud '" + cloud.id + "' has a non-finite coordinate at point " +
                             std::to_string(i));
    }
  }
  const auto n = static_cast<long long>(cloud.points.size());
  for (std::size_t f = 0; f < cloud.faces.size(); ++f) {
    for (int idx : cloud.faces[f]) {
      if (idx < 0 || idx >= n) {
        throw Error(stage, "cloud '" + cloud.id + "' face " + std::to_string(f) +
                               " references vertex " + std::to_string(idx) + " of " +
                               std::to_string(n));
      }
    }
  }
}

/// p -> scale * rotation * p + translation.
struct SimilarityTransform {
  double scale = 1.0;
  Matrix3 rotation = Matrix3::Identity();
  Point3 translation = Point3::Zero();

  static SimilarityTransform identity() { return {}; }

  static SimilarityTransform from_matrix(const Matrix4& m) {
    SimilarityTransform t;
    const Matrix3 sr = m.topLeftCorner<3, 3>();
    t.scale = std::cbrt(sr.determinant());
    t.rotation = sr / t.scale;
    t.translation = m.topRightCorner<3, 1>();
    return t;
  }

  Point3 operator()(const Point3& p) const { return scale * (rotation * p) + translation; }

  Matrix4 matrix() const {
    Matrix4 m = Matrix4::Identity();
    m.topLeftCorner<3, 3>() = scale * rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  SimilarityTransform inverse() const {
    SimilarityTransform inv;
    inv.scale = 1.0 / scale;
    inv.rotation = rotation.transpose();
    inv.translation = -inv.scale * (inv.rotation * translation);
    return inv;
  }

  /// Max deviation of rotation from orthonormality plus determinant check.
  bool is_valid(double tol = 1e-9) const {
    if (!(scale > 0.0) || !std::isfinite(scale)) return false;
    const double ortho = (rotation.transpose() * rotation - Matrix3::Identity()).cwiseAbs().maxCoeff();
    return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol && translation.allFinite();
  }
};

/// Composition: (a * b)(p) == a(b(p)).
inline SimilarityTransform operator*(const SimilarityTransform& a, const SimilarityTransform& b) {
  SimilarityTransform c;
  c.scale = a.scale * b.scale;
  c.rotation = a.rotation * b.rotation;
  c.translation = a.scale * (a.rotation * b.translation) + a.translation;
  return c;
}

inline PointCloud apply_transform(const PointCloud& cloud, const SimilarityTransform& t) {
  PointCloud out;
  out.id = cloud.id;
  out.faces = cloud.faces;
  out.points.reserve(cloud.points.size());
  for (const auto& p : cloud.points) out.points.push_back(t(p));
  return out;
}

inline Point3 centroid(std::span<const Point3> points) {
  if (points.empty()) throw Error("geometry", "centroid of an empty point set");
  Point3 sum = Point3::Zero();
  for (const auto& p : points) sum += p;
  return sum / static_cast<double>(points.size());
}

inline Point3 centroid(const PointCloud& cloud) { return centroid(std::span<const Point3>(cloud.points)); }

/// max ||p - centroid||.
inline double cloud_radius(std::span<const Point3> points) {
  const Point3 c = centroid(points);
  double r2 = 0.0;
  for (const auto& p : points) r2 = std::max(r2, (p - c).squaredNorm());
  return std::sqrt(r2);
}

inline double cloud_radius(const PointCloud& cloud) {
  return cloud_radius(std::span<const Point3>(cloud.points));
}

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

inline Matrix3 rotation_x(double rad) { return Eigen::AngleAxisd(rad, Point3::UnitX()).toRotationMatrix(); }
inline Matrix3 rotation_y(double rad) { return Eigen::AngleAxisd(rad, Point3::UnitY()).toRotationMatrix(); }
inline Matrix3 rotation_z(double rad) { return Eigen::AngleAxisd(rad, Point3::UnitZ()).toRotationMatrix(); }

/// Geodesic angle of R_a * R_b^T in degrees.
inline double rotation_angle_deg(const Matrix3& a, const Matrix3& b) {
  const Matrix3 r = a * b.transpose();
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  // acos loses precision near zero; use the skew part as well.
  const Point3 s(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  return rad2deg(std::atan2(0.5 * s.norm(), c));
}

}  // namespace xreg

#endif  // XREG_GEOMETRY_HPP_
