#ifndef XREG_EDGE_DESCRIPTOR_HPP_
#define XREG_EDGE_DESCRIPTOR_HPP_

#include "xreg/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace xreg {

/// Direction angles and length of a directed edge between two centroids.
struct EdgeDescriptor {
  double x_angle = 0.0;
  double y_angle = 0.0;
  double z_angle = 0.0;
  double d = 0.0;

  bool operator==(const EdgeDescriptor&) const = default;
};

inline constexpr double kSingularSine = 1e-9;

inline EdgeDescriptor edge_descriptor(const Point3& from, const Point3& to) {
  const Point3 delta = to - from;
  EdgeDescriptor e;
  e.d = delta.norm();
  if (!(e.d > 1e-12)) throw Error("graph-construction", "zero-length edge between coincident centroids");
  e.z_angle = std::acos(std::clamp(delta.z() / e.d, -1.0, 1.0));
  const double sz = std::sin(e.z_angle);
  if (sz > kSingularSine) {
    e.x_angle = std::acos(std::clamp(delta.x() / (e.d * sz), -1.0, 1.0));
    e.y_angle = std::acos(std::clamp(delta.y() / (e.d * sz), -1.0, 1.0));
  }
  return e;
}

}  // namespace xreg

#endif  // XREG_EDGE_DESCRIPTOR_HPP_
