#ifndef XREG_METRICS_HPP_
#define XREG_METRICS_HPP_

#include "xreg/geometry.hpp"

#include <array>
#include <cmath>

namespace xreg {

/// Angles (yaw, pitch, roll) in degrees with R = Rz(yaw) Ry(pitch) Rx(roll),
/// each wrapped to (-180, 180].
inline std::array<double, 3> euler_zyx_deg(const Matrix3& r) {
  const double yaw = std::atan2(r(1, 0), r(0, 0));
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  const double roll = std::atan2(r(2, 1), r(2, 2));
  auto wrap = [](double deg) {
    while (deg <= -180.0) deg += 360.0;
    while (deg > 180.0) deg -= 360.0;
    return deg;
  };
  return {wrap(rad2deg(yaw)), wrap(rad2deg(pitch)), wrap(rad2deg(roll))};
}

inline double euler_rmse_deg(const Matrix3& residual) {
  const auto a = euler_zyx_deg(residual);
  return std::sqrt((a[0] * a[0] + a[1] * a[1] + a[2] * a[2]) / 3.0);
}

/// RMSE (degrees) of the Euler angles of the rotation residual
/// R_est * R_truth^T. The residual and its inverse are averaged so the metric
/// does not depend on argument order.
inline double rotation_rmse(const SimilarityTransform& estimated, const SimilarityTransform& truth) {
  const Matrix3 residual = estimated.rotation * truth.rotation.transpose();
  return 0.5 * (euler_rmse_deg(residual) + euler_rmse_deg(residual.transpose()));
}

/// Frobenius norm of the difference of the 4x4 homogeneous matrices.
inline double fnorm_error(const SimilarityTransform& estimated, const SimilarityTransform& truth) {
  return (estimated.matrix() - truth.matrix()).norm();
}

}  // namespace xreg

#endif  // XREG_METRICS_HPP_
