#ifndef XREG_ESF_HPP_
#define XREG_ESF_HPP_

// Ensemble of Shape Functions: 10 histograms of 64 bins built from random
// point triples, each sample classified by tracing its connecting lines
// through a 64^3 occupancy grid.

#include "xreg/geometry.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <span>
#include <vector>

namespace xreg {

inline constexpr std::size_t kEsfBins = 64;
inline constexpr std::size_t kEsfHistograms = 10;
inline constexpr std::size_t kEsfSize = kEsfBins * kEsfHistograms;

/// Sub-histogram slots in the concatenated descriptor.
enum class EsfPart : std::size_t {
  kA3In, kA3Out, kA3Mixed, kD3In, kD3Out, kD3Mixed, kD2In, kD2Out, kD2Mixed, kD2Ratio
};

struct EsfDescriptor {
  std::array<double, kEsfSize> bins{};

  std::span<const double, kEsfBins> part(EsfPart p) const {
    return std::span<const double, kEsfBins>(bins.data() + static_cast<std::size_t>(p) * kEsfBins, kEsfBins);
  }

  double distance(const EsfDescriptor& other) const {
    double s = 0.0;
    for (std::size_t i = 0; i < kEsfSize; ++i) {
      const double d = bins[i] - other.bins[i];
      s += d * d;
    }
    return std::sqrt(s);
  }

  bool operator==(const EsfDescriptor&) const = default;
};

struct EsfParams {
  std::size_t samples = 20000;  // point triples
  std::size_t grid = 64;
};

namespace detail {

enum class LineClass { kIn = 0, kOut = 1, kMixed = 2 };

class OccupancyGrid {
 public:
  OccupancyGrid(std::span<const Point3> pts, std::size_t res) : res_(res), occ_(res * res * res, 0) {
    center_ = centroid(pts);
    // Cells are laid out along the principal axes, so a rotated copy of the
    // set gets the same occupancy up to axis flips.
    Matrix3 cov = Matrix3::Zero();
    for (const auto& p : pts) cov += (p - center_) * (p - center_).transpose();
    axes_ = Eigen::SelfAdjointEigenSolver<Matrix3>(cov).eigenvectors().transpose();
    double r = 0.0;
    for (const auto& p : pts) r = std::max(r, (p - center_).norm());
    radius_ = r > 0.0 ? r : 1.0;
    cells_.reserve(pts.size());
    for (const auto& p : pts) {
      cells_.push_back(cell_of(p));
      occ_[flat(cells_.back())] = 1;
    }
  }

  double radius() const { return radius_; }
  const std::array<int, 3>& cell(std::size_t i) const { return cells_[i]; }

  // Classifies the segment between two member cells by the occupancy of the
  // cells strictly between them (3D Bresenham). Returns the occupied ratio.
  double trace(const std::array<int, 3>& a, const std::array<int, 3>& b, LineClass& cls) const {
    int d[3], s[3], p[3] = {a[0], a[1], a[2]};
    for (int k = 0; k < 3; ++k) {
      d[k] = std::abs(b[k] - a[k]);
      s[k] = b[k] >= a[k] ? 1 : -1;
    }
    const int major = d[0] >= d[1] && d[0] >= d[2] ? 0 : (d[1] >= d[2] ? 1 : 2);
    const int m1 = (major + 1) % 3, m2 = (major + 2) % 3;
    int e1 = 2 * d[m1] - d[major], e2 = 2 * d[m2] - d[major];
    int total = 0, occupied = 0;
    for (int step = 1; step < d[major]; ++step) {
      if (e1 > 0) {
        p[m1] += s[m1];
        e1 -= 2 * d[major];
      }
      if (e2 > 0) {
        p[m2] += s[m2];
        e2 -= 2 * d[major];
      }
      e1 += 2 * d[m1];
      e2 += 2 * d[m2];
      p[major] += s[major];
      ++total;
      occupied += occ_[flat({p[0], p[1], p[2]})];
    }
    if (total == 0 || occupied == total) {
      cls = LineClass::kIn;
      return 1.0;
    }
    cls = occupied == 0 ? LineClass::kOut : LineClass::kMixed;
    return static_cast<double>(occupied) / total;
  }

 private:
  std::array<int, 3> cell_of(const Point3& p) const {
    std::array<int, 3> c{};
    const double scale = static_cast<double>(res_) / (2.0 * radius_ * (1.0 + 1e-9));
    const Point3 local = axes_ * (p - center_);
    for (int k = 0; k < 3; ++k) {
      const int v = static_cast<int>(std::floor((local[k] + radius_) * scale));
      c[k] = std::clamp(v, 0, static_cast<int>(res_) - 1);
    }
    return c;
  }
  std::size_t flat(const std::array<int, 3>& c) const {
    return (static_cast<std::size_t>(c[0]) * res_ + static_cast<std::size_t>(c[1])) * res_ +
           static_cast<std::size_t>(c[2]);
  }

  std::size_t res_;
  std::vector<std::uint8_t> occ_;
  std::vector<std::array<int, 3>> cells_;
  Point3 center_;
  Matrix3 axes_;
  double radius_ = 1.0;
};

inline std::size_t esf_bin(double unit_value) {
  const double v = std::clamp(unit_value, 0.0, 1.0) * static_cast<double>(kEsfBins);
  return std::min(static_cast<std::size_t>(v), kEsfBins - 1);
}

}  // namespace detail

/// Descriptor of an arbitrary point set (at least 3 points). Distances are
/// normalized by the set's radius about its centroid so the descriptor is
/// scale-free; sampling is fully determined by rng_seed.
inline EsfDescriptor compute_esf(std::span<const Point3> pts, std::uint64_t rng_seed, const EsfParams& params = {}) {
  if (pts.size() < 3) throw Error("structure-extraction", "shape descriptor needs at least 3 points");
  const detail::OccupancyGrid grid(pts, params.grid);
  const double radius = grid.radius();
  const double max_area = 3.0 * std::sqrt(3.0) / 4.0 * radius * radius;  // equilateral in the bounding sphere

  std::array<double, kEsfSize> h{};
  auto vote = [&](EsfPart part, double unit_value) {
    h[static_cast<std::size_t>(part) * kEsfBins + detail::esf_bin(unit_value)] += 1.0;
  };

  std::mt19937_64 rng(rng_seed);
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
  for (std::size_t s = 0; s < params.samples; ++s) {
    std::size_t idx[3];
    idx[0] = pick(rng);
    do { idx[1] = pick(rng); } while (idx[1] == idx[0]);
    do { idx[2] = pick(rng); } while (idx[2] == idx[0] || idx[2] == idx[1]);

    // Side k joins vertices k and (k+1)%3; the vertex opposite side k is (k+2)%3.
    detail::LineClass cls[3];
    for (int k = 0; k < 3; ++k) {
      const std::size_t a = idx[k], b = idx[(k + 1) % 3];
      const double ratio = grid.trace(grid.cell(a), grid.cell(b), cls[k]);
      const double len = (pts[a] - pts[b]).norm();
      vote(static_cast<EsfPart>(static_cast<std::size_t>(EsfPart::kD2In) + static_cast<std::size_t>(cls[k])),
           len / (2.0 * radius));
      vote(EsfPart::kD2Ratio, ratio);
    }
    for (int k = 0; k < 3; ++k) {
      const Point3& apex = pts[idx[(k + 2) % 3]];
      const Point3 u = pts[idx[k]] - apex, v = pts[idx[(k + 1) % 3]] - apex;
      const double nu = u.norm(), nv = v.norm();
      if (nu == 0.0 || nv == 0.0) continue;
      const double angle = std::acos(std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0));
      vote(static_cast<EsfPart>(static_cast<std::size_t>(EsfPart::kA3In) + static_cast<std::size_t>(cls[k])),
           angle / kPi);
    }
    const double area = 0.5 * (pts[idx[1]] - pts[idx[0]]).cross(pts[idx[2]] - pts[idx[0]]).norm();
    detail::LineClass tri = detail::LineClass::kMixed;
    if (cls[0] == cls[1] && cls[1] == cls[2] && cls[0] != detail::LineClass::kMixed) tri = cls[0];
    vote(static_cast<EsfPart>(static_cast<std::size_t>(EsfPart::kD3In) + static_cast<std::size_t>(tri)),
         std::sqrt(area / max_area));
  }

  EsfDescriptor out;
  for (std::size_t part = 0; part < kEsfHistograms; ++part) {
    double sum = 0.0;
    for (std::size_t b = 0; b < kEsfBins; ++b) sum += h[part * kEsfBins + b];
    if (sum <= 0.0) continue;  // statistic never observed; stays all-zero
    for (std::size_t b = 0; b < kEsfBins; ++b) out.bins[part * kEsfBins + b] = h[part * kEsfBins + b] / sum;
  }
  return out;
}

}  // namespace xreg

#endif  // XREG_ESF_HPP_
