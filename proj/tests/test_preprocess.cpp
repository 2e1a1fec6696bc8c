#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace xreg;

namespace {

PointCloud random_cloud(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PointCloud c;
  c.id = "random";
  for (std::size_t i = 0; i < n; ++i) c.points.push_back(fixtures::random_point(rng));
  return c;
}

PointCloud transformed(const PointCloud& c, double scale, const Matrix3& r, const Point3& t) {
  SimilarityTransform x;
  x.scale = scale;
  x.rotation = r;
  x.translation = t;
  return apply_transform(c, x);
}

}  // namespace

TEST(Scale, Examples) {
  const auto p = random_cloud(500, 1);
  EXPECT_DOUBLE_EQ(estimate_scale(p, p).scale, 1.0);
  EXPECT_NEAR(estimate_scale(p, transformed(p, 0.5, Matrix3::Identity(), Point3::Zero())).scale, 2.0, 1e-12);
  std::mt19937_64 rng(2);
  EXPECT_NEAR(estimate_scale(p, transformed(p, 1.0, fixtures::random_rotation(rng), Point3(4, 5, 6))).scale, 1.0, 1e-9);
}

TEST(Scale, ReciprocalAndRigidInvariance) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto p = random_cloud(300, 10 + t);
    const auto q = transformed(random_cloud(200, 50 + t), 2.5, Matrix3::Identity(), Point3::Zero());
    EXPECT_NEAR(estimate_scale(p, q).scale * estimate_scale(q, p).scale, 1.0, 1e-9);
    const auto moved = transformed(q, 1.0, fixtures::random_rotation(rng), fixtures::random_point(rng, -5, 5));
    EXPECT_NEAR(estimate_scale(p, moved).scale, estimate_scale(p, q).scale, 1e-9);
  }
}

TEST(Scale, DegenerateCloudNamed) {
  PointCloud flat{{{1, 1, 1}, {1, 1, 1}}, {}, "flat"};
  try {
    estimate_scale(random_cloud(10, 4), flat);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("flat"), std::string::npos);
  }
}

TEST(Normalize, EqualRadiiAndFixedCentroid) {
  const auto p = random_cloud(400, 5);
  const auto q = transformed(p, 3.0, Matrix3::Identity(), Point3(1, 2, 3));
  const auto [q2, est] = normalize_scale(p, q);
  EXPECT_NEAR(cloud_radius(q2), cloud_radius(p), 1e-9);
  EXPECT_NEAR(estimate_scale(p, q2).scale, 1.0, 1e-9);
  EXPECT_LT((centroid(q2) - centroid(q)).norm(), 1e-9);
  EXPECT_NEAR(est.scale, 1.0 / 3.0, 1e-9);
}

TEST(Normalize, PercentileModeIgnoresOneOutlier) {
  auto p = random_cloud(1000, 6);
  auto q = p;
  q.points.push_back(Point3(100, 0, 0));
  EXPECT_LT(estimate_scale(p, q).scale, 0.1);
  EXPECT_NEAR(estimate_scale(p, q, RadiusMode::kPercentile95).scale, 1.0, 0.05);
}

TEST(Normalize, RecoversInjectedScaleOnFullOverlap) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> s(3.0, 5.0);
  const auto p = fixtures::sample_blob(2000);
  for (int t = 0; t < 10; ++t) {
    const double truth = s(rng);
    const auto q = transformed(p, truth, fixtures::random_rotation(rng), fixtures::random_point(rng));
    EXPECT_NEAR(estimate_scale(p, q).scale * truth, 1.0, 0.02);
  }
}

TEST(Downsample, Examples) {
  const auto c = random_cloud(2000, 8);
  EXPECT_EQ(downsample_uniform(c, 2000).points, c.points);

  PointCloud cube;
  for (int x : {0, 1})
    for (int y : {0, 1})
      for (int z : {0, 1}) cube.points.emplace_back(x, y, z);
  EXPECT_EQ(downsample_uniform(cube, 1).size(), 1u);

  const auto big = random_cloud(100000, 9);
  const auto small = downsample_uniform(big, 2000);
  EXPECT_GE(small.size(), 1800u);
  EXPECT_LE(small.size(), 2200u);
  EXPECT_EQ(downsample_uniform(big, 2000).points, small.points);
  EXPECT_THROW(downsample_uniform(big, 0), Error);
}
