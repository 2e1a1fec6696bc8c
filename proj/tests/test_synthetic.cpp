#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace xreg;

TEST(Upsample, AddsTriangleCentroids) {
  PointCloud tri{{{0, 0, 0}, {3, 0, 0}, {0, 3, 0}}, {{0, 1, 2}}, "tri"};
  const auto up = upsample_mesh(tri);
  ASSERT_EQ(up.size(), 4u);
  EXPECT_TRUE(up.points[3].isApprox(Point3(1, 1, 0)));
  EXPECT_FALSE(up.has_faces());

  const auto mesh = make_procedural_mesh("blob");
  EXPECT_EQ(upsample_mesh(mesh).size(), mesh.size() + mesh.faces.size());
  EXPECT_THROW(upsample_mesh(PointCloud{{{0, 0, 0}}, {}, "bare"}), Error);
}

TEST(Upsample, CentroidsLieOnTheirTriangles) {
  const auto ico = make_procedural_mesh("blob", 0);
  const auto up = upsample_mesh(ico);
  for (std::size_t f = 0; f < ico.faces.size(); ++f) {
    const auto& [a, b, c] = ico.faces[f];
    const Point3 n = (ico.points[b] - ico.points[a]).cross(ico.points[c] - ico.points[a]).normalized();
    EXPECT_LT(std::abs(n.dot(up.points[ico.size() + f] - ico.points[a])), 1e-12);
  }
}

TEST(ProceduralMeshes, AreValidAndCentered) {
  for (const auto& name : procedural_mesh_names()) {
    const auto m = make_procedural_mesh(name);
    EXPECT_NO_THROW(validate(m));
    EXPECT_GT(m.faces.size(), 1000u);
    EXPECT_LT(centroid(m).norm(), 1e-9);
    EXPECT_NEAR(cloud_radius(m), 1.0, 1e-9);
  }
  EXPECT_THROW(make_procedural_mesh("teapot"), Error);
}

TEST(Synthesis, CleanPresetIsPureSubsampling) {
  const auto mesh = make_procedural_mesh("blob");
  const auto pair = synthesize_pair(mesh, SynthesisConfig::clean(1));
  EXPECT_EQ(pair.ground_truth.matrix(), Matrix4::Identity());
  const auto dense = upsample_mesh(mesh);
  std::vector<Point3> expected;
  for (std::size_t i = 0; i < dense.size(); i += 3) {
    if (dense.points[i].z() >= 0.0) expected.push_back(dense.points[i]);
  }
  EXPECT_EQ(pair.s2.points, expected);
  EXPECT_EQ(pair.s2.points, pair.clean_s2.points);
}

TEST(Synthesis, GroundTruthOverlaysCleanView) {
  const auto mesh = make_procedural_mesh("bumpy-torus");
  const auto pair = synthesize_pair(mesh, SynthesisConfig::database_c(2));
  const auto dense = upsample_mesh(mesh);
  const SpatialIndex s1(pair.s1), all(dense);
  std::size_t in_overlap = 0;
  for (const auto& p : pair.clean_s2.points) {
    const Point3 back = pair.ground_truth(p);
    EXPECT_LT(all.nearest(back).distance, 1e-9);
    if (back.z() >= 0.0) {
      EXPECT_LT(s1.nearest(back).distance, 1e-9);
      ++in_overlap;
    }
  }
  EXPECT_GT(in_overlap, pair.clean_s2.size() / 4);
}

TEST(Synthesis, TransformDrawnFromConfiguredRanges) {
  const auto mesh = make_procedural_mesh("assembly");
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto pair = synthesize_pair(mesh, SynthesisConfig::database_c(seed));
    const double scale = 1.0 / pair.ground_truth.scale;
    EXPECT_GE(scale, 3.0 - 1e-12);
    EXPECT_LE(scale, 5.0 + 1e-12);
    EXPECT_TRUE(pair.ground_truth.is_valid());
  }
}

TEST(Synthesis, OutlierCountAndSnr) {
  const auto mesh = make_procedural_mesh("blob");
  auto cfg = SynthesisConfig::database_c(3);
  const auto pair = synthesize_pair(mesh, cfg);
  const std::size_t clean = pair.clean_s2.size();
  EXPECT_EQ(pair.s2.size() - clean, static_cast<std::size_t>(std::floor(0.3 * static_cast<double>(clean))));

  // Noise only: measured SNR of the first |clean| points.
  cfg.outlier_fraction = 0.0;
  const auto noisy = synthesize_pair(mesh, cfg);
  const Point3 c = centroid(noisy.clean_s2);
  double signal = 0.0, noise = 0.0;
  for (std::size_t i = 0; i < noisy.clean_s2.size(); ++i) {
    signal += (noisy.clean_s2.points[i] - c).squaredNorm();
    noise += (noisy.s2.points[i] - noisy.clean_s2.points[i]).squaredNorm();
  }
  EXPECT_NEAR(10.0 * std::log10(signal / noise), 40.0, 0.5);
}

TEST(Synthesis, MissingRegionsRemovePoints) {
  const auto mesh = make_procedural_mesh("blob");
  auto cfg = SynthesisConfig::clean(4);
  const auto full = synthesize_pair(mesh, cfg);
  cfg.missing_parts = 10;
  const auto holed = synthesize_pair(mesh, cfg);
  EXPECT_LT(holed.s2.size(), full.s2.size());
}

TEST(Synthesis, Deterministic) {
  const auto mesh = make_procedural_mesh("blob");
  const auto a = synthesize_pair(mesh, SynthesisConfig::database_c(9));
  const auto b = synthesize_pair(mesh, SynthesisConfig::database_c(9));
  EXPECT_EQ(a.s1.points, b.s1.points);
  EXPECT_EQ(a.s2.points, b.s2.points);
  EXPECT_EQ(a.ground_truth.matrix(), b.ground_truth.matrix());
  const auto c = synthesize_pair(mesh, SynthesisConfig::database_c(10));
  EXPECT_NE(a.s2.points, c.s2.points);
}

TEST(Synthesis, RejectsBadConfig) {
  const auto mesh = make_procedural_mesh("blob");
  auto cfg = SynthesisConfig::database_c(0);
  cfg.scale_min = 6.0;
  EXPECT_THROW(synthesize_pair(mesh, cfg), Error);
  cfg = SynthesisConfig::database_c(0);
  cfg.outlier_fraction = 1.5;
  EXPECT_THROW(synthesize_pair(mesh, cfg), Error);
  PointCloud tiny{{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}}, "tiny"};
  EXPECT_THROW(synthesize_pair(tiny, SynthesisConfig::database_c(0)), Error);
}

TEST(Metrics, RotationExamples) {
  SimilarityTransform truth;
  EXPECT_EQ(rotation_rmse(truth, truth), 0.0);
  SimilarityTransform est;
  est.rotation = rotation_z(deg2rad(10.0));
  EXPECT_NEAR(rotation_rmse(est, truth), 10.0 / std::sqrt(3.0), 1e-9);
  EXPECT_NEAR(10.0 / std::sqrt(3.0), 5.774, 5e-4);

  std::mt19937_64 rng(5);
  for (int k = 0; k < 50; ++k) {
    SimilarityTransform a, b;
    a.rotation = fixtures::random_rotation(rng);
    b.rotation = fixtures::random_rotation(rng);
    EXPECT_NEAR(rotation_rmse(a, b), rotation_rmse(b, a), 1e-9);
  }
}

TEST(Metrics, FnormExamples) {
  SimilarityTransform a, b;
  EXPECT_EQ(fnorm_error(a, b), 0.0);
  b.translation = Point3(0, 0, 1);
  EXPECT_DOUBLE_EQ(fnorm_error(a, b), 1.0);
  std::mt19937_64 rng(6);
  a.rotation = fixtures::random_rotation(rng);
  const Matrix4 d = a.matrix() - b.matrix();
  EXPECT_NEAR(fnorm_error(a, b), d.transpose().norm(), 1e-12);
}
