#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace xreg;

namespace {

SimilarityTransform random_rigid(std::mt19937_64& rng) {
  SimilarityTransform t;
  t.rotation = fixtures::random_rotation(rng);
  t.translation = fixtures::random_point(rng, -5, 5);
  return t;
}

CorrespondenceSet exact_pairs(const SimilarityTransform& t, std::size_t n, std::mt19937_64& rng) {
  CorrespondenceSet s;
  for (std::size_t i = 0; i < n; ++i) {
    const Point3 p = fixtures::random_point(rng);
    s.add(p, t(p));
  }
  return s;
}

}  // namespace

TEST(FitRigid, IdentityOnEqualSets) {
  std::mt19937_64 rng(1);
  const auto s = exact_pairs(SimilarityTransform::identity(), 5, rng);
  const auto t = fit_rigid(s);
  EXPECT_LT((t.rotation - Matrix3::Identity()).norm(), 1e-12);
  EXPECT_LT(t.translation.norm(), 1e-12);
  EXPECT_EQ(t.scale, 1.0);
}

TEST(FitRigid, RecoversExactMotion) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 100; ++k) {
    const auto truth = random_rigid(rng);
    const auto t = fit_rigid(exact_pairs(truth, 3 + k % 20, rng));
    EXPECT_LT(rotation_angle_deg(t.rotation, truth.rotation), 1e-7);
    EXPECT_LT((t.translation - truth.translation).norm(), 1e-9);
    EXPECT_NEAR(t.rotation.determinant(), 1.0, 1e-12);
  }
}

TEST(FitRigid, RecoversScaleWhenAsked) {
  std::mt19937_64 rng(3);
  auto truth = random_rigid(rng);
  truth.scale = 3.7;
  const auto t = fit_rigid(exact_pairs(truth, 10, rng), true);
  EXPECT_NEAR(t.scale, 3.7, 1e-9);
  EXPECT_LT(rotation_angle_deg(t.rotation, truth.rotation), 1e-7);
}

TEST(FitRigid, NoisyResidualWithinTwoSigma) {
  std::mt19937_64 rng(4);
  const double sigma = 0.01;
  std::normal_distribution<double> g(0.0, sigma);
  for (int k = 0; k < 20; ++k) {
    auto s = exact_pairs(random_rigid(rng), 100, rng);
    for (auto& p : s.target) p += Point3(g(rng), g(rng), g(rng));
    const auto t = fit_rigid(s);
    double sq = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) sq += (t(s.source[i]) - s.target[i]).squaredNorm();
    EXPECT_LE(std::sqrt(sq / static_cast<double>(s.size())), 2.0 * sigma);
  }
}

TEST(FitRigid, RejectsDegenerateInput) {
  CorrespondenceSet line;
  for (int i = 0; i < 5; ++i) line.add(Point3(i, 0, 0), Point3(0, i, 0));
  EXPECT_THROW(fit_rigid(line), Error);
  CorrespondenceSet two;
  two.add(Point3(0, 0, 0), Point3(0, 0, 0));
  two.add(Point3(1, 0, 0), Point3(1, 0, 0));
  EXPECT_THROW(fit_rigid(two), Error);
}

TEST(FitRigid, EquivariantUnderCommonRotation) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    std::normal_distribution<double> g(0.0, 0.05);
    auto s = exact_pairs(random_rigid(rng), 30, rng);
    for (auto& p : s.target) p += Point3(g(rng), g(rng), g(rng));
    const Matrix3 r = fixtures::random_rotation(rng);
    CorrespondenceSet rotated;
    for (std::size_t i = 0; i < s.size(); ++i) rotated.add(r * s.source[i], r * s.target[i]);
    const auto t = fit_rigid(s), tr = fit_rigid(rotated);
    EXPECT_LT((tr.rotation - r * t.rotation * r.transpose()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((tr.translation - r * t.translation).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Ransac, ExactPairsAreAllInliers) {
  std::mt19937_64 rng(6);
  const auto truth = random_rigid(rng);
  const auto r = ransac_rigid(exact_pairs(truth, 40, rng), 0.01, 2000, 1);
  EXPECT_EQ(r.inliers, 40u);
  EXPECT_LT(rotation_angle_deg(r.transform.rotation, truth.rotation), 1e-7);
  EXPECT_LT((r.transform.translation - truth.translation).norm(), 1e-9);
}

TEST(Ransac, ToleratesThirtyPercentOutliers) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto truth = random_rigid(rng);
    auto s = exact_pairs(truth, 50, rng);
    std::vector<bool> is_inlier(50, true);
    for (int i = 0; i < 15; ++i) {
      s.target[i] = fixtures::random_point(rng, -6, 6);
      is_inlier[i] = false;
    }
    const auto r = ransac_rigid(s, 0.05, 2000, trial);
    int recalled = 0;
    for (int i = 15; i < 50; ++i) recalled += r.inlier_mask[i];
    EXPECT_GE(recalled, 34);
    EXPECT_LT(rotation_angle_deg(r.transform.rotation, truth.rotation), 1.0);
  }
}

TEST(Ransac, HugeThresholdEqualsPlainFit) {
  std::mt19937_64 rng(8);
  auto s = exact_pairs(random_rigid(rng), 30, rng);
  for (int i = 0; i < 5; ++i) s.target[i] += fixtures::random_point(rng);
  const auto r = ransac_rigid(s, 1e9, 50, 2);
  const auto f = fit_rigid(s);
  EXPECT_EQ(r.inliers, 30u);
  EXPECT_LT((r.transform.matrix() - f.matrix()).norm(), 1e-9);
}

TEST(Ransac, InlierCountGrowsWithThreshold) {
  std::mt19937_64 rng(9);
  auto s = exact_pairs(random_rigid(rng), 50, rng);
  std::normal_distribution<double> g(0.0, 0.05);
  for (auto& p : s.target) p += Point3(g(rng), g(rng), g(rng));
  for (int i = 0; i < 15; ++i) s.target[i] = fixtures::random_point(rng, -6, 6);
  std::size_t prev = 0;
  for (double th : {0.05, 0.1, 0.2, 0.4, 0.8, 1.6}) {
    const auto r = ransac_rigid(s, th, 2000, 3);
    EXPECT_GE(r.inliers, prev) << "threshold " << th;
    prev = r.inliers;
  }
}

TEST(Ransac, ReportsInsufficientConsensus) {
  std::mt19937_64 rng(10);
  CorrespondenceSet s;
  for (int i = 0; i < 10; ++i) s.add(fixtures::random_point(rng), fixtures::random_point(rng, -100, 100));
  try {
    ransac_rigid(s, 1e-9, 200, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("insufficient consensus"), std::string::npos);
  }
  EXPECT_THROW(ransac_rigid(s, 0.0), Error);
}

TEST(Icp, SelfAlignmentConvergesImmediately) {
  const auto cloud = fixtures::sample_blob(2000);
  const auto r = icp_refine(cloud, cloud, SimilarityTransform::identity());
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_LT(r.final_rmse, 1e-12);
}

TEST(Icp, SmallRotationBasin) {
  const auto target = fixtures::sample_blob(3000);
  SimilarityTransform tilt;
  tilt.rotation = Eigen::AngleAxisd(deg2rad(5.0), Point3(1, 2, 3).normalized()).toRotationMatrix();
  const auto source = apply_transform(target, tilt);
  const auto r = icp_refine(source, target, SimilarityTransform::identity());
  EXPECT_LT(rotation_angle_deg(r.transform.rotation, tilt.rotation.transpose()), 0.1);
}

TEST(Icp, RmseNeverIncreases) {
  const auto target = fixtures::sample_blob(3000);
  for (double deg : {30.0, 120.0}) {
    SimilarityTransform turn;
    turn.rotation = rotation_y(deg2rad(deg));
    turn.translation = Point3(0.1, 0.2, 0);
    const auto r = icp_refine(apply_transform(target, turn), target, SimilarityTransform::identity());
    ASSERT_FALSE(r.rmse_trace.empty());
    for (std::size_t k = 1; k < r.rmse_trace.size(); ++k) EXPECT_LE(r.rmse_trace[k], r.rmse_trace[k - 1]);
    EXPECT_EQ(r.final_rmse, r.rmse_trace.back());
  }
}
