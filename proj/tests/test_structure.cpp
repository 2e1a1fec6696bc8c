#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace xreg;

namespace {

PointCloud cube_cluster(const Point3& corner, std::size_t n, std::mt19937_64& rng) {
  PointCloud c;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) c.points.push_back(corner + Point3(u(rng), u(rng), u(rng)));
  return c;
}

// Dense jittered line of points along x from 0 to `length`.
PointCloud line_cloud(double length, double spacing) {
  PointCloud c;
  c.id = "line";
  int k = 0;
  for (double x = 0.0; x <= length; x += spacing, ++k) {
    c.points.emplace_back(x, 0.01 * std::sin(3.0 * k), 0.01 * std::cos(5.0 * k));
  }
  return c;
}

std::vector<SuperVoxel> split_by_x(const PointCloud& c, const std::vector<double>& cuts) {
  std::vector<SuperVoxel> v(cuts.size() + 1);
  for (std::size_t i = 0; i < c.size(); ++i) {
    std::size_t slot = 0;
    while (slot < cuts.size() && c.points[i].x() >= cuts[slot]) ++slot;
    v[slot].member_indices.push_back(i);
  }
  for (auto& s : v) {
    Point3 sum = Point3::Zero();
    for (std::size_t i : s.member_indices) sum += c.points[i];
    s.centroid = sum / static_cast<double>(s.member_indices.size());
    s.seed_index = s.member_indices.front();
  }
  return v;
}

void expect_partition(const std::vector<SuperVoxel>& voxels, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (const auto& v : voxels) {
    ASSERT_FALSE(v.member_indices.empty());
    for (std::size_t i : v.member_indices) ++seen[i];
  }
  for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(seen[i], 1) << "point " << i;
}

std::vector<Point3> sphere_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<Point3> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(Point3(g(rng), g(rng), g(rng)).normalized());
  return pts;
}

std::vector<Point3> plane_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Point3> pts;
  for (std::size_t i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng), 0.0);
  return pts;
}

}  // namespace

TEST(Supervoxels, TwoSeparatedCubes) {
  std::mt19937_64 rng(1);
  PointCloud c = cube_cluster(Point3(0, 0, 0), 300, rng);
  const auto far = cube_cluster(Point3(10, 10, 10), 300, rng);
  c.points.insert(c.points.end(), far.points.begin(), far.points.end());
  const auto voxels = segment_supervoxels(c, 1.0);
  ASSERT_EQ(voxels.size(), 2u);
  expect_partition(voxels, c.size());
  for (const auto& v : voxels) {
    const bool first = v.member_indices.front() < 300;
    for (std::size_t i : v.member_indices) EXPECT_EQ(i < 300, first);
    EXPECT_EQ(v.member_indices.size(), 300u);
  }
}

TEST(Supervoxels, PartitionAndCentroids) {
  const auto cloud = fixtures::sample_blob(3000);
  const auto voxels = segment_supervoxels(cloud, 0.15);
  expect_partition(voxels, cloud.size());
  for (const auto& v : voxels) {
    Point3 sum = Point3::Zero();
    for (std::size_t i : v.member_indices) sum += cloud.points[i];
    EXPECT_LT((v.centroid - sum / static_cast<double>(v.member_indices.size())).norm(), 1e-12);
  }
}

TEST(Supervoxels, PlanarCentroidsStayOnPlane) {
  PointCloud grid;
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 30; ++j) grid.points.emplace_back(0.1 * i, 0.1 * j, 0.3);
  const auto voxels = segment_supervoxels(grid, 0.3);
  EXPECT_GT(voxels.size(), 4u);
  for (const auto& v : voxels) EXPECT_NEAR(v.centroid.z(), 0.3, 1e-6);
}

TEST(Supervoxels, TooFewPoints) {
  PointCloud c;
  for (int i = 0; i < 9; ++i) c.points.emplace_back(i, i * i, 0);
  EXPECT_THROW(segment_supervoxels(c, 1.0), Error);
}

TEST(Adjacency, TouchingVoxelsAreMutual) {
  const auto c = line_cloud(2.0, 0.02);
  const auto g = build_adjacency(c, split_by_x(c, {1.0}));
  EXPECT_EQ(g.edges, (std::vector<GraphEdge>{{0, 1}, {1, 0}}));
}

TEST(Adjacency, NoEdgeAcrossIntermediateVoxel) {
  const auto c = line_cloud(6.0, 0.02);
  const auto g = build_adjacency(c, split_by_x(c, {2.0, 4.0}));
  EXPECT_EQ(g.edges, (std::vector<GraphEdge>{{0, 1}, {1, 0}, {1, 2}, {2, 1}}));
}

TEST(Adjacency, IncidenceMatchesEdges) {
  const auto cloud = fixtures::sample_blob(2000);
  StructureParams params;
  params.voxel_radius_fraction = 0.15;
  params.esf.samples = 200;
  const auto g = extract_structure(cloud, 3, params);
  const Eigen::MatrixXd tail = g.tail_incidence(), head = g.head_incidence();
  for (std::size_t c = 0; c < g.edge_count(); ++c) {
    EXPECT_EQ(tail(g.edges[c].from, c), 1.0);
    EXPECT_EQ(head(g.edges[c].to, c), 1.0);
    EXPECT_EQ(tail.col(c).sum(), 1.0);
    EXPECT_EQ(head.col(c).sum(), 1.0);
    EXPECT_NE(g.edges[c].from, g.edges[c].to);
  }
  EXPECT_EQ(canonical_edges(g.edges), g.edges);
}

TEST(Adjacency, RejectsNonPartition) {
  const auto c = line_cloud(2.0, 0.02);
  auto voxels = split_by_x(c, {1.0});
  voxels[1].member_indices.push_back(0);
  EXPECT_THROW(build_adjacency(c, voxels), Error);
}

TEST(Esf, SubHistogramsAreNormalized) {
  const auto pts = sphere_points(500, 4);
  const auto d = compute_esf(std::span<const Point3>(pts), 9);
  // A statistic that was never observed (no outside segments on a sphere
  // shell, say) stays all-zero; the rest sum to one.
  for (std::size_t p = 0; p < kEsfHistograms; ++p) {
    double sum = 0.0;
    for (double b : d.part(static_cast<EsfPart>(p))) {
      EXPECT_GE(b, 0.0);
      sum += b;
    }
    EXPECT_TRUE(std::abs(sum - 1.0) < 1e-6 || sum == 0.0) << "part " << p << " sums to " << sum;
  }
  double ratio_sum = 0.0;
  for (double b : d.part(EsfPart::kD2Ratio)) ratio_sum += b;
  EXPECT_NEAR(ratio_sum, 1.0, 1e-6);
}

TEST(Esf, RotationInvariantUpToSampling) {
  std::mt19937_64 rng(5);
  const auto cloud = fixtures::sample_blob(3000);
  std::vector<Point3> patch;
  for (const auto& p : cloud.points) {
    if (p.x() > 0.2) patch.push_back(p);
  }
  const auto base = compute_esf(std::span<const Point3>(patch), 17);
  for (int t = 0; t < 3; ++t) {
    const Matrix3 r = fixtures::random_rotation(rng);
    std::vector<Point3> rotated;
    for (const auto& p : patch) rotated.push_back(r * p);
    EXPECT_LT(base.distance(compute_esf(std::span<const Point3>(rotated), 17)), 0.05);
  }
}

TEST(Esf, SphereAndPlaneDiffer) {
  const auto s1 = sphere_points(800, 1), s2 = sphere_points(800, 2), plane = plane_points(800, 3);
  const auto d1 = compute_esf(std::span<const Point3>(s1), 7);
  const auto d2 = compute_esf(std::span<const Point3>(s2), 8);
  const auto dp = compute_esf(std::span<const Point3>(plane), 7);
  EXPECT_GT(d1.distance(dp), d1.distance(d2));
}

TEST(Esf, NeedsThreePoints) {
  const std::vector<Point3> two{{0, 0, 0}, {1, 0, 0}};
  EXPECT_THROW(compute_esf(std::span<const Point3>(two), 1), Error);
}

TEST(Structure, DeterministicAndConsistent) {
  const auto cloud = fixtures::sample_blob(2000);
  StructureParams params;
  params.voxel_radius_fraction = 0.15;
  params.esf.samples = 2000;
  const auto a = extract_structure(cloud, 42, params);
  const auto b = extract_structure(cloud, 42, params);
  EXPECT_EQ(a.centroids, b.centroids);
  EXPECT_EQ(a.descriptors, b.descriptors);
  EXPECT_EQ(a.edges, b.edges);
  EXPECT_EQ(a.edge_descriptors, b.edge_descriptors);
  EXPECT_LE(a.node_count(), cloud.size());

  auto recomputed = a;
  recomputed.refresh_edge_descriptors();
  for (std::size_t c = 0; c < a.edge_count(); ++c) {
    EXPECT_NEAR(recomputed.edge_descriptors[c].d, a.edge_descriptors[c].d, 1e-9);
    EXPECT_NEAR(recomputed.edge_descriptors[c].z_angle, a.edge_descriptors[c].z_angle, 1e-9);
  }
  for (const auto& d : a.descriptors) {
    for (std::size_t p = 0; p < kEsfHistograms; ++p) {
      double sum = 0.0;
      for (double v : d.part(static_cast<EsfPart>(p))) sum += v;
      EXPECT_TRUE(std::abs(sum - 1.0) < 1e-6 || sum == 0.0);
    }
  }
}

TEST(Structure, CentroidsSurviveHalvingTheDensity) {
  const auto cloud = fixtures::sample_blob(4000);
  const auto half = downsample_uniform(cloud, cloud.size() / 2);
  StructureParams params;
  params.voxel_radius_fraction = 0.15;
  params.esf.samples = 200;
  const auto full_graph = extract_structure(cloud, 1, params);
  const auto half_graph = extract_structure(half, 1, params);
  std::vector<Point3> centers = half_graph.centroids;
  PointCloud half_centers{centers, {}, "centers"};
  const SpatialIndex index(half_centers);
  std::size_t stable = 0;
  for (const auto& c : full_graph.centroids) {
    if (index.nearest(c).distance <= full_graph.voxel_radius) ++stable;
  }
  EXPECT_GE(static_cast<double>(stable), 0.6 * static_cast<double>(full_graph.node_count()));
}
