#ifndef XREG_EXPORT_HPP_
#define XREG_EXPORT_HPP_

// JSON and text interchange: transforms, structure graphs, optimizer traces,
// and a colored supervoxel PLY for inspection.

#include "xreg/cloud_io.hpp"
#include "xreg/graph_matching.hpp"
#include "xreg/structure.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <string>

namespace xreg {

using Json = nlohmann::ordered_json;

inline Json to_json(const SimilarityTransform& t) {
  Json j;
  j["scale"] = t.scale;
  Json r = Json::array();
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) r.push_back(t.rotation(row, col));
  }
  j["rotation"] = r;
  j["translation"] = {t.translation.x(), t.translation.y(), t.translation.z()};
  return j;
}

inline SimilarityTransform transform_from_json(const Json& j) {
  try {
    SimilarityTransform t;
    t.scale = j.at("scale").get<double>();
    const auto& r = j.at("rotation");
    if (r.size() != 9) throw Error("io", "rotation must hold 9 row-major values");
    for (int k = 0; k < 9; ++k) t.rotation(k / 3, k % 3) = r.at(k).get<double>();
    const auto& tr = j.at("translation");
    if (tr.size() != 3) throw Error("io", "translation must hold 3 values");
    for (int k = 0; k < 3; ++k) t.translation[k] = tr.at(k).get<double>();
    return t;
  } catch (const Json::exception& e) {
    throw Error("io", std::string("malformed transform JSON: ") + e.what());
  }
}

inline void write_json(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

inline Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error("io", path + ": " + e.what());
  }
}

inline void write_transform_json(const SimilarityTransform& t, const std::string& path) {
  write_json(to_json(t), path);
}

inline SimilarityTransform read_transform_json(const std::string& path) {
  return transform_from_json(read_json(path));
}

/// 4x4 homogeneous matrix, row-major, whitespace separated.
inline void write_transform_matrix(const SimilarityTransform& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot open " + path + " for writing");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  const Matrix4 m = t.matrix();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) out << (c ? " " : "") << m(r, c);
    out << '\n';
  }
}

inline SimilarityTransform read_transform_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path);
  Matrix4 m;
  for (int k = 0; k < 16; ++k) {
    if (!(in >> m(k / 4, k % 4))) throw Error("io", path + ": expected 16 numbers");
  }
  return SimilarityTransform::from_matrix(m);
}

inline Json graph_to_json(const StructureGraph& g) {
  Json nodes = Json::array();
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    Json n;
    n["centroid"] = {g.centroids[i].x(), g.centroids[i].y(), g.centroids[i].z()};
    if (i < g.voxels.size()) n["size"] = g.voxels[i].member_indices.size();
    nodes.push_back(n);
  }
  Json edges = Json::array();
  for (const auto& e : g.edges) edges.push_back({e.from, e.to});
  Json j;
  j["radius"] = g.radius;
  j["voxel_radius"] = g.voxel_radius;
  j["nodes"] = nodes;
  j["edges"] = edges;
  return j;
}

inline Json trace_to_json(const PathFollowingState& s) {
  Json steps = Json::array();
  for (const auto& t : s.trace) {
    Json j;
    j["alpha"] = t.alpha;
    j["iterations"] = t.iterations;
    j["best_objective"] = t.objective.empty() ? 0.0 : t.objective.back();
    j["candidate_score"] = t.candidate_score;
    steps.push_back(j);
  }
  return Json{{"trace", steps}};
}

/// Points colored per supervoxel with seeded random colors.
inline void save_supervoxel_ply(const PointCloud& cloud, const StructureGraph& g, const std::string& path,
                                std::uint64_t seed = 0) {
  std::vector<std::array<std::uint8_t, 3>> colors(cloud.size(), {128, 128, 128});
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> channel(40, 255);
  for (const auto& v : g.voxels) {
    const std::array<std::uint8_t, 3> c{static_cast<std::uint8_t>(channel(rng)), static_cast<std::uint8_t>(channel(rng)),
                                        static_cast<std::uint8_t>(channel(rng))};
    for (std::size_t i : v.member_indices) colors.at(i) = c;
  }
  PointCloud bare;
  bare.points = cloud.points;
  bare.id = cloud.id;
  save_cloud(bare, path, CloudFormat::kPlyBinaryLE, &colors);
}

}  // namespace xreg

#endif  // XREG_EXPORT_HPP_
