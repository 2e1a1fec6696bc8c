#ifndef XREG_REGISTRATION_HPP_
#define XREG_REGISTRATION_HPP_

// End-to-end registration of a source cloud Q onto a target cloud P:
// scale normalization, structure extraction, graph matching, RANSAC over the
// matched supervoxel centroids, and ICP refinement.

#include "xreg/affinity.hpp"
#include "xreg/export.hpp"
#include "xreg/graph_matching.hpp"
#include "xreg/preprocess.hpp"
#include "xreg/structure.hpp"
#include "xreg/transform_estimation.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <type_traits>

namespace xreg {

struct RegistrationConfig {
  std::uint64_t seed = 0;
  // Supervoxel radius as a fraction of the cloud radius.
  double voxel_fraction = 0.15;
  AffinityMode affinity = AffinityMode::kSimilarity;
  RadiusMode scale_mode = RadiusMode::kMax;
  // Coarser path than MatchConfig's defaults, which run 101 alpha levels.
  MatchConfig match{.smooth_weight = 1.0, .alpha_step = 0.05, .max_inner_iterations = 30, .gap_tolerance = 1e-8};
  SupervoxelParams supervoxel;
  EsfParams esf;
  // Clouds are decimated to about this many points before structure extraction.
  std::size_t structure_points = 4000;
  std::size_t icp_points = 20000;
  double ransac_threshold_factor = 2.0;  // times the supervoxel radius
  int ransac_iterations = 2000;
  IcpParams icp;
  std::string debug_dir;  // when set, intermediate artifacts are written here
};

struct RegistrationDiagnostics {
  std::map<std::string, double> seconds;  // per stage wall time
  ScaleEstimate scale;
  std::size_t target_nodes = 0, source_nodes = 0;
  std::size_t target_edges = 0, source_edges = 0;
  std::size_t matches = 0;
  double match_score = 0.0;
  double match_smooth = 0.0;
  std::size_t ransac_inliers = 0;
  int ransac_iterations = 0;
  int icp_iterations = 0;
  double icp_rmse = 0.0;
  bool icp_converged = false;
  SimilarityTransform coarse;  // RANSAC estimate before ICP, in the same frames as the result
};

struct RegistrationResult {
  SimilarityTransform transform;  // maps the source cloud into the target frame
  RegistrationDiagnostics diagnostics;
};

namespace detail {

class StageTimer {
 public:
  explicit StageTimer(std::map<std::string, double>& sink) : sink_(sink) {}
  template <typename F>
  auto run(const std::string& stage, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(f())>) {
        f();
        sink_[stage] = elapsed(t0);
      } else {
        auto r = f();
        sink_[stage] = elapsed(t0);
        return r;
      }
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(stage, e.what());
    }
  }

 private:
  static double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  std::map<std::string, double>& sink_;
};

// Scaling about c: q -> c + s (q - c).
inline SimilarityTransform scaling_about(const Point3& c, double s) {
  SimilarityTransform t;
  t.scale = s;
  t.translation = (1.0 - s) * c;
  return t;
}

}  // namespace detail

inline RegistrationResult register_clouds(const PointCloud& target, const PointCloud& source,
                                          const RegistrationConfig& config = {}) {
  for (const PointCloud* c : {&target, &source}) {
    if (c->size() < 10) throw Error("preprocess", "cloud '" + c->id + "' has fewer than 10 points");
    validate(*c, "preprocess");
  }
  RegistrationResult result;
  auto& diag = result.diagnostics;
  detail::StageTimer timer(diag.seconds);
  const bool debug = !config.debug_dir.empty();
  if (debug) std::filesystem::create_directories(config.debug_dir);
  auto debug_path = [&](const std::string& name) { return (std::filesystem::path(config.debug_dir) / name).string(); };

  // Scale normalization of the source onto the target's radius.
  auto [scaled, est] = timer.run("preprocess", [&] { return normalize_scale(target, source, config.scale_mode); });
  diag.scale = est;
  const SimilarityTransform prescale = detail::scaling_about(centroid(source), est.scale);

  const PointCloud target_work = downsample_uniform(target, config.structure_points);
  const PointCloud source_work = downsample_uniform(scaled, config.structure_points);

  StructureParams sp;
  sp.voxel_radius_fraction = config.voxel_fraction;
  sp.supervoxel = config.supervoxel;
  sp.esf = config.esf;
  const StructureGraph g1 = timer.run("structure-extraction", [&] {
    return extract_structure(target_work, mix_seed(config.seed, 1), sp);
  });
  const StructureGraph g2 = timer.run("structure-extraction-source", [&] {
    return extract_structure(source_work, mix_seed(config.seed, 2), sp);
  });
  diag.target_nodes = g1.node_count();
  diag.source_nodes = g2.node_count();
  diag.target_edges = g1.edge_count();
  diag.source_edges = g2.edge_count();
  if (g1.node_count() < 3 || g2.node_count() < 3 || g1.edge_count() == 0 || g2.edge_count() == 0) {
    throw Error("structure-extraction", "too few supervoxels for graph matching (" +
                                            std::to_string(g1.node_count()) + " and " +
                                            std::to_string(g2.node_count()) + " nodes)");
  }

  const AffinityPair aff = timer.run("graph-construction", [&] { return compute_affinities(g1, g2, config.affinity); });
  const MatchingProblem problem = make_problem(g1, g2, aff);
  const MatchResult m = timer.run("graph-matching", [&] { return match(problem, config.match); });
  diag.match_score = m.score;
  diag.match_smooth = m.smooth;

  CorrespondenceSet pairs;
  for (std::size_t i = 0; i < m.assignment.row_to_col.size(); ++i) {
    const int j = m.assignment.row_to_col[i];
    if (j >= 0) pairs.add(g2.centroids[static_cast<std::size_t>(j)], g1.centroids[i]);
  }
  diag.matches = pairs.size();

  const RansacResult rs = timer.run("ransac", [&] {
    return ransac_rigid(pairs, config.ransac_threshold_factor * g1.voxel_radius, config.ransac_iterations,
                        mix_seed(config.seed, 3));
  });
  diag.ransac_inliers = rs.inliers;
  diag.ransac_iterations = rs.iterations;
  diag.coarse = rs.transform * prescale;

  const PointCloud icp_source = downsample_uniform(scaled, config.icp_points);
  const PointCloud icp_target = downsample_uniform(target, config.icp_points);
  const IcpResult icp = timer.run("icp", [&] { return icp_refine(icp_source, icp_target, rs.transform, config.icp); });
  diag.icp_iterations = icp.iterations;
  diag.icp_rmse = icp.final_rmse;
  diag.icp_converged = icp.converged;

  result.transform = icp.transform * prescale;

  if (debug) {
    save_supervoxel_ply(target_work, g1, debug_path("target_supervoxels.ply"), config.seed);
    save_supervoxel_ply(source_work, g2, debug_path("source_supervoxels.ply"), config.seed + 1);
    write_json(graph_to_json(g1), debug_path("target_graph.json"));
    write_json(graph_to_json(g2), debug_path("source_graph.json"));
    write_matrix_csv(aff.node, debug_path("node_affinity.csv"));
    write_matrix_csv(aff.edge, debug_path("edge_affinity.csv"));
    write_json(trace_to_json(m.state), debug_path("matching_trace.json"));
  }
  return result;
}

/// Baseline: scale normalization followed by ICP from the identity.
inline RegistrationResult register_icp_baseline(const PointCloud& target, const PointCloud& source,
                                                const RegistrationConfig& config = {}) {
  for (const PointCloud* c : {&target, &source}) {
    if (c->size() < 10) throw Error("preprocess", "cloud '" + c->id + "' has fewer than 10 points");
  }
  RegistrationResult result;
  detail::StageTimer timer(result.diagnostics.seconds);
  auto [scaled, est] = timer.run("preprocess", [&] { return normalize_scale(target, source, config.scale_mode); });
  result.diagnostics.scale = est;
  const SimilarityTransform prescale = detail::scaling_about(centroid(source), est.scale);
  const PointCloud icp_source = downsample_uniform(scaled, config.icp_points);
  const PointCloud icp_target = downsample_uniform(target, config.icp_points);
  const IcpResult icp = timer.run("icp", [&] {
    return icp_refine(icp_source, icp_target, SimilarityTransform::identity(), config.icp);
  });
  result.diagnostics.icp_iterations = icp.iterations;
  result.diagnostics.icp_rmse = icp.final_rmse;
  result.diagnostics.icp_converged = icp.converged;
  result.transform = icp.transform * prescale;
  return result;
}

inline Json diagnostics_to_json(const RegistrationDiagnostics& d) {
  Json j;
  j["scale"] = d.scale.scale;
  j["target_nodes"] = d.target_nodes;
  j["source_nodes"] = d.source_nodes;
  j["target_edges"] = d.target_edges;
  j["source_edges"] = d.source_edges;
  j["matches"] = d.matches;
  j["match_score"] = d.match_score;
  j["match_smooth"] = d.match_smooth;
  j["ransac_inliers"] = d.ransac_inliers;
  j["ransac_iterations"] = d.ransac_iterations;
  j["icp_iterations"] = d.icp_iterations;
  j["icp_rmse"] = d.icp_rmse;
  j["icp_converged"] = d.icp_converged;
  j["coarse"] = to_json(d.coarse);
  Json t;
  for (const auto& [stage, s] : d.seconds) t[stage] = s;
  j["seconds"] = t;
  return j;
}

}  // namespace xreg

#endif  // XREG_REGISTRATION_HPP_
