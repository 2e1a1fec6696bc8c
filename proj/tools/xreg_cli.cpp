// Command line front end: register, synth, eval, pipeline, bench, mesh.
//
// Every subcommand accepts --config FILE with INI-style "key = value" lines
// named after the long options (e.g. "seed = 7", "voxel-frac = 0.1"); a
// "[register]" style section scopes keys to one subcommand. Values given on
// the command line win over the file.

#include "xreg/xreg.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace xreg;

namespace {

struct PipelineOptions {
  std::uint64_t seed = 0;
  double voxel_frac = RegistrationConfig{}.voxel_fraction;
  std::string affinity = "similarity";
  double smooth_weight = 1.0;
  double alpha_step = RegistrationConfig{}.match.alpha_step;
  int inner_iterations = RegistrationConfig{}.match.max_inner_iterations;
  double ransac_factor = RegistrationConfig{}.ransac_threshold_factor;
  bool robust_scale = false;
  std::string debug_dir;
};

void add_pipeline_options(CLI::App* cmd, PipelineOptions& o) {
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--voxel-frac", o.voxel_frac, "Supervoxel radius as a fraction of the cloud radius")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--affinity", o.affinity, "Affinity orientation")
      ->check(CLI::IsMember({"similarity", "distance"}));
  cmd->add_option("--smooth-weight", o.smooth_weight, "Weight of the rigidity term (0 disables it)");
  cmd->add_option("--alpha-step", o.alpha_step, "Path-following step in alpha")->check(CLI::Range(1e-4, 1.0));
  cmd->add_option("--inner-iterations", o.inner_iterations, "Frank-Wolfe iterations per alpha")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--ransac-factor", o.ransac_factor, "RANSAC threshold in supervoxel radii")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--robust-scale", o.robust_scale, "Use the 95th-percentile radius for scale normalization");
  cmd->add_option("--debug-dir", o.debug_dir, "Write supervoxels, graphs, affinities and traces here");
}

RegistrationConfig to_config(const PipelineOptions& o) {
  RegistrationConfig c;
  c.seed = o.seed;
  c.voxel_fraction = o.voxel_frac;
  c.affinity = parse_affinity_mode(o.affinity);
  c.match.smooth_weight = o.smooth_weight;
  c.match.alpha_step = o.alpha_step;
  c.match.max_inner_iterations = o.inner_iterations;
  c.ransac_threshold_factor = o.ransac_factor;
  c.scale_mode = o.robust_scale ? RadiusMode::kPercentile95 : RadiusMode::kMax;
  c.debug_dir = o.debug_dir;
  return c;
}

SynthesisConfig preset(const std::string& name, std::uint64_t seed) {
  if (name == "database-c") return SynthesisConfig::database_c(seed);
  if (name == "clean") return SynthesisConfig::clean(seed);
  if (name == "same-source") return SynthesisConfig::same_source(seed, 30.0, 10.0, 0.2);
  throw Error("config", "unknown preset '" + name + "'");
}

// A mesh file, or a procedural mesh when the argument names one.
PointCloud load_mesh(const std::string& arg) {
  const auto names = procedural_mesh_names();
  if (std::find(names.begin(), names.end(), arg) != names.end() && !fs::exists(arg)) {
    return make_procedural_mesh(arg);
  }
  PointCloud m = load_cloud(arg);
  if (m.id.empty()) m.id = fs::path(arg).stem().string();
  return m;
}

void print_metrics(std::ostream& out, const SimilarityTransform& est, const SimilarityTransform& truth) {
  const double fn = fnorm_error(est, truth);
  out << std::setprecision(6) << "rotation_rmse_deg " << rotation_rmse(est, truth) << '\n'
      << "fnorm " << fn << '\n'
      << "log10_fnorm " << std::log10(fn) << '\n';
}

void print_timings(const RegistrationDiagnostics& d) {
  std::cerr << std::fixed << std::setprecision(3);
  for (const auto& [stage, s] : d.seconds) std::cerr << "  " << stage << ' ' << s << " s\n";
  std::cerr.unsetf(std::ios::floatfield);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-source point cloud registration by structure graph matching"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Key-value configuration file (command-line values take precedence)");

  // register
  PipelineOptions reg_opts;
  std::string source_path, target_path, out_path, matrix_path, registered_path, diag_path;
  auto* reg = app.add_subcommand("register", "Estimate the transform mapping SOURCE onto TARGET");
  reg->add_option("--source", source_path, "Cloud to move")->required()->check(CLI::ExistingFile);
  reg->add_option("--target", target_path, "Reference cloud")->required()->check(CLI::ExistingFile);
  reg->add_option("--out", out_path, "Transform JSON")->required();
  reg->add_option("--matrix-out", matrix_path, "Also write the 4x4 matrix as text");
  reg->add_option("--export-registered", registered_path, "Write the transformed source cloud");
  reg->add_option("--diagnostics", diag_path, "Write stage diagnostics as JSON");
  add_pipeline_options(reg, reg_opts);

  // synth
  std::string synth_mesh, synth_dir, synth_preset = "database-c";
  std::uint64_t synth_seed = 0;
  bool synth_ascii = false;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic cross-source pair from a mesh");
  synth->add_option("--mesh", synth_mesh, "Mesh file (PLY/OFF) or a procedural mesh name")->required();
  synth->add_option("--seed", synth_seed, "Random seed");
  synth->add_option("--out-dir", synth_dir, "Output directory")->required();
  synth->add_option("--preset", synth_preset, "Corruption preset")
      ->check(CLI::IsMember({"database-c", "clean", "same-source"}));
  synth->add_flag("--ascii", synth_ascii, "Write ASCII PLY instead of binary");

  // eval
  std::string est_path, truth_path;
  auto* eval = app.add_subcommand("eval", "Compare an estimated transform with the ground truth");
  eval->add_option("--estimated", est_path, "Estimated transform JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--truth", truth_path, "Ground-truth transform JSON")->required()->check(CLI::ExistingFile);

  // pipeline
  PipelineOptions pipe_opts;
  std::string pipe_mesh = "blob", pipe_dir = ".", pipe_preset = "database-c";
  bool pipe_baseline = false;
  auto* pipe = app.add_subcommand("pipeline", "Synthesize, register and evaluate in one run");
  pipe->add_option("--mesh", pipe_mesh, "Mesh file or procedural mesh name");
  pipe->add_option("--out-dir", pipe_dir, "Where transform.json, gt.json and report.csv go");
  pipe->add_option("--preset", pipe_preset, "Corruption preset")
      ->check(CLI::IsMember({"database-c", "clean", "same-source"}));
  pipe->add_flag("--baseline", pipe_baseline, "Also run the ICP baseline");
  add_pipeline_options(pipe, pipe_opts);

  // bench
  PipelineOptions bench_opts;
  std::string bench_meshes, bench_out = "report.csv", bench_preset = "database-c";
  int bench_trials = 1;
  bool bench_no_baseline = false;
  auto* bench = app.add_subcommand("bench", "Run the synthetic benchmark");
  bench->add_option("--meshes", bench_meshes,
                    "Directory of PLY/OFF meshes, or 'procedural' for the built-in set")->required();
  bench->add_option("--trials", bench_trials, "Trials per mesh")->check(CLI::PositiveNumber);
  bench->add_option("--out", bench_out, "CSV report");
  bench->add_option("--preset", bench_preset, "Corruption preset")
      ->check(CLI::IsMember({"database-c", "clean", "same-source"}));
  bench->add_flag("--no-baseline", bench_no_baseline, "Skip the ICP baseline");
  add_pipeline_options(bench, bench_opts);

  // mesh
  std::string mesh_name, mesh_out;
  int mesh_detail = 4;
  auto* mesh = app.add_subcommand("mesh", "Write a built-in procedural mesh as OFF");
  mesh->add_option("--name", mesh_name, "Mesh name")->required()->check(CLI::IsMember(procedural_mesh_names()));
  mesh->add_option("--out", mesh_out, "Output file")->required();
  mesh->add_option("--detail", mesh_detail, "Subdivision level")->check(CLI::Range(2, 6));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*reg) {
      const PointCloud source = load_cloud(source_path), target = load_cloud(target_path);
      const auto result = register_clouds(target, source, to_config(reg_opts));
      write_transform_json(result.transform, out_path);
      if (!matrix_path.empty()) write_transform_matrix(result.transform, matrix_path);
      if (!registered_path.empty()) {
        save_cloud(apply_transform(source, result.transform), registered_path, CloudFormat::kPlyBinaryLE);
      }
      if (!diag_path.empty()) write_json(diagnostics_to_json(result.diagnostics), diag_path);
      print_timings(result.diagnostics);
    } else if (*synth) {
      const auto pair = synthesize_pair(load_mesh(synth_mesh), preset(synth_preset, synth_seed));
      fs::create_directories(synth_dir);
      const auto fmt = synth_ascii ? CloudFormat::kPlyAscii : CloudFormat::kPlyBinaryLE;
      save_cloud(pair.s1, (fs::path(synth_dir) / "S1.ply").string(), fmt);
      save_cloud(pair.s2, (fs::path(synth_dir) / "S2.ply").string(), fmt);
      write_transform_json(pair.ground_truth, (fs::path(synth_dir) / "gt.json").string());
      std::cout << "S1 " << pair.s1.size() << " points, S2 " << pair.s2.size() << " points\n";
    } else if (*eval) {
      print_metrics(std::cout, read_transform_json(est_path), read_transform_json(truth_path));
    } else if (*pipe) {
      PointCloud m = load_mesh(pipe_mesh);
      fs::create_directories(pipe_dir);
      const auto pair = synthesize_pair(m, preset(pipe_preset, pipe_opts.seed));
      const RegistrationConfig cfg = to_config(pipe_opts);
      const auto result = register_clouds(pair.s1, pair.s2, cfg);
      write_transform_json(result.transform, (fs::path(pipe_dir) / "transform.json").string());
      write_transform_json(pair.ground_truth, (fs::path(pipe_dir) / "gt.json").string());

      BenchmarkReport report;
      report.rows.push_back(detail::score_run(m.id, 0, "pipeline", pair.ground_truth, [&] { return result.transform; }));
      if (pipe_baseline) {
        report.rows.push_back(detail::score_run(m.id, 0, "icp", pair.ground_truth,
                                                [&] { return register_icp_baseline(pair.s1, pair.s2, cfg).transform; }));
      }
      report.write_csv((fs::path(pipe_dir) / "report.csv").string());
      print_metrics(std::cout, result.transform, pair.ground_truth);
      print_timings(result.diagnostics);
    } else if (*bench) {
      std::vector<PointCloud> meshes;
      if (bench_meshes == "procedural") {
        for (const auto& name : procedural_mesh_names()) meshes.push_back(make_procedural_mesh(name));
      } else {
        if (!fs::is_directory(bench_meshes)) throw Error("benchmark", bench_meshes + " is not a directory");
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(bench_meshes)) {
          const auto ext = e.path().extension().string();
          if (ext == ".ply" || ext == ".off" || ext == ".PLY" || ext == ".OFF") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) meshes.push_back(load_mesh(f.string()));
      }
      BenchmarkConfig bc;
      bc.seed = bench_opts.seed;
      bc.trials = bench_trials;
      bc.registration = to_config(bench_opts);
      bc.run_baseline = !bench_no_baseline;
      const std::string p = bench_preset;
      bc.synthesis = [p](std::uint64_t s) { return preset(p, s); };
      const auto report = run_benchmark(meshes, bc);
      report.write_csv(bench_out);
      report.print_summary(std::cout);
    } else if (*mesh) {
      save_cloud(make_procedural_mesh(mesh_name, mesh_detail), mesh_out, CloudFormat::kOff);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
