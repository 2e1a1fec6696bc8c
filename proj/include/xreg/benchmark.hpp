#ifndef XREG_BENCHMARK_HPP_
#define XREG_BENCHMARK_HPP_

// Synthetic benchmark: for each mesh and trial, generate a pair, register it
// with the full pipeline and with the ICP baseline, and score both.

#include "xreg/metrics.hpp"
#include "xreg/registration.hpp"
#include "xreg/synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace xreg {

struct BenchmarkRow {
  std::string mesh;
  int trial = 0;
  std::string method;  // "pipeline" or "icp"
  double rotation_rmse_deg = std::numeric_limits<double>::quiet_NaN();
  double fnorm = std::numeric_limits<double>::quiet_NaN();
  std::string status = "ok";  // otherwise "failed: <stage>: <message>"

  bool ok() const noexcept { return status == "ok"; }
};

struct MethodSummary {
  std::string mesh;  // "all" for the overall line
  std::string method;
  std::size_t runs = 0, failures = 0;
  double mean_rotation = 0.0, median_rotation = 0.0;
  double mean_fnorm = 0.0, median_fnorm = 0.0;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;

  /// Per mesh and method, plus an "all" line per method. Failed runs are
  /// counted but excluded from the statistics.
  std::vector<MethodSummary> summary() const {
    std::vector<std::pair<std::string, std::string>> keys;
    for (const auto& r : rows) {
      for (const auto& m : {r.mesh, std::string("all")}) {
        if (std::find(keys.begin(), keys.end(), std::pair{m, r.method}) == keys.end()) keys.emplace_back(m, r.method);
      }
    }
    std::vector<MethodSummary> out;
    for (const auto& [mesh, method] : keys) {
      MethodSummary s;
      s.mesh = mesh;
      s.method = method;
      std::vector<double> rot, fn;
      for (const auto& r : rows) {
        if (r.method != method || (mesh != "all" && r.mesh != mesh)) continue;
        ++s.runs;
        if (!r.ok()) {
          ++s.failures;
          continue;
        }
        rot.push_back(r.rotation_rmse_deg);
        fn.push_back(r.fnorm);
      }
      s.mean_rotation = mean(rot);
      s.median_rotation = median(rot);
      s.mean_fnorm = mean(fn);
      s.median_fnorm = median(fn);
      out.push_back(s);
    }
    return out;
  }

  double mean_rotation(const std::string& method) const {
    for (const auto& s : summary()) {
      if (s.mesh == "all" && s.method == method) return s.mean_rotation;
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

  void write_csv(std::ostream& out) const {
    out << "mesh,trial,method,rotation_rmse_deg,fnorm,log10_fnorm,status\n";
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& r : rows) {
      out << r.mesh << ',' << r.trial << ',' << r.method << ',' << r.rotation_rmse_deg << ',' << r.fnorm << ','
          << std::log10(r.fnorm) << ',' << csv_field(r.status) << '\n';
    }
  }

  void write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("io", "cannot open " + path + " for writing");
    write_csv(out);
  }

  void print_summary(std::ostream& out) const {
    out << std::left << std::setw(16) << "mesh" << std::setw(10) << "method" << std::right << std::setw(6) << "runs"
        << std::setw(7) << "fail" << std::setw(12) << "mean_rot" << std::setw(12) << "median_rot" << std::setw(12)
        << "mean_fn" << std::setw(12) << "median_fn" << '\n';
    out << std::fixed << std::setprecision(4);
    for (const auto& s : summary()) {
      out << std::left << std::setw(16) << s.mesh << std::setw(10) << s.method << std::right << std::setw(6) << s.runs
          << std::setw(7) << s.failures << std::setw(12) << s.mean_rotation << std::setw(12) << s.median_rotation
          << std::setw(12) << s.mean_fnorm << std::setw(12) << s.median_fnorm << '\n';
    }
    out.unsetf(std::ios::floatfield);
  }

 private:
  static double mean(const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  }
  static double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  }
  static std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  }
};

struct BenchmarkConfig {
  std::uint64_t seed = 0;
  int trials = 1;
  RegistrationConfig registration;
  // Builds the synthesis settings of one trial from its seed.
  std::function<SynthesisConfig(std::uint64_t)> synthesis = [](std::uint64_t s) { return SynthesisConfig::database_c(s); };
  bool run_baseline = true;
};

namespace detail {

inline std::uint64_t string_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

template <typename F>
BenchmarkRow score_run(const std::string& mesh, int trial, const std::string& method, const SimilarityTransform& truth,
                       F&& run) {
  BenchmarkRow row;
  row.mesh = mesh;
  row.trial = trial;
  row.method = method;
  try {
    const SimilarityTransform est = run();
    row.rotation_rmse_deg = rotation_rmse(est, truth);
    row.fnorm = fnorm_error(est, truth);
  } catch (const Error& e) {
    row.status = std::string("failed: ") + e.what();
  } catch (const std::exception& e) {
    row.status = std::string("failed: ") + e.what();
  }
  return row;
}

}  // namespace detail

/// Seed of one trial, derived from (seed, mesh id, trial).
inline std::uint64_t trial_seed(std::uint64_t seed, const std::string& mesh, int trial) {
  return mix_seed(mix_seed(seed, detail::string_hash(mesh)), static_cast<std::uint64_t>(trial));
}

inline BenchmarkReport run_benchmark(const std::vector<PointCloud>& meshes, const BenchmarkConfig& config) {
  if (meshes.empty()) throw Error("benchmark", "no meshes given");
  if (config.trials < 1) throw Error("benchmark", "trial count must be positive");
  BenchmarkReport report;
  for (const auto& mesh : meshes) {
    for (int t = 0; t < config.trials; ++t) {
      const std::uint64_t s = trial_seed(config.seed, mesh.id, t);
      SyntheticPair pair;
      try {
        pair = synthesize_pair(mesh, config.synthesis(s));
      } catch (const Error& e) {
        for (const char* method : {"pipeline", "icp"}) {
          if (!config.run_baseline && std::string(method) == "icp") continue;
          BenchmarkRow row;
          row.mesh = mesh.id;
          row.trial = t;
          row.method = method;
          row.status = std::string("failed: ") + e.what();
          report.rows.push_back(row);
        }
        continue;
      }
      RegistrationConfig rc = config.registration;
      rc.seed = s;
      report.rows.push_back(detail::score_run(mesh.id, t, "pipeline", pair.ground_truth,
                                              [&] { return register_clouds(pair.s1, pair.s2, rc).transform; }));
      if (config.run_baseline) {
        report.rows.push_back(detail::score_run(mesh.id, t, "icp", pair.ground_truth,
                                                [&] { return register_icp_baseline(pair.s1, pair.s2, rc).transform; }));
      }
    }
  }
  return report;
}

}  // namespace xreg

#endif  // XREG_BENCHMARK_HPP_
