#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpc/panel.hpp"
#include "dpc/robust.hpp"

namespace dpc {

/// Three-series panel z(i,t) = v(t+i-1) + 0.1 w(i,t) with v, w iid N(0,1)
/// and v of length T+2; deterministic for a fixed seed.
SeriesPanel generate_panel(int T, std::uint64_t seed);

/// Static one-factor panel z(i,t) = lambda_i g_t + 0.1 w(i,t) with
/// lambda_i = 1 + i/m and g iid N(0, 4); used by the contamination study.
SeriesPanel generate_one_factor_panel(int T, int m, std::uint64_t seed);

struct Contamination {
  SeriesPanel panel;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask;  // T x m
  Eigen::Index affected = 0;
};

/// Independently shifts each cell by `shift` with probability `prob`
/// (cells visited row-major: time outer, series inner).
Contamination contaminate(const SeriesPanel& panel, double prob, double shift,
                          std::uint64_t seed);

enum class Method { Opc, Dpc, Bdpc, Sdpc };

std::string method_name(Method method);
Method parse_method(const std::string& name);

struct MethodSpec {
  Method method = Method::Dpc;
  int param = 0;  // k for OPC/DPC/SDPC, M for BDPC
};

struct McConfig {
  int T = 100;
  int replications = 50;
  std::uint64_t seed = 1;
  std::string model = "s4";  // panel generator name
  std::vector<MethodSpec> methods;
  std::optional<MScaleSpec> mscale;  // SDPC fitting / SRS reporting
  int threads = 1;

  void validate() const;
};

struct MethodResult {
  MethodSpec spec;
  int ok = 0;
  int failed = 0;
  double mean_mse = 0.0;
  double se_mse = 0.0;
  std::optional<double> mean_srs;
  std::optional<double> se_srs;
  std::vector<double> mses;  // per successful replication, in order
  std::vector<double> srss;
};

struct StudyResults {
  McConfig config;
  std::vector<MethodResult> rows;
};

/// Runs the Monte Carlo study. Replications may run on several threads; the
/// per-replication substream seeds and the ordered aggregation make the
/// result identical for any worker count.
StudyResults run_study(const McConfig& config);

/// Human-readable table of the study results.
std::string render_table(const StudyResults& results);

}  // namespace dpc
