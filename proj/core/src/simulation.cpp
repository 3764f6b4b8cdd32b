#include "dpc/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "dpc/baselines.hpp"
#include "dpc/errors.hpp"
#include "dpc/metrics.hpp"
#include "dpc/rng.hpp"
#include "dpc/solver.hpp"

namespace dpc {

SeriesPanel generate_panel(int T, std::uint64_t seed) {
  if (T < 1) throw ConfigError("T must be positive");
  Rng rng(seed);
  Eigen::VectorXd v(T + 2);
  for (int t = 0; t < T + 2; ++t) v(t) = rng.next_normal();
  Eigen::MatrixXd z(T, 3);
  for (int i = 0; i < 3; ++i) {
    for (int t = 0; t < T; ++t) {
      z(t, i) = v(t + i) + 0.1 * rng.next_normal();
    }
  }
  return SeriesPanel::make(std::move(z));
}

SeriesPanel generate_one_factor_panel(int T, int m, std::uint64_t seed) {
  if (T < 1 || m < 1) throw ConfigError("T and m must be positive");
  Rng rng(seed);
  Eigen::VectorXd g(T);
  for (int t = 0; t < T; ++t) g(t) = 2.0 * rng.next_normal();
  Eigen::MatrixXd z(T, m);
  for (int i = 0; i < m; ++i) {
    const double lambda = 1.0 + static_cast<double>(i) / m;
    for (int t = 0; t < T; ++t) {
      z(t, i) = lambda * g(t) + 0.1 * rng.next_normal();
    }
  }
  return SeriesPanel::make(std::move(z));
}

Contamination contaminate(const SeriesPanel& panel, double prob, double shift,
                          std::uint64_t seed) {
  panel.validate();
  if (prob < 0.0 || prob > 1.0) throw ConfigError("probability out of [0,1]");
  Rng rng(seed);
  Contamination out;
  out.panel = panel;
  out.mask.setConstant(panel.rows(), panel.cols(), false);
  for (Eigen::Index t = 0; t < panel.rows(); ++t) {
    for (Eigen::Index j = 0; j < panel.cols(); ++j) {
      if (rng.next_uniform() < prob) {
        out.panel.values(t, j) += shift;
        out.mask(t, j) = true;
        ++out.affected;
      }
    }
  }
  return out;
}

std::string method_name(Method method) {
  switch (method) {
    case Method::Opc: return "OPC";
    case Method::Dpc: return "DPC";
    case Method::Bdpc: return "BDPC";
    case Method::Sdpc: return "SDPC";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "OPC" || name == "opc") return Method::Opc;
  if (name == "DPC" || name == "dpc") return Method::Dpc;
  if (name == "BDPC" || name == "bdpc") return Method::Bdpc;
  if (name == "SDPC" || name == "sdpc") return Method::Sdpc;
  throw ConfigError("unknown method '" + name + "'");
}

void McConfig::validate() const {
  if (T < 20) throw ConfigError("study needs T >= 20");
  if (replications < 1) throw ConfigError("study needs replications >= 1");
  if (methods.empty()) throw ConfigError("study needs at least one method");
  if (threads < 1) throw ConfigError("thread count must be >= 1");
  if (model != "s4" && model != "one-factor") {
    throw ConfigError("unknown simulation model '" + model + "'");
  }
  for (const auto& ms : methods) {
    if (ms.param < 0) throw ConfigError("negative method parameter");
  }
  if (mscale) mscale->validate();
}

namespace {

struct CellResult {
  bool ok = false;
  double mse = 0.0;
  double srs = 0.0;
  bool has_srs = false;
};

SeriesPanel make_study_panel(const McConfig& config, int rep) {
  // per-replication substream derived from (seed, replication index)
  Rng stream = Rng::stream(config.seed, static_cast<std::uint64_t>(rep));
  const std::uint64_t sub = stream.next_u64();
  if (config.model == "one-factor") {
    return generate_one_factor_panel(config.T, 10, sub);
  }
  return generate_panel(config.T, sub);
}

CellResult evaluate_method(const SeriesPanel& panel, const MethodSpec& spec,
                           const McConfig& config) {
  CellResult cell;
  switch (spec.method) {
    case Method::Opc: {
      const OpcFit fit = opc_fit(panel, 1);
      cell.mse = opc_reconstruct_lagged(panel, fit.scores.col(0),
                                        spec.param).mse;
      break;
    }
    case Method::Dpc: {
      SolverConfig cfg;
      cfg.k = spec.param;
      DpcComponent component = fit_component(panel, cfg);
      cell.mse = mse(panel, component);
      if (config.mscale) {
        RobustFitState state{component.f, component.beta, component.alpha,
                             Eigen::VectorXd()};
        cell.srs = srs(panel, state, *config.mscale);
        cell.has_srs = true;
      }
      break;
    }
    case Method::Bdpc: {
      const BdpcModel model = bdpc_fit(panel, spec.param);
      cell.mse = bdpc_reconstruct(panel, model).mse;
      break;
    }
    case Method::Sdpc: {
      SolverConfig cfg;
      cfg.k = spec.param;
      const MScaleSpec ms = config.mscale.value_or(MScaleSpec{});
      SComponentFit fit = fit_s_component(panel, cfg, ms);
      cell.mse = mse(panel, fit.component);
      cell.srs = fit.srs_value;
      cell.has_srs = true;
      break;
    }
  }
  cell.ok = true;
  return cell;
}

void summarize(MethodResult& row) {
  const auto moments = [](const std::vector<double>& xs, double& mean,
                          double& se) {
    const std::size_t n = xs.size();
    if (n == 0) {
      mean = se = 0.0;
      return;
    }
    long double acc = 0.0L;
    for (double x : xs) acc += x;
    mean = static_cast<double>(acc / n);
    if (n == 1) {
      se = 0.0;
      return;
    }
    long double ss = 0.0L;
    for (double x : xs) ss += (x - mean) * (x - mean);
    se = std::sqrt(static_cast<double>(ss) / ((n - 1.0) * n));
  };
  moments(row.mses, row.mean_mse, row.se_mse);
  if (!row.srss.empty()) {
    double mean = 0.0, se = 0.0;
    moments(row.srss, mean, se);
    row.mean_srs = mean;
    row.se_srs = se;
  }
}

}  // namespace

StudyResults run_study(const McConfig& config) {
  config.validate();
  const int reps = config.replications;
  const int n_methods = static_cast<int>(config.methods.size());

  std::vector<std::vector<CellResult>> grid(
      reps, std::vector<CellResult>(n_methods));

  const auto run_rep = [&](int rep) {
    const SeriesPanel panel = make_study_panel(config, rep);
    for (int mi = 0; mi < n_methods; ++mi) {
      try {
        grid[rep][mi] = evaluate_method(panel, config.methods[mi], config);
      } catch (const Error&) {
        grid[rep][mi].ok = false;
      }
    }
  };

  const int workers = std::min(config.threads, reps);
  if (workers <= 1) {
    for (int rep = 0; rep < reps; ++rep) run_rep(rep);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int rep = w; rep < reps; rep += workers) run_rep(rep);
      });
    }
    for (auto& th : pool) th.join();
  }

  StudyResults results;
  results.config = config;
  results.rows.resize(n_methods);
  for (int mi = 0; mi < n_methods; ++mi) {
    MethodResult& row = results.rows[mi];
    row.spec = config.methods[mi];
    for (int rep = 0; rep < reps; ++rep) {
      const CellResult& cell = grid[rep][mi];
      if (!cell.ok) {
        ++row.failed;
        continue;
      }
      ++row.ok;
      row.mses.push_back(cell.mse);
      if (cell.has_srs) row.srss.push_back(cell.srs);
    }
    summarize(row);
  }
  return results;
}

std::string render_table(const StudyResults& results) {
  std::ostringstream os;
  os << "T=" << results.config.T
     << "  replications=" << results.config.replications
     << "  seed=" << results.config.seed
     << "  model=" << results.config.model << "\n";
  os << "method  param      mean MSE        SE  fails";
  bool any_srs = false;
  for (const auto& row : results.rows) any_srs |= row.mean_srs.has_value();
  if (any_srs) os << "      mean SRS";
  os << "\n";
  char buf[160];
  for (const auto& row : results.rows) {
    std::snprintf(buf, sizeof buf, "%-6s %6d  %12.6g %9.3g  %5d",
                  method_name(row.spec.method).c_str(), row.spec.param,
                  row.mean_mse, row.se_mse, row.failed);
    os << buf;
    if (row.mean_srs) {
      std::snprintf(buf, sizeof buf, "  %12.6g", *row.mean_srs);
      os << buf;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace dpc
