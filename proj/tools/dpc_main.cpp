// Command-line front end: fit, robust-fit, reconstruct, simulate, benchmark.
// Every command prints human-readable text followed by one machine-parsable
// JSON summary line on stdout.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "dpc/baselines.hpp"
#include "dpc/csv.hpp"
#include "dpc/errors.hpp"
#include "dpc/metrics.hpp"
#include "dpc/model_io.hpp"
#include "dpc/robust.hpp"
#include "dpc/simulation.hpp"
#include "dpc/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitNotConverged = 4;

int env_threads() {
  if (const char* env = std::getenv("DPC_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 0;  // unset
}

std::string sanitize_filename(const std::string& label) {
  std::string out;
  for (char ch : label) {
    out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' ||
            ch == '_')
               ? ch
               : '_';
  }
  return out.empty() ? "series" : out;
}

void print_summary(const json& j) { std::cout << j.dump() << std::endl; }

struct FitOptions {
  std::string input;
  std::string out;
  int k = 0;
  int p = 1;
  double epsilon = 1e-4;
  int max_iter = 500;
  std::string init = "auto";
  std::uint64_t seed = 0;
  bool strict = false;
  // robust-only
  double tukey_c = 5.13;
  double b = 0.1;
  std::string family = "tukey-biweight";
};

dpc::SolverConfig solver_config(const FitOptions& opt) {
  dpc::SolverConfig config;
  config.k = opt.k;
  config.p = opt.p;
  config.epsilon = opt.epsilon;
  config.max_iter = opt.max_iter;
  config.seed = opt.seed;
  if (opt.init == "auto") config.init = dpc::InitStrategy::Auto;
  else if (opt.init == "classical-pc") config.init = dpc::InitStrategy::ClassicalPc;
  else if (opt.init == "spherical-pc") config.init = dpc::InitStrategy::SphericalPc;
  else throw dpc::ConfigError("unknown init strategy '" + opt.init + "'");
  return config;
}

int finish_fit(const FitOptions& opt, const dpc::SeriesPanel& panel,
               const dpc::DpcModel& model, std::optional<dpc::RobustInfo> robust,
               const dpc::SolverConfig& config, const char* command,
               std::optional<double> srs_value) {
  const double tv = dpc::total_variance(panel);
  if (!(tv > 0.0)) {
    throw dpc::DegeneracyError("degenerate panel: total variance is zero");
  }
  json ev_list = json::array();
  std::cout << "fitted " << model.p() << " component(s), k=" << config.k
            << ", T=" << panel.rows() << ", m=" << panel.cols() << "\n";
  double final_mse = 0.0;
  bool all_converged = true;
  for (int s = 1; s <= model.p(); ++s) {
    const dpc::SeriesPanel& resid = model.residual_panels[s - 1];
    double mse_upto = 0.0;
    for (Eigen::Index j = 0; j < panel.cols(); ++j) {
      mse_upto += resid.values.col(j).squaredNorm() /
                  static_cast<double>(panel.rows());
    }
    const double ev = 100.0 * (1.0 - mse_upto / tv);
    ev_list.push_back(ev);
    const auto& conv = model.components[s - 1].convergence;
    all_converged = all_converged && conv.converged;
    std::cout << "component " << s << ": iterations=" << conv.iterations
              << " converged=" << (conv.converged ? "yes" : "no")
              << " criterion=" << conv.criterion
              << " cumulative_ev=" << ev << "\n";
    final_mse = mse_upto;
  }
  const double info = dpc::information_proportion(
      panel.rows(), panel.cols(), config.k, model.p());
  std::cout << "final mse=" << final_mse;
  if (srs_value) std::cout << " srs=" << *srs_value;
  std::cout << " information_proportion=" << info << "\n";

  dpc::ModelFile file;
  file.config = config;
  file.components = model.components;
  file.robust = std::move(robust);
  file.provenance.input_digest = dpc::fnv1a_digest_file(opt.input);
  file.provenance.timestamp = dpc::make_timestamp();
  file.provenance.seed = opt.seed;
  dpc::save_model(opt.out, file);

  json summary = {{"command", command},
                  {"ok", true},
                  {"mse", final_mse},
                  {"ev", ev_list},
                  {"information_proportion", info},
                  {"converged", all_converged},
                  {"out", opt.out}};
  if (srs_value) summary["srs"] = *srs_value;
  print_summary(summary);

  if (opt.strict && !all_converged) {
    std::cerr << "error: not converged within max_iter (strict mode)\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_fit(const FitOptions& opt) {
  const dpc::SeriesPanel panel = dpc::read_panel_csv(opt.input);
  const dpc::SolverConfig config = solver_config(opt);
  const dpc::DpcModel model = dpc::fit(panel, config);
  return finish_fit(opt, panel, model, std::nullopt, config, "fit",
                    std::nullopt);
}

int cmd_robust_fit(const FitOptions& opt) {
  const dpc::SeriesPanel panel = dpc::read_panel_csv(opt.input);
  const dpc::SolverConfig config = solver_config(opt);
  dpc::MScaleSpec spec;
  spec.c = opt.tukey_c;
  spec.b = opt.b;
  if (opt.family == "square") spec.family = dpc::RhoFamily::Square;
  else if (opt.family == "tukey-biweight" || opt.family == "tukey")
    spec.family = dpc::RhoFamily::TukeyBiweight;
  else throw dpc::ConfigError("unknown rho family '" + opt.family + "'");
  spec.validate();

  const dpc::SModelFit sfit = dpc::fit_s(panel, config, spec);
  // SRS of the full reconstruction (residuals after the last component)
  double total_srs = 0.0;
  {
    const dpc::SeriesPanel& resid = sfit.model.residual_panels.back();
    for (Eigen::Index j = 0; j < resid.cols(); ++j) {
      const double s = dpc::m_scale(resid.values.col(j), spec);
      total_srs += s * s;
    }
  }
  dpc::RobustInfo info;
  info.family = spec.family;
  info.c = spec.c;
  info.b = spec.b;
  info.scales = sfit.scales;
  return finish_fit(opt, panel, sfit.model, std::move(info), config,
                    "robust-fit", total_srs);
}

struct ReconstructOptions {
  std::string model;
  std::string input;
  int upto_p = 0;  // 0 means all
  std::string out;
  std::string residuals;
  std::string plotdata;
};

int cmd_reconstruct(const ReconstructOptions& opt) {
  const dpc::ModelFile file = dpc::load_model(opt.model);
  const dpc::SeriesPanel panel = dpc::read_panel_csv(opt.input);
  const dpc::DpcModel model = dpc::assemble_model(panel, file.components);
  const int upto = (opt.upto_p == 0) ? model.p() : opt.upto_p;
  if (upto < 1 || upto > model.p()) {
    throw dpc::ConfigError("--upto-p " + std::to_string(upto) +
                           " out of range 1.." + std::to_string(model.p()));
  }
  const dpc::SeriesPanel recon = dpc::reconstruct(model, upto);
  dpc::SeriesPanel resid;
  resid.values = panel.values - recon.values;
  resid.labels = panel.labels;

  double total = 0.0;
  for (Eigen::Index j = 0; j < panel.cols(); ++j) {
    total += resid.values.col(j).squaredNorm() /
             static_cast<double>(panel.rows());
  }
  const double ev = 100.0 * (1.0 - total / dpc::total_variance(panel));
  std::cout << "reconstruction with " << upto << " of " << model.p()
            << " component(s): mse=" << total << " ev=" << ev << "\n";

  if (!opt.out.empty()) dpc::write_panel_csv(opt.out, recon);
  if (!opt.residuals.empty()) dpc::write_panel_csv(opt.residuals, resid);
  if (!opt.plotdata.empty()) {
    fs::create_directories(opt.plotdata);
    char buf[128];
    for (Eigen::Index j = 0; j < panel.cols(); ++j) {
      const fs::path path = fs::path(opt.plotdata) /
                            (sanitize_filename(panel.labels[j]) + ".csv");
      std::ofstream out(path);
      if (!out) throw dpc::InputError("cannot write '" + path.string() + "'");
      out << "t,original,reconstructed\n";
      for (Eigen::Index t = 0; t < panel.rows(); ++t) {
        std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g",
                      static_cast<long long>(t + 1), panel.values(t, j),
                      recon.values(t, j));
        out << buf << '\n';
      }
    }
  }

  print_summary({{"command", "reconstruct"},
                 {"ok", true},
                 {"upto_p", upto},
                 {"mse", total},
                 {"ev", ev}});
  return kExitOk;
}

struct SimulateOptions {
  std::string model = "s4";
  int T = 100;
  int m = 10;
  std::uint64_t seed = 1;
  std::vector<double> contaminate;  // prob shift
  std::string mask;
  std::string out;
};

int cmd_simulate(const SimulateOptions& opt) {
  dpc::SeriesPanel panel;
  if (opt.model == "s4") {
    panel = dpc::generate_panel(opt.T, opt.seed);
  } else if (opt.model == "one-factor") {
    panel = dpc::generate_one_factor_panel(opt.T, opt.m, opt.seed);
  } else {
    throw dpc::ConfigError("unknown simulation model '" + opt.model + "'");
  }

  Eigen::Index affected = 0;
  if (!opt.contaminate.empty()) {
    if (opt.contaminate.size() != 2) {
      throw dpc::ConfigError("--contaminate needs: PROB SHIFT");
    }
    dpc::Contamination c = dpc::contaminate(panel, opt.contaminate[0],
                                            opt.contaminate[1], opt.seed + 1);
    affected = c.affected;
    panel = std::move(c.panel);
    if (!opt.mask.empty()) {
      std::ofstream mask_out(opt.mask);
      if (!mask_out) throw dpc::InputError("cannot write '" + opt.mask + "'");
      for (Eigen::Index j = 0; j < panel.cols(); ++j) {
        if (j) mask_out << ',';
        mask_out << panel.labels[j];
      }
      mask_out << '\n';
      for (Eigen::Index t = 0; t < c.mask.rows(); ++t) {
        for (Eigen::Index j = 0; j < c.mask.cols(); ++j) {
          if (j) mask_out << ',';
          mask_out << (c.mask(t, j) ? 1 : 0);
        }
        mask_out << '\n';
      }
    }
  }

  dpc::write_panel_csv(opt.out, panel);
  std::cout << "wrote " << panel.rows() << "x" << panel.cols() << " panel to "
            << opt.out;
  if (!opt.contaminate.empty()) std::cout << " (" << affected << " cells shifted)";
  std::cout << "\n";
  print_summary({{"command", "simulate"},
                 {"ok", true},
                 {"model", opt.model},
                 {"T", opt.T},
                 {"seed", opt.seed},
                 {"contaminated_cells", affected},
                 {"out", opt.out}});
  return kExitOk;
}

struct BenchmarkOptions {
  std::string config;
  std::string out = "results";
  int threads = 0;  // 0: fall back to DPC_THREADS, then the config file
};

dpc::McConfig default_study() {
  dpc::McConfig config;
  config.T = 100;
  config.replications = 50;
  config.seed = 20240501;
  config.model = "s4";
  config.methods = {{dpc::Method::Opc, 1},  {dpc::Method::Opc, 5},
                    {dpc::Method::Opc, 10}, {dpc::Method::Dpc, 1},
                    {dpc::Method::Dpc, 5},  {dpc::Method::Dpc, 10},
                    {dpc::Method::Bdpc, 10}, {dpc::Method::Bdpc, 20},
                    {dpc::Method::Bdpc, 50}};
  return config;
}

int cmd_benchmark(const BenchmarkOptions& opt) {
  dpc::McConfig config =
      opt.config.empty() ? default_study() : dpc::read_study_config(opt.config);
  // precedence: --threads flag, DPC_THREADS, config file, single thread
  if (opt.threads >= 1) {
    config.threads = opt.threads;
  } else if (const int env = env_threads(); env >= 1) {
    config.threads = env;
  } else if (config.threads < 1) {
    config.threads = 1;
  }
  const dpc::StudyResults results = dpc::run_study(config);

  fs::create_directories(opt.out);
  const fs::path dir(opt.out);
  dpc::write_results_csv(dir / "results.csv", results);
  dpc::write_results_json(dir / "results.json", results);
  const std::string table = dpc::render_table(results);
  {
    std::ofstream txt(dir / "results.txt");
    txt << table;
  }
  std::cout << table;

  json rows = json::array();
  for (const auto& row : results.rows) {
    rows.push_back({{"method", dpc::method_name(row.spec.method)},
                    {"param", row.spec.param},
                    {"mean_mse", row.mean_mse},
                    {"failed", row.failed}});
  }
  print_summary({{"command", "benchmark"},
                 {"ok", true},
                 {"out", opt.out},
                 {"rows", rows}});
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic principal components toolkit"};
  app.require_subcommand(1);

  FitOptions fit_opt;
  CLI::App* fit = app.add_subcommand("fit", "fit dynamic components by MSE");
  fit->add_option("input", fit_opt.input, "input CSV panel")->required();
  fit->add_option("--k", fit_opt.k, "forward lags");
  fit->add_option("--p", fit_opt.p, "components");
  fit->add_option("--epsilon", fit_opt.epsilon, "stopping tolerance");
  fit->add_option("--max-iter", fit_opt.max_iter, "iteration cap");
  fit->add_option("--init", fit_opt.init, "auto|classical-pc|spherical-pc");
  fit->add_option("--seed", fit_opt.seed, "seed for randomized fallbacks");
  fit->add_option("--out", fit_opt.out, "output model file")->required();
  fit->add_flag("--strict", fit_opt.strict, "exit 4 when not converged");

  FitOptions rob_opt;
  CLI::App* rob = app.add_subcommand("robust-fit",
                                     "fit S-estimator dynamic components");
  rob->add_option("input", rob_opt.input, "input CSV panel")->required();
  rob->add_option("--k", rob_opt.k, "forward lags");
  rob->add_option("--p", rob_opt.p, "components");
  rob->add_option("--epsilon", rob_opt.epsilon, "stopping tolerance");
  rob->add_option("--max-iter", rob_opt.max_iter, "iteration cap");
  rob->add_option("--init", rob_opt.init, "auto|classical-pc|spherical-pc");
  rob->add_option("--seed", rob_opt.seed, "seed for randomized fallbacks");
  rob->add_option("--tukey-c", rob_opt.tukey_c, "Tukey cutoff");
  rob->add_option("--b", rob_opt.b, "M-scale target");
  rob->add_option("--family", rob_opt.family, "tukey-biweight|square");
  rob->add_option("--out", rob_opt.out, "output model file")->required();
  rob->add_flag("--strict", rob_opt.strict, "exit 4 when not converged");

  ReconstructOptions rec_opt;
  CLI::App* rec = app.add_subcommand("reconstruct",
                                     "reconstruct a panel from a model");
  rec->add_option("model", rec_opt.model, "model JSON file")->required();
  rec->add_option("input", rec_opt.input, "input CSV panel")->required();
  rec->add_option("--upto-p", rec_opt.upto_p, "components to use (default all)");
  rec->add_option("--out", rec_opt.out, "reconstructed CSV");
  rec->add_option("--residuals", rec_opt.residuals, "residual CSV");
  rec->add_option("--plotdata", rec_opt.plotdata,
                  "directory for per-series plot data");

  SimulateOptions sim_opt;
  CLI::App* sim = app.add_subcommand("simulate", "generate study panels");
  sim->add_option("--model", sim_opt.model, "s4|one-factor");
  sim->add_option("--T", sim_opt.T, "series length");
  sim->add_option("--m", sim_opt.m, "series count (one-factor model)");
  sim->add_option("--seed", sim_opt.seed, "RNG seed");
  sim->add_option("--contaminate", sim_opt.contaminate,
                  "PROB SHIFT cellwise contamination")
      ->expected(2);
  sim->add_option("--mask", sim_opt.mask, "write the contamination mask CSV");
  sim->add_option("--out", sim_opt.out, "output CSV")->required();

  BenchmarkOptions bench_opt;
  CLI::App* bench = app.add_subcommand("benchmark", "run a Monte Carlo study");
  bench->add_option("--config", bench_opt.config, "study config JSON");
  bench->add_option("--out", bench_opt.out, "results directory");
  bench->add_option("--threads", bench_opt.threads,
                    "worker threads (default DPC_THREADS or 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*fit) return cmd_fit(fit_opt);
    if (*rob) return cmd_robust_fit(rob_opt);
    if (*rec) return cmd_reconstruct(rec_opt);
    if (*sim) return cmd_simulate(sim_opt);
    if (*bench) return cmd_benchmark(bench_opt);
  } catch (const dpc::DegeneracyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    print_summary({{"ok", false}, {"error", e.what()}});
    return kExitNumeric;
  } catch (const dpc::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    print_summary({{"ok", false}, {"error", e.what()}});
    return kExitNumeric;
  } catch (const dpc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    print_summary({{"ok", false}, {"error", e.what()}});
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}
