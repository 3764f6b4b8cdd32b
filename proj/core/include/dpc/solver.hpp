#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "dpc/banded.hpp"
#include "dpc/component.hpp"
#include "dpc/config.hpp"
#include "dpc/panel.hpp"

namespace dpc {

/// Centers and rescales so that mean(f) = 0 and sum(f^2) = len(f).
Eigen::VectorXd normalize_factor(const Eigen::VectorXd& f);

/// Flips (f, beta) so the largest-magnitude entry of f is positive;
/// the earliest index wins ties.
void apply_sign_convention(Eigen::VectorXd& f, Eigen::MatrixXd& beta);

/// Per-series (T+k) x (k+1) matrices of centered observations: row t collects
/// the observations that f_t multiplies. Entry (t, q) is z(t-q, j) - alpha(j)
/// on the band max(0, t-T+1) <= q <= min(k, t) (0-based), zero elsewhere.
std::vector<Eigen::MatrixXd> build_c(const SeriesPanel& panel,
                                     const Eigen::VectorXd& alpha, int k);

/// Symmetric banded Gram matrix of the loadings, size (T+k), bandwidth k.
SymmetricBandMatrix build_d(const Eigen::MatrixXd& beta, Eigen::Index T);

/// The factor-update system D(beta) f = sum_j C_j(alpha) beta_j.
BandedSystem build_factor_system(const SeriesPanel& panel,
                                 const Eigen::MatrixXd& beta,
                                 const Eigen::VectorXd& alpha);

/// Solves the factor-update system.
Eigen::VectorXd update_f(const SeriesPanel& panel, const Eigen::MatrixXd& beta,
                         const Eigen::VectorXd& alpha);

/// Per-series least squares of z(j) on (f_t, ..., f_{t+k}, 1).
std::pair<Eigen::MatrixXd, Eigen::VectorXd> update_beta_alpha(
    const SeriesPanel& panel, const Eigen::VectorXd& f);

/// Initial factor per the config, zero-padded to length T+k and normalized.
/// Falls back to a seeded random start when the panel is degenerate.
Eigen::VectorXd initial_factor(const SeriesPanel& panel,
                               const SolverConfig& config, bool robust);

/// Alternating fit of a single component. When `mse_trace` is given, the MSE
/// after every beta/alpha refresh is appended (starting with the initial fit).
DpcComponent fit_component(const SeriesPanel& panel, const SolverConfig& config,
                           std::vector<double>* mse_trace = nullptr);

/// Fits p components, each on the residuals of the previous ones.
DpcModel fit(const SeriesPanel& panel, const SolverConfig& config);

/// Sum of the reconstructions of components 0..upto_p-1 (1-based count).
SeriesPanel reconstruct(const DpcModel& model, int upto_p);

/// Rebuilds a DpcModel (with residual panels) from bare components.
DpcModel assemble_model(const SeriesPanel& panel,
                        std::vector<DpcComponent> components);

struct StructureCaps {
  int k_max = 10;
  int p_max = 3;
};

struct StructureStep {
  int component = 0;  // 0-based index of the component being grown
  int k = 0;
  double mse = 0.0;
  bool accepted = false;
};

struct StructureSelection {
  int k = 0;  // lag count of the last fitted component
  int p = 0;
  bool target_met = false;
  std::vector<int> lags;  // per-component lag counts
  DpcModel model;
  std::vector<StructureStep> trace;
  double mse = 0.0;
};

/// Greedy structure search: grow k for the current component while the
/// relative MSE reduction is at least epsilon_lag, then add a component;
/// stop when the MSE reaches mse_target or the caps are hit.
StructureSelection select_structure(const SeriesPanel& panel,
                                    double epsilon_lag, double mse_target,
                                    StructureCaps caps,
                                    const SolverConfig& base = {});

}  // namespace dpc
