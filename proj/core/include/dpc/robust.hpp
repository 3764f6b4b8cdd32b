#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "dpc/component.hpp"
#include "dpc/config.hpp"
#include "dpc/panel.hpp"

namespace dpc {

enum class RhoFamily {
  TukeyBiweight,  // bounded, max rho = 1
  Square,         // rho(x) = x^2; the scale is then RMS/sqrt(b)
};

struct MScaleSpec {
  RhoFamily family = RhoFamily::TukeyBiweight;
  double c = 5.13;  // Tukey cutoff
  double b = 0.1;   // target level of the scale equation

  void validate() const;
};

double rho(const MScaleSpec& spec, double x);
/// w0(u) = psi(u)/u, continuous at zero (6/c^2 for the Tukey family).
double rho_weight(const MScaleSpec& spec, double u);

/// M-scale: the root s of (1/n) sum rho(x_i / s) = b. Returns exactly 0 when
/// the fraction of zero entries is at least 1-b (exact-fit regime).
double m_scale(const Eigen::VectorXd& residuals, const MScaleSpec& spec);

struct RobustFitState {
  Eigen::VectorXd f;
  Eigen::MatrixXd beta;
  Eigen::VectorXd alpha;
  Eigen::VectorXd scales;  // per-series M-scales
};

/// Sum over series of squared M-scales of the residuals of `state`.
double srs(const SeriesPanel& panel, const RobustFitState& state,
           const MScaleSpec& spec);

struct RobustWeights {
  Eigen::MatrixXd w;  // m x T, w0(r_{j,t} / s_j)
  // m x T: s_j^2 w_{j,v} / sum_h w_{j,h} r_{j,h}^2. One value per
  // observation time; rows of the weighted system share these entries.
  Eigen::MatrixXd W;
};

/// Throws DegeneracyError when any series has scale zero.
RobustWeights robust_weights(const SeriesPanel& panel,
                             const RobustFitState& state,
                             const MScaleSpec& spec);

/// Weighted factor update: solves the W-weighted banded system. Reduces to
/// update_f for the square family with b = 1.
Eigen::VectorXd update_f_robust(const SeriesPanel& panel,
                                const RobustFitState& state,
                                const MScaleSpec& spec);

/// Per-series weighted least squares with frozen diagonal weights (m x T).
std::pair<Eigen::MatrixXd, Eigen::VectorXd> update_beta_alpha_robust(
    const SeriesPanel& panel, const Eigen::VectorXd& f,
    const Eigen::MatrixXd& weights);

struct SComponentFit {
  DpcComponent component;
  Eigen::VectorXd scales;
  double srs_value = 0.0;
};

/// Three-step S-estimation of one component: weighted factor solve, weighted
/// regression, scale refresh; stops on relative SRS improvement and keeps the
/// best-so-far iterate.
SComponentFit fit_s_component(const SeriesPanel& panel,
                              const SolverConfig& config,
                              const MScaleSpec& spec,
                              std::vector<double>* srs_trace = nullptr);

struct SModelFit {
  DpcModel model;
  std::vector<Eigen::VectorXd> scales;  // per component
};

/// Successive S-components on residual panels.
SModelFit fit_s(const SeriesPanel& panel, const SolverConfig& config,
                const MScaleSpec& spec);

}  // namespace dpc
