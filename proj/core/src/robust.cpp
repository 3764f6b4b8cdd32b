#include "dpc/robust.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <string>

#include "dpc/banded.hpp"
#include "dpc/errors.hpp"
#include "dpc/metrics.hpp"
#include "dpc/solver.hpp"

namespace dpc {

void MScaleSpec::validate() const {
  if (family == RhoFamily::TukeyBiweight && !(c > 0)) {
    throw ConfigError("Tukey cutoff c must be positive");
  }
  if (!(b > 0) || b > 1.0) throw ConfigError("scale target b must be in (0,1]");
}

double rho(const MScaleSpec& spec, double x) {
  if (spec.family == RhoFamily::Square) return x * x;
  const double u = std::abs(x);
  if (u >= spec.c) return 1.0;
  const double t = (u / spec.c) * (u / spec.c);
  return t * (3.0 - 3.0 * t + t * t);  // 1 - (1-t)^3 without cancellation
}

double rho_weight(const MScaleSpec& spec, double u) {
  if (spec.family == RhoFamily::Square) return 2.0;
  const double a = std::abs(u);
  if (a >= spec.c) return 0.0;
  const double t = 1.0 - (a / spec.c) * (a / spec.c);
  return 6.0 / (spec.c * spec.c) * t * t;
}

double m_scale(const Eigen::VectorXd& residuals, const MScaleSpec& spec) {
  spec.validate();
  const Eigen::Index n = residuals.size();
  if (n < 1) throw InputError("m_scale needs at least one residual");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(residuals(i))) {
      throw InputError("non-finite residual passed to m_scale");
    }
  }

  if (spec.family == RhoFamily::Square) {
    return std::sqrt(residuals.squaredNorm() / (static_cast<double>(n) *
                                                spec.b));
  }

  Eigen::Index zeros = 0;
  double max_abs = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (residuals(i) == 0.0) ++zeros;
    max_abs = std::max(max_abs, std::abs(residuals(i)));
  }
  // exact-fit regime: with a (1-b) fraction of zeros the equation has no
  // positive root
  const double nonzero_frac =
      static_cast<double>(n - zeros) / static_cast<double>(n);
  if (nonzero_frac <= spec.b || max_abs == 0.0) return 0.0;

  const auto level = [&](double s) {
    long double acc = 0.0L;
    for (Eigen::Index i = 0; i < n; ++i) acc += rho(spec, residuals(i) / s);
    return static_cast<double>(acc / static_cast<long double>(n)) - spec.b;
  };

  // level(s) decreases in s; bracket the root then bisect
  double hi = max_abs / spec.c;  // all rho saturated at any smaller s
  double lo = hi;
  while (level(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e3 * max_abs) break;
  }
  while (level(lo) < 0.0) {
    lo *= 0.5;
    if (lo < 1e-12 * max_abs) break;
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (level(mid) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double srs(const SeriesPanel& panel, const RobustFitState& state,
           const MScaleSpec& spec) {
  const Eigen::MatrixXd r =
      residual_matrix(panel, state.f, state.beta, state.alpha);
  long double total = 0.0L;
  for (Eigen::Index j = 0; j < r.cols(); ++j) {
    const double s = m_scale(r.col(j), spec);
    total += static_cast<long double>(s) * s;
  }
  return static_cast<double>(total);
}

RobustWeights robust_weights(const SeriesPanel& panel,
                             const RobustFitState& state,
                             const MScaleSpec& spec) {
  const Eigen::MatrixXd r =
      residual_matrix(panel, state.f, state.beta, state.alpha);
  const Eigen::Index T = r.rows();
  const Eigen::Index m = r.cols();
  if (state.scales.size() != m) {
    throw ShapeError("scales length does not match panel");
  }
  RobustWeights out;
  out.w.resize(m, T);
  out.W.resize(m, T);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double s = state.scales(j);
    if (!(s > 0.0)) {
      throw DegeneracyError("exact-fit degeneracy: series '" +
                            panel.labels[j] +
                            "' has zero robust scale; weighting is undefined");
    }
    double den = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) {
      out.w(j, t) = rho_weight(spec, r(t, j) / s);
      den += out.w(j, t) * r(t, j) * r(t, j);
    }
    if (!(den > 0.0)) {
      throw DegeneracyError("series '" + panel.labels[j] +
                            "' rejected every observation; cannot weight");
    }
    for (Eigen::Index t = 0; t < T; ++t) {
      out.W(j, t) = s * s * out.w(j, t) / den;
    }
  }
  return out;
}

namespace {

Eigen::VectorXd weighted_factor_solve(const SeriesPanel& panel,
                                      const RobustFitState& state,
                                      const RobustWeights& weights) {
  const Eigen::Index T = panel.rows();
  const Eigen::Index m = panel.cols();
  const Eigen::Index k = state.beta.cols() - 1;
  const Eigen::Index n = T + k;

  BandedSystem system{SymmetricBandMatrix(n, std::min(k, n - 1)),
                      Eigen::VectorXd::Zero(n)};
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index q = std::max<Eigen::Index>(0, t - k); q <= t; ++q) {
      const Eigen::Index v_lo = std::max<Eigen::Index>(0, t - k);
      const Eigen::Index v_hi = std::min(q, T - 1);
      double val = 0.0;
      for (Eigen::Index v = v_lo; v <= v_hi; ++v) {
        for (Eigen::Index j = 0; j < m; ++j) {
          val += weights.W(j, v) * state.beta(j, q - v) * state.beta(j, t - v);
        }
      }
      system.matrix.set(t, q, val);
    }
  }

  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::Index q_lo = std::max<Eigen::Index>(0, t - T + 1);
    const Eigen::Index q_hi = std::min<Eigen::Index>(k, t);
    double s = 0.0;
    for (Eigen::Index q = q_lo; q <= q_hi; ++q) {
      for (Eigen::Index j = 0; j < m; ++j) {
        s += weights.W(j, t - q) * (panel.values(t - q, j) - state.alpha(j)) *
             state.beta(j, q);
      }
    }
    system.rhs(t) = s;
  }
  return system.solve("robust factor update");
}

}  // namespace

Eigen::VectorXd update_f_robust(const SeriesPanel& panel,
                                const RobustFitState& state,
                                const MScaleSpec& spec) {
  return weighted_factor_solve(panel, state, robust_weights(panel, state, spec));
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> update_beta_alpha_robust(
    const SeriesPanel& panel, const Eigen::VectorXd& f,
    const Eigen::MatrixXd& weights) {
  panel.validate();
  const Eigen::Index T = panel.rows();
  const Eigen::Index m = panel.cols();
  const Eigen::Index k = f.size() - T;
  if (k < 0) throw ShapeError("factor shorter than the panel");
  if (weights.rows() != m || weights.cols() != T) {
    throw ShapeError("weight matrix must be m x T");
  }
  Eigen::MatrixXd design(T, k + 2);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (Eigen::Index i = 0; i <= k; ++i) design(t, i) = f(t + i);
    design(t, k + 1) = 1.0;
  }
  Eigen::MatrixXd beta(m, k + 1);
  Eigen::VectorXd alpha(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::VectorXd sq = weights.row(j).transpose().cwiseSqrt();
    const Eigen::MatrixXd wd = sq.asDiagonal() * design;
    const Eigen::VectorXd wz = sq.cwiseProduct(panel.values.col(j));
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(wd);
    if (qr.rank() < k + 2) {
      throw DegeneracyError("weighted regression is rank deficient for "
                            "series '" +
                            panel.labels[j] + "'");
    }
    const Eigen::VectorXd theta = qr.solve(wz);
    beta.row(j) = theta.head(k + 1).transpose();
    alpha(j) = theta(k + 1);
  }
  return {std::move(beta), std::move(alpha)};
}

namespace {

// Regression S-estimate approximated by iteratively reweighted least squares
// seeded from the plain LS fit.
Eigen::VectorXd irls_s_regression(const Eigen::MatrixXd& design,
                                  const Eigen::VectorXd& z,
                                  const MScaleSpec& spec, int rounds) {
  Eigen::VectorXd theta = design.colPivHouseholderQr().solve(z);
  for (int r = 0; r < rounds; ++r) {
    const Eigen::VectorXd resid = z - design * theta;
    const double s = m_scale(resid, spec);
    if (s == 0.0) break;
    Eigen::VectorXd sq(resid.size());
    for (Eigen::Index t = 0; t < resid.size(); ++t) {
      sq(t) = std::sqrt(rho_weight(spec, resid(t) / s));
    }
    theta = (sq.asDiagonal() * design)
                .colPivHouseholderQr()
                .solve(sq.cwiseProduct(z));
  }
  return theta;
}

Eigen::VectorXd per_series_scales(const SeriesPanel& panel,
                                  const RobustFitState& state,
                                  const MScaleSpec& spec) {
  const Eigen::MatrixXd r =
      residual_matrix(panel, state.f, state.beta, state.alpha);
  Eigen::VectorXd s(r.cols());
  for (Eigen::Index j = 0; j < r.cols(); ++j) s(j) = m_scale(r.col(j), spec);
  return s;
}

void require_positive_scales(const SeriesPanel& panel,
                             const Eigen::VectorXd& scales) {
  for (Eigen::Index j = 0; j < scales.size(); ++j) {
    if (!(scales(j) > 0.0)) {
      throw DegeneracyError(
          "exact-fit degeneracy: series '" + panel.labels[j] +
          "' is reconstructed exactly; use fewer components or drop it");
    }
  }
}

}  // namespace

SComponentFit fit_s_component(const SeriesPanel& panel,
                              const SolverConfig& config,
                              const MScaleSpec& spec,
                              std::vector<double>* srs_trace) {
  panel.validate();
  config.validate();
  spec.validate();
  const Eigen::Index T = panel.rows();
  const int k = config.k;
  if (T < k + 2) {
    throw ConfigError("T = " + std::to_string(T) +
                      " is too short for lag k = " + std::to_string(k) +
                      " (need T >= k+2)");
  }

  RobustFitState state;
  state.f = initial_factor(panel, config, /*robust=*/true);

  // start loadings: per-series regression S-estimate (IRLS approximation)
  {
    Eigen::MatrixXd design(T, k + 2);
    for (Eigen::Index t = 0; t < T; ++t) {
      for (Eigen::Index i = 0; i <= k; ++i) design(t, i) = state.f(t + i);
      design(t, k + 1) = 1.0;
    }
    state.beta.resize(panel.cols(), k + 1);
    state.alpha.resize(panel.cols());
    for (Eigen::Index j = 0; j < panel.cols(); ++j) {
      const Eigen::VectorXd theta =
          irls_s_regression(design, panel.values.col(j), spec, 20);
      state.beta.row(j) = theta.head(k + 1).transpose();
      state.alpha(j) = theta(k + 1);
    }
  }
  state.scales = per_series_scales(panel, state, spec);
  require_positive_scales(panel, state.scales);

  double prev = state.scales.squaredNorm();
  if (srs_trace) srs_trace->push_back(prev);

  RobustFitState best = state;
  double best_srs = prev;

  Convergence conv;
  conv.criterion = prev;
  conv.converged = false;

  for (int it = 0; it < config.max_iter && !conv.converged; ++it) {
    const RobustWeights weights = robust_weights(panel, state, spec);
    state.f = normalize_factor(weighted_factor_solve(panel, state, weights));
    std::tie(state.beta, state.alpha) =
        update_beta_alpha_robust(panel, state.f, weights.w);
    state.scales = per_series_scales(panel, state, spec);
    require_positive_scales(panel, state.scales);
    const double cur = state.scales.squaredNorm();
    if (srs_trace) srs_trace->push_back(cur);
    if (cur < best_srs) {
      best = state;
      best_srs = cur;
    }
    conv.iterations = it + 1;
    if (prev > 0.0 && (prev - cur) / prev < config.epsilon) {
      conv.converged = true;
    }
    prev = cur;
  }
  conv.criterion = best_srs;

  apply_sign_convention(best.f, best.beta);
  SComponentFit out;
  out.component.k = k;
  out.component.f = std::move(best.f);
  out.component.beta = std::move(best.beta);
  out.component.alpha = std::move(best.alpha);
  out.component.convergence = conv;
  out.scales = std::move(best.scales);
  out.srs_value = best_srs;
  return out;
}

SModelFit fit_s(const SeriesPanel& panel, const SolverConfig& config,
                const MScaleSpec& spec) {
  panel.validate();
  config.validate();
  SModelFit out;
  SeriesPanel resid = panel;
  for (int s = 0; s < config.p; ++s) {
    SComponentFit cf = fit_s_component(resid, config, spec);
    resid.values -= component_reconstruction(cf.component, panel.rows());
    out.model.components.push_back(std::move(cf.component));
    out.model.residual_panels.push_back(resid);
    out.scales.push_back(std::move(cf.scales));
  }
  return out;
}

}  // namespace dpc
