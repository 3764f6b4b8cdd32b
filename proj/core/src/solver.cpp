#include "dpc/solver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dpc/errors.hpp"
#include "dpc/metrics.hpp"
#include "dpc/rng.hpp"

namespace dpc {

Eigen::VectorXd normalize_factor(const Eigen::VectorXd& f) {
  const Eigen::Index n = f.size();
  const Eigen::VectorXd centered = f.array() - f.mean();
  const double norm = centered.norm();
  if (!std::isfinite(norm) || norm < 1e-200) {
    throw DegeneracyError("factor collapsed to a constant during update");
  }
  return std::sqrt(static_cast<double>(n)) * centered / norm;
}

void apply_sign_convention(Eigen::VectorXd& f, Eigen::MatrixXd& beta) {
  Eigen::Index arg = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double a = std::abs(f(i));
    if (a > best) {
      best = a;
      arg = i;
    }
  }
  if (f(arg) < 0) {
    f = -f;
    beta = -beta;
  }
}

std::vector<Eigen::MatrixXd> build_c(const SeriesPanel& panel,
                                     const Eigen::VectorXd& alpha, int k) {
  panel.validate();
  if (k < 0) throw ConfigError("lag count k must be >= 0");
  const Eigen::Index T = panel.rows();
  const Eigen::Index m = panel.cols();
  if (alpha.size() != m) throw ShapeError("alpha length does not match panel");
  const Eigen::Index n = T + k;
  std::vector<Eigen::MatrixXd> out;
  out.reserve(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, k + 1);
    for (Eigen::Index t = 0; t < n; ++t) {
      const Eigen::Index q_lo = std::max<Eigen::Index>(0, t - T + 1);
      const Eigen::Index q_hi = std::min<Eigen::Index>(k, t);
      for (Eigen::Index q = q_lo; q <= q_hi; ++q) {
        c(t, q) = panel.values(t - q, j) - alpha(j);
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

SymmetricBandMatrix build_d(const Eigen::MatrixXd& beta, Eigen::Index T) {
  const Eigen::Index m = beta.rows();
  const Eigen::Index k = beta.cols() - 1;
  if (m < 1 || k < 0) throw ShapeError("beta must be m x (k+1) with m >= 1");
  if (T < 1) throw ShapeError("T must be positive");
  const Eigen::Index n = T + k;
  SymmetricBandMatrix d(n, std::min(k, n - 1));
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index q = std::max<Eigen::Index>(0, t - k); q <= t; ++q) {
      // v ranges over observation times contributing to both f_t and f_q
      const Eigen::Index v_lo = std::max<Eigen::Index>(0, t - k);
      const Eigen::Index v_hi = std::min(q, T - 1);
      double val = 0.0;
      for (Eigen::Index v = v_lo; v <= v_hi; ++v) {
        for (Eigen::Index j = 0; j < m; ++j) {
          val += beta(j, q - v) * beta(j, t - v);
        }
      }
      if (t - q <= d.bandwidth()) d.set(t, q, val);
    }
  }
  return d;
}

BandedSystem build_factor_system(const SeriesPanel& panel,
                                 const Eigen::MatrixXd& beta,
                                 const Eigen::VectorXd& alpha) {
  panel.validate();
  const Eigen::Index T = panel.rows();
  const Eigen::Index m = panel.cols();
  const Eigen::Index k = beta.cols() - 1;
  if (beta.rows() != m) throw ShapeError("beta rows do not match panel");
  if (alpha.size() != m) throw ShapeError("alpha length does not match panel");
  const Eigen::Index n = T + k;

  BandedSystem system{build_d(beta, T), Eigen::VectorXd::Zero(n)};
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::Index q_lo = std::max<Eigen::Index>(0, t - T + 1);
    const Eigen::Index q_hi = std::min<Eigen::Index>(k, t);
    double s = 0.0;
    for (Eigen::Index q = q_lo; q <= q_hi; ++q) {
      for (Eigen::Index j = 0; j < m; ++j) {
        s += (panel.values(t - q, j) - alpha(j)) * beta(j, q);
      }
    }
    system.rhs(t) = s;
  }
  return system;
}

Eigen::VectorXd update_f(const SeriesPanel& panel, const Eigen::MatrixXd& beta,
                         const Eigen::VectorXd& alpha) {
  return build_factor_system(panel, beta, alpha).solve("factor update");
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> update_beta_alpha(
    const SeriesPanel& panel, const Eigen::VectorXd& f) {
  panel.validate();
  const Eigen::Index T = panel.rows();
  const Eigen::Index m = panel.cols();
  const Eigen::Index k = f.size() - T;
  if (k < 0) throw ShapeError("factor shorter than the panel");
  if (T < k + 2) {
    throw ConfigError("T = " + std::to_string(T) +
                      " is too short for lag k = " + std::to_string(k) +
                      " (need T >= k+2)");
  }
  Eigen::MatrixXd design(T, k + 2);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (Eigen::Index i = 0; i <= k; ++i) design(t, i) = f(t + i);
    design(t, k + 1) = 1.0;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < k + 2) {
    throw DegeneracyError(
        "rank-deficient factor design in the loading regression "
        "(constant factor is the usual cause)");
  }
  Eigen::MatrixXd theta = qr.solve(panel.values);  // (k+2) x m
  Eigen::MatrixXd beta = theta.topRows(k + 1).transpose();
  Eigen::VectorXd alpha = theta.row(k + 1).transpose();
  return {std::move(beta), std::move(alpha)};
}

namespace {

// First classical principal component scores of the column-centered panel.
Eigen::VectorXd classical_pc_scores(const SeriesPanel& panel) {
  const Eigen::Index T = panel.rows();
  Eigen::MatrixXd centered = panel.values;
  for (Eigen::Index j = 0; j < centered.cols(); ++j) {
    centered.col(j).array() -= centered.col(j).mean();
  }
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(T);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) {
    throw NumericError("eigendecomposition failed for the PC start");
  }
  const Eigen::VectorXd v = es.eigenvectors().col(cov.cols() - 1);
  return centered * v;
}

// Classical PCA of sign-normalized, coordinatewise-median-centered rows;
// scores are projections of the median-centered data on the first axis.
Eigen::VectorXd spherical_pc_scores(const SeriesPanel& panel) {
  const Eigen::Index T = panel.rows();
  const Eigen::Index m = panel.cols();
  Eigen::VectorXd med(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    std::vector<double> col(panel.values.col(j).data(),
                            panel.values.col(j).data() + T);
    std::sort(col.begin(), col.end());
    med(j) = (T % 2 == 1) ? col[T / 2]
                          : 0.5 * (col[T / 2 - 1] + col[T / 2]);
  }
  Eigen::MatrixXd centered = panel.values;
  centered.rowwise() -= med.transpose();
  Eigen::MatrixXd sphere = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index t = 0; t < T; ++t) {
    const double norm = centered.row(t).norm();
    if (norm > 0) {
      const Eigen::VectorXd u = centered.row(t).transpose() / norm;
      sphere += u * u.transpose();
    }
  }
  sphere /= static_cast<double>(T);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sphere);
  if (es.info() != Eigen::Success) {
    throw NumericError("eigendecomposition failed for the spherical PC start");
  }
  const Eigen::VectorXd v = es.eigenvectors().col(m - 1);
  return centered * v;
}

}  // namespace

Eigen::VectorXd initial_factor(const SeriesPanel& panel,
                               const SolverConfig& config, bool robust) {
  const Eigen::Index T = panel.rows();
  const Eigen::Index n = T + config.k;
  InitStrategy strategy = config.init;
  if (strategy == InitStrategy::Auto) {
    strategy = robust ? InitStrategy::SphericalPc : InitStrategy::ClassicalPc;
  }
  Eigen::VectorXd f0 = Eigen::VectorXd::Zero(n);
  switch (strategy) {
    case InitStrategy::ClassicalPc:
      f0.head(T) = classical_pc_scores(panel);
      break;
    case InitStrategy::SphericalPc:
      f0.head(T) = spherical_pc_scores(panel);
      break;
    case InitStrategy::UserVector:
      if (config.init_vector.size() != n) {
        throw ConfigError("user start vector must have length T+k = " +
                          std::to_string(n));
      }
      f0 = config.init_vector;
      break;
    case InitStrategy::Auto:
      break;  // unreachable
  }
  const double spread = (f0.array() - f0.mean()).matrix().norm();
  if (strategy != InitStrategy::UserVector &&
      (!std::isfinite(spread) || spread < 1e-150)) {
    // degenerate start (e.g. constant panel): seeded random fallback
    Rng rng(config.seed);
    for (Eigen::Index i = 0; i < n; ++i) f0(i) = rng.next_normal();
  }
  return normalize_factor(f0);
}

DpcComponent fit_component(const SeriesPanel& panel, const SolverConfig& config,
                           std::vector<double>* mse_trace) {
  panel.validate();
  config.validate();
  const Eigen::Index T = panel.rows();
  const int k = config.k;
  if (T < k + 2) {
    throw ConfigError("T = " + std::to_string(T) +
                      " is too short for lag k = " + std::to_string(k) +
                      " (need T >= k+2)");
  }

  Eigen::VectorXd f = initial_factor(panel, config, /*robust=*/false);
  auto [beta, alpha] = update_beta_alpha(panel, f);
  double prev = mse(panel, f, beta, alpha);
  if (mse_trace) mse_trace->push_back(prev);

  Convergence conv;
  conv.criterion = prev;
  conv.converged = (prev == 0.0);

  for (int it = 0; it < config.max_iter && !conv.converged; ++it) {
    f = normalize_factor(update_f(panel, beta, alpha));
    std::tie(beta, alpha) = update_beta_alpha(panel, f);
    const double cur = mse(panel, f, beta, alpha);
    if (mse_trace) mse_trace->push_back(cur);
    conv.iterations = it + 1;
    conv.criterion = cur;
    if (cur == 0.0 || (prev - cur) / prev < config.epsilon) {
      conv.converged = true;
    }
    prev = cur;
  }

  apply_sign_convention(f, beta);
  DpcComponent component;
  component.k = k;
  component.f = std::move(f);
  component.beta = std::move(beta);
  component.alpha = std::move(alpha);
  component.convergence = conv;
  return component;
}

DpcModel fit(const SeriesPanel& panel, const SolverConfig& config) {
  panel.validate();
  config.validate();
  DpcModel model;
  SeriesPanel resid = panel;
  for (int s = 0; s < config.p; ++s) {
    DpcComponent component = fit_component(resid, config);
    resid.values -= component_reconstruction(component, panel.rows());
    model.components.push_back(std::move(component));
    model.residual_panels.push_back(resid);
  }
  return model;
}

SeriesPanel reconstruct(const DpcModel& model, int upto_p) {
  if (model.components.empty()) throw ConfigError("model has no components");
  if (upto_p < 1 || upto_p > model.p()) {
    throw ConfigError("upto_p = " + std::to_string(upto_p) +
                      " out of range 1.." + std::to_string(model.p()));
  }
  const SeriesPanel& ref = model.residual_panels.front();
  const Eigen::Index T = ref.rows();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(T, ref.cols());
  for (int s = 0; s < upto_p; ++s) {
    sum += component_reconstruction(model.components[s], T);
  }
  SeriesPanel out;
  out.values = std::move(sum);
  out.labels = ref.labels;
  return out;
}

DpcModel assemble_model(const SeriesPanel& panel,
                        std::vector<DpcComponent> components) {
  panel.validate();
  DpcModel model;
  SeriesPanel resid = panel;
  for (auto& component : components) {
    resid.values -= component_reconstruction(component, panel.rows());
    model.components.push_back(std::move(component));
    model.residual_panels.push_back(resid);
  }
  return model;
}

StructureSelection select_structure(const SeriesPanel& panel,
                                    double epsilon_lag, double mse_target,
                                    StructureCaps caps,
                                    const SolverConfig& base) {
  panel.validate();
  if (!(epsilon_lag > 0)) throw ConfigError("epsilon_lag must be > 0");
  if (caps.k_max < 0 || caps.p_max < 1) {
    throw ConfigError("caps must allow k >= 0 and p >= 1");
  }

  StructureSelection sel;
  SeriesPanel resid = panel;
  const Eigen::Index T = panel.rows();
  bool done = false;

  for (int comp = 0; comp < caps.p_max && !done; ++comp) {
    SolverConfig cfg = base;
    cfg.k = 0;
    cfg.p = 1;
    DpcComponent current = fit_component(resid, cfg);
    double current_mse = mse(resid, current);
    sel.trace.push_back({comp, 0, current_mse, true});

    while (cfg.k < caps.k_max && current_mse > mse_target &&
           current_mse > 0.0) {
      SolverConfig next_cfg = cfg;
      next_cfg.k = cfg.k + 1;
      if (T < next_cfg.k + 2) break;
      DpcComponent candidate = fit_component(resid, next_cfg);
      const double candidate_mse = mse(resid, candidate);
      const double reduction = (current_mse - candidate_mse) / current_mse;
      const bool accepted = reduction >= epsilon_lag;
      sel.trace.push_back({comp, next_cfg.k, candidate_mse, accepted});
      if (!accepted) break;
      cfg = next_cfg;
      current = std::move(candidate);
      current_mse = candidate_mse;
    }

    resid.values -= component_reconstruction(current, T);
    sel.lags.push_back(current.k);
    sel.model.components.push_back(std::move(current));
    sel.model.residual_panels.push_back(resid);
    sel.mse = current_mse;
    if (current_mse <= mse_target) {
      sel.target_met = true;
      done = true;
    }
  }

  sel.p = sel.model.p();
  sel.k = sel.lags.back();
  return sel;
}

}  // namespace dpc
