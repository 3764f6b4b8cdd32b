#include "dpc/metrics.hpp"

#include <Eigen/QR>
#include <cmath>
#include <string>

#include "dpc/errors.hpp"

namespace dpc {

namespace {

void check_shapes(const SeriesPanel& panel, const Eigen::VectorXd& f,
                  const Eigen::MatrixXd& beta, const Eigen::VectorXd& alpha) {
  const Eigen::Index T = panel.rows();
  const Eigen::Index m = panel.cols();
  const Eigen::Index k = beta.cols() - 1;
  if (beta.cols() < 1) throw ShapeError("beta needs at least one column");
  if (beta.rows() != m) {
    throw ShapeError("beta has " + std::to_string(beta.rows()) +
                     " rows for a panel of " + std::to_string(m) + " series");
  }
  if (alpha.size() != m) {
    throw ShapeError("alpha has length " + std::to_string(alpha.size()) +
                     " for a panel of " + std::to_string(m) + " series");
  }
  if (f.size() != T + k) {
    throw ShapeError("factor length " + std::to_string(f.size()) +
                     " does not match T + k = " + std::to_string(T + k));
  }
}

}  // namespace

Eigen::MatrixXd residual_matrix(const SeriesPanel& panel,
                                const Eigen::VectorXd& f,
                                const Eigen::MatrixXd& beta,
                                const Eigen::VectorXd& alpha) {
  check_shapes(panel, f, beta, alpha);
  const Eigen::Index T = panel.rows();
  const Eigen::Index m = panel.cols();
  const Eigen::Index k = beta.cols() - 1;
  Eigen::MatrixXd r(T, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index t = 0; t < T; ++t) {
      double zhat = alpha(j);
      for (Eigen::Index i = 0; i <= k; ++i) zhat += beta(j, i) * f(t + i);
      r(t, j) = panel.values(t, j) - zhat;
    }
  }
  return r;
}

Eigen::MatrixXd component_reconstruction(const DpcComponent& component,
                                         Eigen::Index T) {
  const Eigen::Index m = component.beta.rows();
  const Eigen::Index k = component.k;
  if (component.f.size() != T + k) {
    throw ShapeError("component factor length does not match T + k");
  }
  Eigen::MatrixXd out(T, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index t = 0; t < T; ++t) {
      double zhat = component.alpha(j);
      for (Eigen::Index i = 0; i <= k; ++i) {
        zhat += component.beta(j, i) * component.f(t + i);
      }
      out(t, j) = zhat;
    }
  }
  return out;
}

double mse(const SeriesPanel& panel, const Eigen::VectorXd& f,
           const Eigen::MatrixXd& beta, const Eigen::VectorXd& alpha) {
  check_shapes(panel, f, beta, alpha);
  const Eigen::Index T = panel.rows();
  const Eigen::Index m = panel.cols();
  const Eigen::Index k = beta.cols() - 1;
  // extended-precision accumulation: the stopping rule compares small
  // relative differences of this value
  long double total = 0.0L;
  for (Eigen::Index j = 0; j < m; ++j) {
    long double sj = 0.0L;
    for (Eigen::Index t = 0; t < T; ++t) {
      double zhat = alpha(j);
      for (Eigen::Index i = 0; i <= k; ++i) zhat += beta(j, i) * f(t + i);
      const long double r = panel.values(t, j) - zhat;
      sj += r * r;
    }
    total += sj / static_cast<long double>(T);
  }
  return static_cast<double>(total);
}

double mse(const SeriesPanel& panel, const DpcComponent& component) {
  return mse(panel, component.f, component.beta, component.alpha);
}

Eigen::VectorXd population_variances(const SeriesPanel& panel) {
  const Eigen::Index T = panel.rows();
  Eigen::VectorXd v(panel.cols());
  for (Eigen::Index j = 0; j < panel.cols(); ++j) {
    const double mean = panel.values.col(j).mean();
    v(j) = (panel.values.col(j).array() - mean).square().sum() /
           static_cast<double>(T);
  }
  return v;
}

double total_variance(const SeriesPanel& panel) {
  return population_variances(panel).sum();
}

double explained_variance(const SeriesPanel& panel,
                          const DpcComponent& component, int k) {
  panel.validate();
  if (k < 0) throw ConfigError("lag count k must be >= 0");
  const Eigen::Index T = panel.rows();
  const Eigen::Index m = panel.cols();
  const double tv = total_variance(panel);
  if (tv <= 0.0) {
    throw DegeneracyError("degenerate panel: total variance is zero");
  }
  // valid rows: t with t + k inside the factor
  const Eigen::Index rows = std::min<Eigen::Index>(T, component.f.size() - k);
  if (rows < k + 2) {
    throw ShapeError("factor too short to evaluate " + std::to_string(k) +
                     " lags");
  }
  Eigen::MatrixXd design(rows, k + 2);
  for (Eigen::Index t = 0; t < rows; ++t) {
    for (Eigen::Index i = 0; i <= k; ++i) design(t, i) = component.f(t + i);
    design(t, k + 1) = 1.0;
  }
  const Eigen::MatrixXd z = panel.values.topRows(rows);
  Eigen::MatrixXd theta =
      design.colPivHouseholderQr().solve(z);  // (k+2) x m
  const Eigen::MatrixXd resid = z - design * theta;
  long double total = 0.0L;
  for (Eigen::Index j = 0; j < m; ++j) {
    total += static_cast<long double>(resid.col(j).squaredNorm()) /
             static_cast<long double>(rows);
  }
  return 100.0 * (1.0 - static_cast<double>(total) / tv);
}

double explained_variance(const SeriesPanel& panel,
                          const DpcComponent& component) {
  return explained_variance(panel, component, component.k);
}

double information_proportion(std::int64_t T, std::int64_t m, std::int64_t k,
                              std::int64_t p) {
  if (T < 1 || m < 1 || p < 1 || k < 0) {
    throw ConfigError("information_proportion needs T, m, p >= 1 and k >= 0");
  }
  const std::int64_t numerator = (T + k) * p + (k + 1) * m * p + m;
  const std::int64_t denominator = m * T;
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

}  // namespace dpc
