#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "dpc/component.hpp"
#include "dpc/panel.hpp"

namespace dpc {

/// Residuals z - zhat as a T x m matrix, with
/// zhat(t, j) = sum_i beta(j, i) f(t+i) + alpha(j).
Eigen::MatrixXd residual_matrix(const SeriesPanel& panel,
                                const Eigen::VectorXd& f,
                                const Eigen::MatrixXd& beta,
                                const Eigen::VectorXd& alpha);

/// Reconstruction of a component as a T x m matrix.
Eigen::MatrixXd component_reconstruction(const DpcComponent& component,
                                         Eigen::Index T);

/// Sum over series of per-series mean squared residuals.
double mse(const SeriesPanel& panel, const Eigen::VectorXd& f,
           const Eigen::MatrixXd& beta, const Eigen::VectorXd& alpha);
double mse(const SeriesPanel& panel, const DpcComponent& component);

/// Per-series population variances (denominator T).
Eigen::VectorXd population_variances(const SeriesPanel& panel);
double total_variance(const SeriesPanel& panel);

/// Percentage of panel variability explained by a factor used with `k` lags:
/// 100 * (1 - min_{beta,alpha} MSE_k / sum_i V_i). The minimizing beta and
/// alpha are refit by least squares; when k exceeds the factor's own lag
/// count, trailing rows without a full lead window are dropped.
double explained_variance(const SeriesPanel& panel,
                          const DpcComponent& component, int k);
double explained_variance(const SeriesPanel& panel,
                          const DpcComponent& component);

/// Share of the original information needed to store a fit:
/// ((T+k)p + (k+1)mp + m) / (mT).
double information_proportion(std::int64_t T, std::int64_t m, std::int64_t k,
                              std::int64_t p);

}  // namespace dpc
