#pragma once

#include <Eigen/Dense>

namespace dpc {

/// Closed-form parameterization of the k=1 banded system: with
/// a1 = sum_j beta(j,0)^2, a2 = sum_j beta(j,1)^2, b = sum_j beta(j,0)beta(j,1)
/// the matrix equals alpha_scale times a tridiagonal pattern with interior
/// diagonal 1+c^2, off-diagonal -c and corners w1, w2, where |c| < 1 solves
/// c^2 + ((a1+a2)/b) c + 1 = 0.
struct TridiagonalParams {
  double a1 = 0.0;
  double a2 = 0.0;
  double b = 0.0;
  double c = 0.0;
  double alpha_scale = 0.0;
  double w1 = 0.0;
  double w2 = 0.0;
  double m1 = 0.0;  // w1 - 1
  double m2 = 0.0;  // w2 - 1
};

/// Derives the parameters from an m x 2 loading matrix. Throws
/// DegeneracyError when the two columns are proportional.
TridiagonalParams tridiagonal_params(const Eigen::MatrixXd& beta);

/// (A0^-1)_{i,h} = c^{|i-h|} / (1 - c^2); indices may be 0- or 1-based since
/// only their difference matters. Throws for |c| >= 1.
double a0_inverse_entry(double c, Eigen::Index i, Eigen::Index h);

/// Dense n x n matrix alpha_scale * (tridiagonal pattern) for the params.
Eigen::MatrixXd tridiagonal_dense(const TridiagonalParams& params,
                                  Eigen::Index n);

struct DInverseResult {
  Eigen::MatrixXd inverse;
  // true when the rank-two corner correction could be evaluated in closed
  // form (requires m1 >= 0 and m2 >= 0); false means the banded solver
  // produced the inverse instead.
  bool analytic_form = false;
};

/// Inverse of the k=1 system, preferring the closed-form corner correction
/// and falling back to the banded factorization when the printed square-root
/// construction is inapplicable.
DInverseResult d_inverse_correction(const TridiagonalParams& params,
                                    Eigen::Index n);

}  // namespace dpc
