#include "dpc/lag_one.hpp"

#include <cmath>
#include <string>

#include "dpc/banded.hpp"
#include "dpc/errors.hpp"

namespace dpc {

TridiagonalParams tridiagonal_params(const Eigen::MatrixXd& beta) {
  if (beta.cols() != 2 || beta.rows() < 1) {
    throw ShapeError("tridiagonal_params needs an m x 2 loading matrix");
  }
  TridiagonalParams p;
  p.a1 = beta.col(0).squaredNorm();
  p.a2 = beta.col(1).squaredNorm();
  p.b = beta.col(0).dot(beta.col(1));

  // proportional columns (including a zero column) make D the Gram of a
  // rank-one filter
  if (p.a1 * p.a2 - p.b * p.b <= 1e-12 * p.a1 * p.a2) {
    throw DegeneracyError(
        "beta columns are proportional: the lag-one component degenerates "
        "to the first classical principal component");
  }

  if (std::abs(p.b) < 1e-12 * (p.a1 + p.a2)) {
    p.c = 0.0;
    p.alpha_scale = p.a1 + p.a2;
  } else {
    // c^2 + B c + 1 = 0 with B = (a1+a2)/b; roots multiply to 1, take the
    // one inside the unit disk (computed via the larger root for stability)
    const double B = (p.a1 + p.a2) / p.b;
    const double disc = std::sqrt(B * B - 4.0);
    const double big = (B > 0) ? -0.5 * (B + disc) : -0.5 * (B - disc);
    p.c = 1.0 / big;
    p.alpha_scale = -p.b / p.c;
  }
  p.w1 = p.a1 / p.alpha_scale;
  p.w2 = p.a2 / p.alpha_scale;
  p.m1 = p.w1 - 1.0;
  p.m2 = p.w2 - 1.0;
  return p;
}

double a0_inverse_entry(double c, Eigen::Index i, Eigen::Index h) {
  if (!(std::abs(c) < 1.0)) {
    throw ConfigError("a0_inverse_entry requires |c| < 1");
  }
  const double d = static_cast<double>(i > h ? i - h : h - i);
  return std::pow(c, d) / (1.0 - c * c);
}

Eigen::MatrixXd tridiagonal_dense(const TridiagonalParams& params,
                                  Eigen::Index n) {
  if (n < 2) throw ShapeError("tridiagonal pattern needs n >= 2");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  const double a = params.alpha_scale;
  const double c = params.c;
  for (Eigen::Index i = 0; i < n; ++i) d(i, i) = a * (1.0 + c * c);
  d(0, 0) = a * params.w1;
  d(n - 1, n - 1) = a * params.w2;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    d(i, i + 1) = -a * c;
    d(i + 1, i) = -a * c;
  }
  return d;
}

DInverseResult d_inverse_correction(const TridiagonalParams& params,
                                    Eigen::Index n) {
  if (n < 2) throw ShapeError("d_inverse_correction needs n >= 2");
  DInverseResult result;

  if (params.c == 0.0) {
    // diagonal system: entries are the reciprocals of (a1, a1+a2, ..., a2)
    result.inverse = Eigen::MatrixXd::Zero(n, n);
    result.inverse(0, 0) = 1.0 / params.a1;
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
      result.inverse(i, i) = 1.0 / (params.a1 + params.a2);
    }
    result.inverse(n - 1, n - 1) = 1.0 / params.a2;
    result.analytic_form = true;
    return result;
  }

  if (params.m1 >= 0.0 && params.m2 >= 0.0) {
    // D = alpha (A0 + G G') with corner spikes of height sqrt(m1), sqrt(m2):
    // invert via the rank-two correction A0^-1 - A0^-1 G H G' A0^-1.
    Eigen::MatrixXd a0inv(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index h = 0; h < n; ++h) {
        a0inv(i, h) = a0_inverse_entry(params.c, i, h);
      }
    }
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, 2);
    g(0, 0) = std::sqrt(params.m1);
    g(n - 1, 1) = std::sqrt(params.m2);
    const Eigen::MatrixXd h2 =
        (Eigen::MatrixXd::Identity(2, 2) + g.transpose() * a0inv * g)
            .inverse();
    result.inverse = (a0inv - a0inv * g * h2 * g.transpose() * a0inv) /
                     params.alpha_scale;
    result.analytic_form = true;
    return result;
  }

  // the printed square-root corner construction is inapplicable (negative
  // m1/m2); solve column-by-column with the banded factorization instead
  SymmetricBandMatrix d(n, 1);
  const double a = params.alpha_scale;
  const double c = params.c;
  d.set(0, 0, a * params.w1);
  d.set(n - 1, n - 1, a * params.w2);
  for (Eigen::Index i = 1; i + 1 < n; ++i) d.set(i, i, a * (1.0 + c * c));
  for (Eigen::Index i = 0; i + 1 < n; ++i) d.set(i + 1, i, -a * c);

  result.inverse.resize(n, n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  for (Eigen::Index col = 0; col < n; ++col) {
    e(col) = 1.0;
    result.inverse.col(col) = solve_banded_spd(d, e, "lag-one inverse");
    e(col) = 0.0;
  }
  result.analytic_form = false;
  return result;
}

}  // namespace dpc
