#pragma once

#include <Eigen/Dense>
#include <string>

namespace dpc {

/// Symmetric banded matrix with lower-band storage: band_(d, j) holds
/// A(j+d, j) for 0 <= d <= bandwidth. Entries outside the band are zero.
class SymmetricBandMatrix {
 public:
  SymmetricBandMatrix(Eigen::Index n, Eigen::Index bandwidth);

  Eigen::Index size() const { return n_; }
  Eigen::Index bandwidth() const { return bw_; }

  double operator()(Eigen::Index i, Eigen::Index j) const;
  void set(Eigen::Index i, Eigen::Index j, double value);
  void add(Eigen::Index i, Eigen::Index j, double value);
  void add_to_diagonal(double value);

  double trace() const;
  double max_abs_diagonal() const;
  Eigen::MatrixXd dense() const;

  const Eigen::MatrixXd& band() const { return band_; }

 private:
  Eigen::Index n_;
  Eigen::Index bw_;
  Eigen::MatrixXd band_;  // (bw+1) x n
};

/// Banded Cholesky factorization A = L L' kept in band storage.
class BandCholesky {
 public:
  // Factors A; returns false when a pivot is not safely positive, i.e.
  // pivot^2 <= rel_tol * max |diag(A)|.
  bool compute(const SymmetricBandMatrix& a, double rel_tol = 1e-12);

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  double min_pivot() const { return min_pivot_; }
  double max_pivot() const { return max_pivot_; }

 private:
  Eigen::Index n_ = 0;
  Eigen::Index bw_ = 0;
  Eigen::MatrixXd l_;  // lower band of L
  double min_pivot_ = 0.0;
  double max_pivot_ = 0.0;
};

/// Solves A x = rhs for symmetric positive definite banded A.
/// On a pivot failure, retries once with jitter 1e-10 * trace(A)/n on the
/// diagonal, then throws DegeneracyError mentioning `context`.
Eigen::VectorXd solve_banded_spd(const SymmetricBandMatrix& a,
                                 const Eigen::VectorXd& rhs,
                                 const std::string& context);

/// One factor-update system: the banded Gram matrix and its right-hand side.
struct BandedSystem {
  SymmetricBandMatrix matrix;
  Eigen::VectorXd rhs;

  Eigen::VectorXd solve(const std::string& context) const {
    return solve_banded_spd(matrix, rhs, context);
  }
};

}  // namespace dpc
