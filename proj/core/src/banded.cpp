#include "dpc/banded.hpp"

#include <algorithm>
#include <cmath>

#include "dpc/errors.hpp"

namespace dpc {

SymmetricBandMatrix::SymmetricBandMatrix(Eigen::Index n, Eigen::Index bandwidth)
    : n_(n), bw_(bandwidth) {
  if (n < 1) throw ShapeError("banded matrix dimension must be positive");
  if (bandwidth < 0 || bandwidth >= n) {
    throw ShapeError("bandwidth " + std::to_string(bandwidth) +
                     " out of range for dimension " + std::to_string(n));
  }
  band_ = Eigen::MatrixXd::Zero(bw_ + 1, n_);
}

double SymmetricBandMatrix::operator()(Eigen::Index i, Eigen::Index j) const {
  if (i < j) std::swap(i, j);
  const Eigen::Index d = i - j;
  if (d > bw_) return 0.0;
  return band_(d, j);
}

void SymmetricBandMatrix::set(Eigen::Index i, Eigen::Index j, double value) {
  if (i < j) std::swap(i, j);
  const Eigen::Index d = i - j;
  if (d > bw_) throw ShapeError("assignment outside the band");
  band_(d, j) = value;
}

void SymmetricBandMatrix::add(Eigen::Index i, Eigen::Index j, double value) {
  if (i < j) std::swap(i, j);
  const Eigen::Index d = i - j;
  if (d > bw_) throw ShapeError("accumulation outside the band");
  band_(d, j) += value;
}

void SymmetricBandMatrix::add_to_diagonal(double value) {
  band_.row(0).array() += value;
}

double SymmetricBandMatrix::trace() const { return band_.row(0).sum(); }

double SymmetricBandMatrix::max_abs_diagonal() const {
  return band_.row(0).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd SymmetricBandMatrix::dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_, n_);
  for (Eigen::Index j = 0; j < n_; ++j) {
    for (Eigen::Index d = 0; d <= bw_ && j + d < n_; ++d) {
      out(j + d, j) = band_(d, j);
      out(j, j + d) = band_(d, j);
    }
  }
  return out;
}

bool BandCholesky::compute(const SymmetricBandMatrix& a, double rel_tol) {
  n_ = a.size();
  bw_ = a.bandwidth();
  l_ = a.band();
  min_pivot_ = 0.0;
  max_pivot_ = 0.0;

  const double diag_scale = a.max_abs_diagonal();
  const double pivot_floor = rel_tol * std::max(diag_scale, 1e-300);

  for (Eigen::Index j = 0; j < n_; ++j) {
    double d = l_(0, j);
    // subtract contributions of previous columns inside the band
    const Eigen::Index first = std::max<Eigen::Index>(0, j - bw_);
    for (Eigen::Index c = first; c < j; ++c) {
      const double ljc = l_(j - c, c);
      d -= ljc * ljc;
    }
    if (!(d > pivot_floor)) return false;
    const double piv = std::sqrt(d);
    l_(0, j) = piv;
    min_pivot_ = (j == 0) ? piv : std::min(min_pivot_, piv);
    max_pivot_ = std::max(max_pivot_, piv);

    for (Eigen::Index i = j + 1; i < std::min(n_, j + bw_ + 1); ++i) {
      double s = l_(i - j, j);
      const Eigen::Index lo = std::max<Eigen::Index>(0, i - bw_);
      for (Eigen::Index c = std::max(first, lo); c < j; ++c) {
        s -= l_(i - c, c) * l_(j - c, c);
      }
      l_(i - j, j) = s / piv;
    }
  }
  return true;
}

Eigen::VectorXd BandCholesky::solve(const Eigen::VectorXd& rhs) const {
  if (rhs.size() != n_) throw ShapeError("rhs length does not match system");
  Eigen::VectorXd y(n_);
  for (Eigen::Index i = 0; i < n_; ++i) {
    double s = rhs(i);
    const Eigen::Index first = std::max<Eigen::Index>(0, i - bw_);
    for (Eigen::Index c = first; c < i; ++c) s -= l_(i - c, c) * y(c);
    y(i) = s / l_(0, i);
  }
  Eigen::VectorXd x(n_);
  for (Eigen::Index i = n_ - 1; i >= 0; --i) {
    double s = y(i);
    const Eigen::Index last = std::min(n_ - 1, i + bw_);
    for (Eigen::Index r = i + 1; r <= last; ++r) s -= l_(r - i, i) * x(r);
    x(i) = s / l_(0, i);
  }
  return x;
}

Eigen::VectorXd solve_banded_spd(const SymmetricBandMatrix& a,
                                 const Eigen::VectorXd& rhs,
                                 const std::string& context) {
  BandCholesky chol;
  if (chol.compute(a)) return chol.solve(rhs);

  SymmetricBandMatrix jittered = a;
  jittered.add_to_diagonal(1e-10 * a.trace() /
                           static_cast<double>(a.size()));
  if (chol.compute(jittered)) return chol.solve(rhs);

  throw DegeneracyError(context +
                        ": banded system is singular even after jitter "
                        "(proportional beta columns are the usual cause)");
}

}  // namespace dpc
