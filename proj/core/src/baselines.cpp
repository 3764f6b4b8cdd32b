#include "dpc/baselines.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <complex>

#include "dpc/errors.hpp"

namespace dpc {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr std::complex<double> kI{0.0, 1.0};
}  // namespace

OpcFit opc_fit(const SeriesPanel& panel, int p) {
  panel.validate();
  const Eigen::Index T = panel.rows();
  const Eigen::Index m = panel.cols();
  if (p < 1 || p > m) throw ConfigError("component count out of range");

  OpcFit fit;
  fit.means = panel.values.colwise().mean();
  Eigen::MatrixXd centered = panel.values.rowwise() - fit.means.transpose();
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(T);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) {
    throw NumericError("eigendecomposition of the covariance failed");
  }

  fit.eigenvalues.resize(p);
  fit.loadings.resize(m, p);
  for (int i = 0; i < p; ++i) {
    fit.eigenvalues(i) = es.eigenvalues()(m - 1 - i);
    Eigen::VectorXd v = es.eigenvectors().col(m - 1 - i);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    fit.loadings.col(i) = v;
  }
  fit.scores = centered * fit.loadings;
  return fit;
}

LaggedReconstruction opc_reconstruct_lagged(const SeriesPanel& panel,
                                            const Eigen::VectorXd& scores,
                                            int k) {
  panel.validate();
  const Eigen::Index T = panel.rows();
  const Eigen::Index m = panel.cols();
  if (scores.size() != T) throw ShapeError("scores length must equal T");
  if (k < 0) throw ConfigError("lag count k must be >= 0");
  const Eigen::Index rows = T - k;
  if (rows < k + 2) {
    throw ConfigError("too few rows for a " + std::to_string(k) +
                      "-lag score regression");
  }

  Eigen::MatrixXd design(rows, k + 2);
  for (Eigen::Index t = 0; t < rows; ++t) {
    for (int i = 0; i <= k; ++i) design(t, i) = scores(t + i);
    design(t, k + 1) = 1.0;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < k + 2) {
    throw DegeneracyError("score design matrix is rank deficient");
  }
  const Eigen::MatrixXd z = panel.values.topRows(rows);
  const Eigen::MatrixXd theta = qr.solve(z);

  LaggedReconstruction out;
  out.reconstructed = design * theta;
  out.valid_rows = rows;
  long double total = 0.0L;
  for (Eigen::Index j = 0; j < m; ++j) {
    total += static_cast<long double>(
                 (z.col(j) - out.reconstructed.col(j)).squaredNorm()) /
             static_cast<long double>(rows);
  }
  out.mse = static_cast<double>(total);
  return out;
}

int SmoothingSpec::resolve_span(Eigen::Index T) const {
  if (span >= 0) return span;
  return static_cast<int>(std::floor(std::sqrt(static_cast<double>(T))));
}

namespace {

// split cosine bell over a proportion p of each end, as used for
// periodogram tapering
Eigen::VectorXd taper_window(Eigen::Index T, double p) {
  Eigen::VectorXd g = Eigen::VectorXd::Ones(T);
  const Eigen::Index edge =
      static_cast<Eigen::Index>(std::floor(p * static_cast<double>(T)));
  for (Eigen::Index t = 0; t < edge; ++t) {
    const double w =
        0.5 * (1.0 - std::cos(kPi * (static_cast<double>(t) + 0.5) /
                              static_cast<double>(edge)));
    g(t) = w;
    g(T - 1 - t) = w;
  }
  return g;
}

}  // namespace

SpectralEstimate estimate_cross_spectrum(const SeriesPanel& panel,
                                         SmoothingSpec smoothing) {
  panel.validate();
  const Eigen::Index T = panel.rows();
  const Eigen::Index m = panel.cols();
  const int span = smoothing.resolve_span(T);
  if (span < 0 || 2 * span > T) {
    throw ConfigError("smoothing span " + std::to_string(span) +
                      " too large for T = " + std::to_string(T));
  }
  if (smoothing.taper < 0.0 || smoothing.taper > 0.5) {
    throw ConfigError("taper proportion must be in [0, 0.5]");
  }

  Eigen::MatrixXd centered =
      panel.values.rowwise() - panel.values.colwise().mean();
  const Eigen::VectorXd g = taper_window(T, smoothing.taper);
  const double u2 = g.squaredNorm() / static_cast<double>(T);
  for (Eigen::Index t = 0; t < T; ++t) centered.row(t) *= g(t);

  // discrete Fourier transform of each tapered series on the full grid
  Eigen::MatrixXcd dft(T, m);
  for (Eigen::Index l = 0; l < T; ++l) {
    const double w = 2.0 * kPi * static_cast<double>(l) / static_cast<double>(T);
    Eigen::RowVectorXcd acc = Eigen::RowVectorXcd::Zero(m);
    for (Eigen::Index t = 0; t < T; ++t) {
      acc += std::exp(-kI * (w * static_cast<double>(t + 1))) *
             centered.row(t).cast<std::complex<double>>();
    }
    dft.row(l) = acc;
  }

  const double scale = 1.0 / (2.0 * kPi * static_cast<double>(T) * u2);
  std::vector<Eigen::MatrixXcd> raw(T);
  for (Eigen::Index l = 0; l < T; ++l) {
    raw[l] = scale * (dft.row(l).transpose() * dft.row(l).conjugate());
  }

  SpectralEstimate est;
  est.smoothing = smoothing;
  est.smoothing.span = span;
  est.frequencies.resize(T);
  est.cross_spectra.resize(T);
  for (Eigen::Index l = 0; l < T; ++l) {
    est.frequencies(l) =
        2.0 * kPi * static_cast<double>(l) / static_cast<double>(T);
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(m, m);
    for (int d = -span; d <= span; ++d) {
      acc += raw[((l + d) % T + T) % T];
    }
    acc /= static_cast<double>(2 * span + 1);
    est.cross_spectra[l] = 0.5 * (acc + acc.adjoint().eval());  // exact Hermitian
  }
  return est;
}

namespace {

// Leading eigenvectors per frequency with conjugate symmetry
// e(T-l) = conj(e(l)), a deterministic phase (largest-modulus coordinate made
// real positive) and a sequential continuity pass against sign flips.
std::vector<Eigen::VectorXcd> leading_eigenvectors(
    const SpectralEstimate& est) {
  const Eigen::Index T = static_cast<Eigen::Index>(est.cross_spectra.size());
  const Eigen::Index m = est.cross_spectra.front().rows();
  const Eigen::Index half = T / 2;
  std::vector<Eigen::VectorXcd> e(T);
  for (Eigen::Index l = 0; l <= half; ++l) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(est.cross_spectra[l]);
    if (es.info() != Eigen::Success) {
      throw NumericError("per-frequency eigendecomposition failed");
    }
    Eigen::VectorXcd v = es.eigenvectors().col(m - 1);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    const double mod = std::abs(v(arg));
    if (mod > 0) v *= std::conj(v(arg)) / mod;
    if (l > 0) {
      const std::complex<double> ip = e[l - 1].dot(v);
      if (ip.real() < 0) v = -v;
    }
    e[l] = v;
  }
  for (Eigen::Index l = half + 1; l < T; ++l) e[l] = e[T - l].conjugate();
  return e;
}

}  // namespace

BdpcModel bdpc_fit(const SeriesPanel& panel, int M, SmoothingSpec smoothing) {
  panel.validate();
  const Eigen::Index T = panel.rows();
  const Eigen::Index m = panel.cols();
  if (M < 0 || M >= T) throw ConfigError("filter half-width M out of range");

  const SpectralEstimate est = estimate_cross_spectrum(panel, smoothing);
  const std::vector<Eigen::VectorXcd> e = leading_eigenvectors(est);

  BdpcModel model;
  model.M = M;
  model.means = panel.values.colwise().mean();
  model.c.resize(2 * M + 1);
  model.b.resize(2 * M + 1);

  double max_im = 0.0;
  double max_re = 0.0;
  for (int h = -M; h <= M; ++h) {
    // filter taps from the eigenvectors, reconstruction taps from their
    // conjugates; conjugate frequency symmetry makes both real
    Eigen::VectorXcd ch = Eigen::VectorXcd::Zero(m);
    Eigen::VectorXcd bh = Eigen::VectorXcd::Zero(m);
    for (Eigen::Index l = 0; l < T; ++l) {
      const std::complex<double> tw =
          std::exp(kI * (est.frequencies(l) * static_cast<double>(h)));
      ch += e[l] * tw;
      bh += e[l].conjugate() * tw;
    }
    ch /= static_cast<double>(T);
    bh /= static_cast<double>(T);
    max_im = std::max({max_im, ch.imag().cwiseAbs().maxCoeff(),
                       bh.imag().cwiseAbs().maxCoeff()});
    max_re = std::max({max_re, ch.real().cwiseAbs().maxCoeff(),
                       bh.real().cwiseAbs().maxCoeff()});
    model.c[h + M] = ch.real();
    model.b[h + M] = bh.real();
  }
  model.max_imag_residue = (max_re > 0) ? max_im / max_re : max_im;
  return model;
}

Eigen::VectorXd bdpc_scores(const SeriesPanel& panel, const BdpcModel& model) {
  panel.validate();
  const Eigen::Index T = panel.rows();
  if (panel.cols() != model.means.size()) {
    throw ShapeError("panel width does not match the fitted model");
  }
  const Eigen::MatrixXd centered =
      panel.values.rowwise() - model.means.transpose();
  const int M = model.M;
  Eigen::VectorXd f(T);
  for (Eigen::Index t = 1; t <= T; ++t) {  // 1-based time
    const long lo = std::max<long>(-M, static_cast<long>(t) - T);
    const long hi = std::min<long>(M, static_cast<long>(t) - 1);
    double acc = 0.0;
    for (long h = lo; h <= hi; ++h) {
      acc += model.c[h + M].dot(centered.row(t - h - 1));
    }
    f(t - 1) = acc;
  }
  return f;
}

BdpcReconstruction bdpc_reconstruct(const SeriesPanel& panel,
                                    const BdpcModel& model) {
  const Eigen::VectorXd f = bdpc_scores(panel, model);
  const Eigen::Index T = panel.rows();
  const Eigen::Index m = panel.cols();
  const int M = model.M;

  BdpcReconstruction out;
  out.reconstructed.resize(T, m);
  for (Eigen::Index t = 1; t <= T; ++t) {
    const long lo = std::max<long>(-M, 1 - static_cast<long>(t));
    const long hi = std::min<long>(M, T - static_cast<long>(t));
    Eigen::VectorXd acc = model.means;
    for (long j = lo; j <= hi; ++j) {
      acc += model.b[j + M] * f(t + j - 1);
    }
    out.reconstructed.row(t - 1) = acc.transpose();
  }

  long double total = 0.0L;
  for (Eigen::Index j = 0; j < m; ++j) {
    total += static_cast<long double>(
                 (panel.values.col(j) - out.reconstructed.col(j))
                     .squaredNorm()) /
             static_cast<long double>(T);
  }
  out.mse = static_cast<double>(total);
  return out;
}

}  // namespace dpc
