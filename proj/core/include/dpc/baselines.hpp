#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "dpc/panel.hpp"

namespace dpc {

struct OpcFit {
  Eigen::VectorXd eigenvalues;  // descending
  Eigen::MatrixXd loadings;     // m x p, orthonormal columns
  Eigen::MatrixXd scores;       // T x p, scores of the centered panel
  Eigen::VectorXd means;        // column means removed before the fit
};

/// Classical principal components of the sample covariance (denominator T),
/// loadings signed so the largest-magnitude entry is positive.
OpcFit opc_fit(const SeriesPanel& panel, int p);

struct LaggedReconstruction {
  Eigen::MatrixXd reconstructed;  // valid_rows x m fitted values
  double mse = 0.0;               // per-series mean over the valid rows
  Eigen::Index valid_rows = 0;    // rows whose full lead window exists
};

/// Regression of each series on (p_t, ..., p_{t+k}, 1); rows whose lead
/// window runs past T are dropped.
LaggedReconstruction opc_reconstruct_lagged(const SeriesPanel& panel,
                                            const Eigen::VectorXd& scores,
                                            int k);

struct SmoothingSpec {
  // Daniell half-width: negative means floor(sqrt(T)), 0 means the raw
  // (unsmoothed) periodogram.
  int span = -1;
  double taper = 0.1;  // split-cosine-bell proportion per end

  int resolve_span(Eigen::Index T) const;
};

/// Smoothed cross-periodogram on the full Fourier grid, normalized so that
/// the integral over (0, 2pi) approximates the covariance:
/// sum_l S(w_l) * (2pi/T) ~ Cov(z).
struct SpectralEstimate {
  Eigen::VectorXd frequencies;                // w_l = 2 pi l / T, l = 0..T-1
  std::vector<Eigen::MatrixXcd> cross_spectra;  // one m x m Hermitian per w_l
  SmoothingSpec smoothing;
};

SpectralEstimate estimate_cross_spectrum(const SeriesPanel& panel,
                                         SmoothingSpec smoothing = {});

/// Finite-sample Brillinger component: per-frequency leading eigenvectors of
/// the cross-spectral matrices, inverse-transformed into two-sided filters
/// truncated at half-width M.
struct BdpcModel {
  int M = 0;
  std::vector<Eigen::VectorXd> c;  // filter taps, index h+M for h = -M..M
  std::vector<Eigen::VectorXd> b;  // reconstruction taps, index j+M
  Eigen::VectorXd means;           // column means of the training panel
  double max_imag_residue = 0.0;   // measured when dropping imaginary parts
};

BdpcModel bdpc_fit(const SeriesPanel& panel, int M,
                   SmoothingSpec smoothing = {});

/// Truncated filter scores f_t, t = 1..T.
Eigen::VectorXd bdpc_scores(const SeriesPanel& panel, const BdpcModel& model);

struct BdpcReconstruction {
  Eigen::MatrixXd reconstructed;  // T x m
  double mse = 0.0;
};

BdpcReconstruction bdpc_reconstruct(const SeriesPanel& panel,
                                    const BdpcModel& model);

}  // namespace dpc
