#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dpc/panel.hpp"

namespace dpc {

struct Convergence {
  int iterations = 0;
  double criterion = 0.0;  // final loss (MSE, or SRS for robust fits)
  bool converged = false;
};

/// One fitted dynamic component. The factor f has length T+k and satisfies
/// mean(f) = 0, sum(f^2)/(T+k) = 1; beta(j, i) multiplies f_{t+i}, i = 0..k.
/// The sign is fixed so the entry of f with largest magnitude is positive
/// (earliest index wins ties).
struct DpcComponent {
  int k = 0;
  Eigen::VectorXd f;       // length T + k
  Eigen::MatrixXd beta;    // m x (k+1)
  Eigen::VectorXd alpha;   // length m
  Convergence convergence;
};

/// An ordered stack of components. residual_panels[s] is what is left of the
/// input after subtracting the reconstructions of components 0..s.
struct DpcModel {
  std::vector<DpcComponent> components;
  std::vector<SeriesPanel> residual_panels;

  int p() const { return static_cast<int>(components.size()); }
};

}  // namespace dpc
