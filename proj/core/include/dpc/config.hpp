#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace dpc {

enum class InitStrategy {
  Auto,         // classical PC for the MSE fit, spherical PC for the S fit
  ClassicalPc,  // first principal component scores, zero-padded
  SphericalPc,  // PCA of sign-normalized, median-centered data, zero-padded
  UserVector,   // caller supplies the full length-(T+k) start vector
};

struct SolverConfig {
  int k = 0;               // forward lags
  int p = 1;               // components
  double epsilon = 1e-4;   // relative-improvement stopping tolerance
  int max_iter = 500;
  InitStrategy init = InitStrategy::Auto;
  Eigen::VectorXd init_vector;  // used with InitStrategy::UserVector
  std::uint64_t seed = 0;       // for the randomized init fallback

  void validate() const;  // throws ConfigError
};

}  // namespace dpc
