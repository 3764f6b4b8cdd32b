#include <doctest.h>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "dpc/errors.hpp"
#include "dpc/metrics.hpp"
#include "dpc/simulation.hpp"
#include "dpc/solver.hpp"
#include "helpers.hpp"

using namespace dpc;

namespace {

// brute-force c_{j,t,q} straight from the index conditions (1-based math)
Eigen::MatrixXd build_c_oracle(const SeriesPanel& panel, double alpha_j,
                               Eigen::Index j, int k) {
  const Eigen::Index T = panel.rows();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(T + k, k + 1);
  for (Eigen::Index t = 1; t <= T + k; ++t) {
    for (Eigen::Index q = 1; q <= k + 1; ++q) {
      if (q >= std::max<Eigen::Index>(1, t - T + 1) &&
          q <= std::min<Eigen::Index>(k + 1, t)) {
        c(t - 1, q - 1) = panel.values(t - q, j) - alpha_j;
      }
    }
  }
  return c;
}

// brute-force d_{t,q} = sum_j sum_v beta(j, q-v+1) beta(j, t-v+1) (1-based)
Eigen::MatrixXd build_d_oracle(const Eigen::MatrixXd& beta, Eigen::Index T) {
  const Eigen::Index m = beta.rows();
  const Eigen::Index k = beta.cols() - 1;
  const Eigen::Index n = T + k;
  const auto b = [&](Eigen::Index j, Eigen::Index idx) {  // 1-based column
    return (idx >= 1 && idx <= k + 1) ? beta(j, idx - 1) : 0.0;
  };
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index t = 1; t <= n; ++t) {
    for (Eigen::Index q = 1; q <= n; ++q) {
      if (q < std::max<Eigen::Index>(t - k, 1) ||
          q > std::min<Eigen::Index>(t + k, n)) {
        continue;
      }
      double val = 0.0;
      for (Eigen::Index v = std::max<Eigen::Index>(t - k, 1);
           v <= std::min<Eigen::Index>(t, T); ++v) {
        for (Eigen::Index j = 0; j < m; ++j) {
          val += b(j, q - v + 1) * b(j, t - v + 1);
        }
      }
      d(t - 1, q - 1) = val;
    }
  }
  return d;
}

Eigen::MatrixXd design_matrix(const Eigen::VectorXd& f, Eigen::Index T) {
  const Eigen::Index k = f.size() - T;
  Eigen::MatrixXd design(T, k + 2);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (Eigen::Index i = 0; i <= k; ++i) design(t, i) = f(t + i);
    design(t, k + 1) = 1.0;
  }
  return design;
}

}  // namespace

TEST_SUITE_BEGIN("solver");

TEST_CASE("build_c: k=0 collapses to the centered observation column") {
  SeriesPanel panel = test::factor_panel(1, 12, 2);
  Eigen::VectorXd alpha(2);
  alpha << 0.3, -0.7;
  const auto cs = build_c(panel, alpha, 0);
  REQUIRE(cs.size() == 2);
  for (int j = 0; j < 2; ++j) {
    CHECK(cs[j].rows() == 12);
    CHECK(cs[j].cols() == 1);
    CHECK((cs[j].col(0) -
           (panel.values.col(j).array() - alpha(j)).matrix())
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}

TEST_CASE("build_c: T=3 k=1 band enumeration") {
  SeriesPanel panel = SeriesPanel::make((Eigen::MatrixXd(3, 1) << 1, 2, 3)
                                            .finished());
  const auto cs = build_c(panel, Eigen::VectorXd::Zero(1), 1);
  Eigen::MatrixXd expected(4, 2);
  expected << 1, 0,
              2, 1,
              3, 2,
              0, 3;
  CHECK((cs[0] - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("build_c: centered panel matches the brute-force double loop") {
  SeriesPanel panel = test::factor_panel(7, 17, 3);
  const Eigen::VectorXd alpha = panel.values.colwise().mean();
  const int k = 3;
  const auto cs = build_c(panel, alpha, k);
  for (Eigen::Index j = 0; j < 3; ++j) {
    const Eigen::MatrixXd oracle = build_c_oracle(panel, alpha(j), j, k);
    CHECK((cs[j] - oracle).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("build_d: k=0 gives (sum of squared loadings) * I") {
  Rng rng(21);
  const Eigen::MatrixXd beta = test::random_matrix(rng, 4, 1);
  SymmetricBandMatrix d = build_d(beta, 9);
  const double s = beta.squaredNorm();
  for (Eigen::Index i = 0; i < 9; ++i) {
    CHECK(d(i, i) == doctest::Approx(s).epsilon(1e-14));
    if (i > 0) CHECK(d(i, i - 1) == 0.0);
  }
}

TEST_CASE("build_d: k=1 corner and interior entries") {
  Eigen::MatrixXd beta(2, 2);
  beta << 1, 1,
          1, 0;
  const double a1 = 2.0, a2 = 1.0, b = 1.0;
  SymmetricBandMatrix d = build_d(beta, 6);
  CHECK(d(0, 0) == doctest::Approx(a1));
  CHECK(d(6, 6) == doctest::Approx(a2));
  for (Eigen::Index i = 1; i < 6; ++i) {
    CHECK(d(i, i) == doctest::Approx(a1 + a2));
  }
  for (Eigen::Index i = 0; i < 6; ++i) {
    CHECK(d(i + 1, i) == doctest::Approx(b));
  }
}

TEST_CASE("build_d: random instance matches the triple-loop oracle") {
  Rng rng(23);
  const Eigen::MatrixXd beta = test::random_matrix(rng, 3, 4);  // k = 3
  const Eigen::Index T = 8;
  SymmetricBandMatrix d = build_d(beta, T);
  const Eigen::MatrixXd oracle = build_d_oracle(beta, T);
  CHECK((d.dense() - oracle).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("build_d: entries vanish outside bandwidth k (exact)") {
  Rng rng(29);
  const Eigen::MatrixXd beta = test::random_matrix(rng, 2, 3);  // k = 2
  const Eigen::MatrixXd dense = build_d(beta, 10).dense();
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      if (std::abs(static_cast<long>(i - j)) > 2) CHECK(dense(i, j) == 0.0);
    }
  }
}

TEST_CASE("build_d: interior is Toeplitz") {
  Rng rng(31);
  const Eigen::MatrixXd beta = test::random_matrix(rng, 3, 3);  // k = 2
  const Eigen::Index T = 12;
  SymmetricBandMatrix d = build_d(beta, T);
  // rows k+1 .. T (1-based) depend only on the offset
  for (Eigen::Index off = 0; off <= 2; ++off) {
    const double ref = d(4, 4 - off);
    for (Eigen::Index t = 4; t < T; ++t) {
      CHECK(d(t, t - off) == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("update_f: k=0 is the classical score update") {
  SeriesPanel panel = test::factor_panel(37, 20, 3);
  Rng rng(38);
  Eigen::MatrixXd beta = test::random_matrix(rng, 3, 1);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(3);
  const Eigen::VectorXd f = update_f(panel, beta, alpha);
  const Eigen::VectorXd expected =
      panel.values * beta.col(0) / beta.col(0).squaredNorm();
  CHECK((f - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("update_f: small instance equals the dense solution") {
  SeriesPanel panel = test::factor_panel(41, 4, 2, 0.8);
  Rng rng(42);
  const Eigen::MatrixXd beta = test::random_matrix(rng, 2, 2);
  const Eigen::VectorXd alpha = test::random_vector(rng, 2);
  const Eigen::VectorXd f = update_f(panel, beta, alpha);

  const Eigen::MatrixXd dense = build_d_oracle(beta, 4);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(5);
  const auto cs = build_c(panel, alpha, 1);
  for (int j = 0; j < 2; ++j) rhs += cs[j] * beta.row(j).transpose();
  const Eigen::VectorXd expected = dense.ldlt().solve(rhs);
  CHECK((f - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("update_f: converged fit is a fixed point") {
  SeriesPanel panel = generate_panel(60, 43);
  SolverConfig config;
  config.k = 1;
  config.epsilon = 1e-12;
  config.max_iter = 5000;
  DpcComponent component = fit_component(panel, config);
  // drive the alternation the rest of the way to its fixed point
  Eigen::VectorXd f = component.f;
  Eigen::MatrixXd beta = component.beta;
  Eigen::VectorXd alpha = component.alpha;
  for (int it = 0; it < 500; ++it) {
    f = normalize_factor(update_f(panel, beta, alpha));
    std::tie(beta, alpha) = update_beta_alpha(panel, f);
  }
  const Eigen::VectorXd again = normalize_factor(update_f(panel, beta, alpha));
  CHECK((again - f).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("update_beta_alpha: noiseless regression is exact") {
  Rng rng(51);
  const int T = 15;
  Eigen::VectorXd f = normalize_factor(test::random_vector(rng, T));
  Eigen::MatrixXd z(T, 1);
  z.col(0) = 2.0 * f.array() + 3.0;
  SeriesPanel panel = SeriesPanel::make(z);
  const auto [beta, alpha] = update_beta_alpha(panel, f);
  CHECK(beta(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(alpha(0) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("update_beta_alpha: series orthogonal to the design fits to zero") {
  Rng rng(53);
  const int T = 20, k = 1;
  const Eigen::VectorXd f = normalize_factor(test::random_vector(rng, T + k));
  const Eigen::MatrixXd design = design_matrix(f, T);
  // project a random series onto the orthogonal complement of the design
  Eigen::VectorXd z = test::random_vector(rng, T);
  z -= design * (design.colPivHouseholderQr().solve(z));
  SeriesPanel panel = SeriesPanel::make(z);
  const auto [beta, alpha] = update_beta_alpha(panel, f);
  CHECK(beta.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(alpha(0)) < 1e-12);
}

TEST_CASE("update_beta_alpha: matches the normal-equations oracle") {
  SeriesPanel panel = test::factor_panel(57, 20, 3, 0.6);
  Rng rng(58);
  const Eigen::VectorXd f = normalize_factor(test::random_vector(rng, 22));
  const auto [beta, alpha] = update_beta_alpha(panel, f);
  const Eigen::MatrixXd design = design_matrix(f, 20);
  const Eigen::MatrixXd theta =
      (design.transpose() * design).inverse() * design.transpose() *
      panel.values;
  for (int j = 0; j < 3; ++j) {
    CHECK((beta.row(j).transpose() - theta.col(j).head(3)).cwiseAbs().maxCoeff()
          < 1e-10);
    CHECK(std::abs(alpha(j) - theta(3, j)) < 1e-10);
  }
}

TEST_CASE("update_beta_alpha: constant factor triggers a degeneracy error") {
  SeriesPanel panel = test::factor_panel(59, 12, 2);
  const Eigen::VectorXd f = Eigen::VectorXd::Ones(13);
  CHECK_THROWS_AS(update_beta_alpha(panel, f), DegeneracyError);
}

TEST_CASE("fit_component: k=0 equals the first principal component") {
  SeriesPanel panel = test::factor_panel(61, 80, 5, 0.4);
  SolverConfig config;
  config.k = 0;
  config.epsilon = 1e-12;
  config.max_iter = 2000;
  DpcComponent component = fit_component(panel, config);
  REQUIRE(component.convergence.converged);

  Eigen::MatrixXd centered =
      panel.values.rowwise() - panel.values.colwise().mean();
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(panel.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const double ev_eigen =
      100.0 * es.eigenvalues()(4) / es.eigenvalues().sum();
  CHECK(explained_variance(panel, component) ==
        doctest::Approx(ev_eigen).epsilon(1e-6));

  const Eigen::VectorXd scores = centered * es.eigenvectors().col(4);
  const double corr =
      std::abs((scores.array() - scores.mean()).matrix().normalized().dot(
          (component.f.array() - component.f.mean()).matrix().normalized()));
  CHECK(corr > 1.0 - 1e-8);
}

TEST_CASE("fit_component: study panel at k=5 reaches the published error level") {
  SeriesPanel panel = generate_panel(100, 4096);
  SolverConfig config;
  config.k = 5;
  DpcComponent component = fit_component(panel, config);
  const double value = mse(panel, component);
  CHECK(value > 0.005);
  CHECK(value < 0.05);
}

TEST_CASE("fit_component: a single series reconstructs itself at k=0") {
  Rng rng(67);
  SeriesPanel panel = SeriesPanel::make(test::random_vector(rng, 30));
  SolverConfig config;
  DpcComponent component = fit_component(panel, config);
  CHECK(mse(panel, component) < 1e-12);
}

TEST_CASE("fit_component: MSE trace never increases (descent)") {
  SeriesPanel panel = generate_panel(80, 71);
  SolverConfig config;
  config.k = 3;
  config.epsilon = 1e-11;
  config.max_iter = 2000;
  std::vector<double> trace;
  fit_component(panel, config, &trace);
  REQUIRE(trace.size() > 2);
  for (std::size_t i = 1; i < trace.size(); ++i) {
    CHECK(trace[i] <= trace[i - 1] * (1.0 + 1e-12));
  }
}

TEST_CASE("fit_component: finite-difference gradient vanishes at the optimum") {
  SeriesPanel panel = test::factor_panel(73, 50, 3, 0.2);
  SolverConfig config;
  config.k = 2;
  config.epsilon = 1e-12;
  config.max_iter = 5000;
  DpcComponent component = fit_component(panel, config);
  const double sd = std::sqrt(total_variance(panel) / panel.cols());
  const double h = 1e-6 * sd;
  double max_grad = 0.0;
  for (Eigen::Index t = 0; t < component.f.size(); ++t) {
    Eigen::VectorXd fp = component.f, fm = component.f;
    fp(t) += h;
    fm(t) -= h;
    const double g = (mse(panel, fp, component.beta, component.alpha) -
                      mse(panel, fm, component.beta, component.alpha)) /
                     (2.0 * h);
    max_grad = std::max(max_grad, std::abs(g));
  }
  CHECK(max_grad < 1e-4 * sd);
}

TEST_CASE("fit_component: affine panel transforms map through the fit") {
  SeriesPanel panel = test::factor_panel(79, 40, 3, 0.3);
  SolverConfig config;
  config.k = 1;
  config.epsilon = 1e-12;
  config.max_iter = 3000;
  DpcComponent base = fit_component(panel, config);
  const Eigen::MatrixXd base_recon =
      component_reconstruction(base, panel.rows());
  for (double gamma : {2.5, -1.25}) {
    const double delta = 0.75;
    SeriesPanel scaled;
    scaled.values = gamma * panel.values.array() + delta;
    scaled.labels = panel.labels;
    DpcComponent other = fit_component(scaled, config);
    const Eigen::MatrixXd recon =
        component_reconstruction(other, panel.rows());
    CHECK((recon - (gamma * base_recon.array() + delta).matrix())
              .cwiseAbs()
              .maxCoeff() < 1e-8 * std::abs(gamma));
    CHECK(std::min((other.f - base.f).cwiseAbs().maxCoeff(),
                   (other.f + base.f).cwiseAbs().maxCoeff()) < 1e-7);
  }
}

TEST_CASE("fit_component: sign convention puts the peak entry positive") {
  SeriesPanel panel = test::factor_panel(83, 30, 3);
  SolverConfig config;
  config.k = 1;
  DpcComponent component = fit_component(panel, config);
  Eigen::Index arg = 0;
  component.f.cwiseAbs().maxCoeff(&arg);
  CHECK(component.f(arg) > 0.0);
}

TEST_CASE("fit: two orthogonal static factors reach the two-PC error level") {
  Rng rng(89);
  const int T = 60, m = 5;
  Eigen::MatrixXd g = test::random_matrix(rng, T, 2);
  // orthonormalize the two factor score vectors
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  g = qr.householderQ() * Eigen::MatrixXd::Identity(T, 2);
  const Eigen::MatrixXd loadings = test::random_matrix(rng, m, 2);
  SeriesPanel panel =
      SeriesPanel::make(g.col(0) * loadings.col(0).transpose() +
                        g.col(1) * loadings.col(1).transpose());

  SolverConfig config;
  config.k = 0;
  config.p = 2;
  config.epsilon = 1e-12;
  config.max_iter = 2000;
  DpcModel model = fit(panel, config);

  Eigen::MatrixXd centered =
      panel.values.rowwise() - panel.values.colwise().mean();
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(T);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const double two_pc_ev =
      100.0 * (es.eigenvalues()(m - 1) + es.eigenvalues()(m - 2)) /
      es.eigenvalues().sum();

  const SeriesPanel& resid = model.residual_panels.back();
  double mse_total = 0.0;
  for (int j = 0; j < m; ++j) {
    mse_total += resid.values.col(j).squaredNorm() / T;
  }
  const double ev = 100.0 * (1.0 - mse_total / total_variance(panel));
  CHECK(ev >= two_pc_ev - 1e-6);
}

TEST_CASE("fit: p=1 reduces to fit_component") {
  SeriesPanel panel = test::factor_panel(97, 40, 3);
  SolverConfig config;
  config.k = 1;
  DpcModel model = fit(panel, config);
  DpcComponent component = fit_component(panel, config);
  CHECK(model.p() == 1);
  CHECK((model.components[0].f - component.f).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fit: residual panels satisfy the subtraction invariant") {
  SeriesPanel panel = generate_panel(60, 101);
  SolverConfig config;
  config.k = 1;
  config.p = 2;
  DpcModel model = fit(panel, config);
  Eigen::MatrixXd expected = panel.values;
  for (int s = 0; s < model.p(); ++s) {
    expected -= component_reconstruction(model.components[s], panel.rows());
    CHECK((model.residual_panels[s].values - expected).cwiseAbs().maxCoeff()
          < 1e-10);
  }
}

TEST_CASE("reconstruct: noiseless one-factor panel round-trips") {
  Rng rng(103);
  const int T = 40, m = 4;
  const Eigen::VectorXd g = test::random_vector(rng, T);
  Eigen::MatrixXd z(T, m);
  for (int j = 0; j < m; ++j) z.col(j) = (1.0 + 0.5 * j) * g;
  SeriesPanel panel = SeriesPanel::make(z);
  SolverConfig config;
  config.epsilon = 1e-13;
  DpcModel model = fit(panel, config);
  const SeriesPanel recon = reconstruct(model, 1);
  CHECK((recon.values - panel.values).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("reconstruct: single-component formula matches a scalar loop") {
  SeriesPanel panel = test::factor_panel(107, 25, 3, 0.5);
  SolverConfig config;
  config.k = 2;
  DpcModel model = fit(panel, config);
  const SeriesPanel recon = reconstruct(model, 1);
  const DpcComponent& component = model.components[0];
  for (Eigen::Index t = 0; t < panel.rows(); ++t) {
    for (Eigen::Index j = 0; j < panel.cols(); ++j) {
      double zhat = component.alpha(j);
      for (int i = 0; i <= component.k; ++i) {
        zhat += component.beta(j, i) * component.f(t + i);
      }
      CHECK(recon.values(t, j) == doctest::Approx(zhat).epsilon(1e-12));
    }
  }
}

TEST_CASE("reconstruct: MSE is non-increasing in the component count") {
  SeriesPanel panel = test::factor_panel(109, 50, 4, 0.6);
  SolverConfig config;
  config.k = 1;
  config.p = 3;
  DpcModel model = fit(panel, config);
  double prev = std::numeric_limits<double>::infinity();
  for (int upto = 1; upto <= model.p(); ++upto) {
    const SeriesPanel recon = reconstruct(model, upto);
    double value = 0.0;
    for (Eigen::Index j = 0; j < panel.cols(); ++j) {
      value += (panel.values.col(j) - recon.values.col(j)).squaredNorm() /
               panel.rows();
    }
    CHECK(value <= prev + 1e-12);
    prev = value;
  }
  CHECK_THROWS_AS(reconstruct(model, 4), ConfigError);
}

TEST_CASE("fit_component: records non-convergence at the iteration cap") {
  SeriesPanel panel = generate_panel(60, 113);
  SolverConfig config;
  config.k = 4;
  config.epsilon = 1e-16;
  config.max_iter = 2;
  DpcComponent component = fit_component(panel, config);
  CHECK_FALSE(component.convergence.converged);
  CHECK(component.convergence.iterations == 2);
}

TEST_SUITE_END();
