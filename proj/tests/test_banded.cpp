#include <doctest.h>

#include <Eigen/Cholesky>

#include "dpc/banded.hpp"
#include "dpc/errors.hpp"
#include "helpers.hpp"

using namespace dpc;

namespace {

// random SPD matrix with the given bandwidth via B B' of a banded factor
SymmetricBandMatrix random_spd_band(Rng& rng, Eigen::Index n,
                                    Eigen::Index bw) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = std::max<Eigen::Index>(0, i - bw); j <= i; ++j) {
      b(i, j) = rng.next_normal();
    }
    b(i, i) += 3.0;  // keep it well conditioned
  }
  const Eigen::MatrixXd a = b * b.transpose();
  SymmetricBandMatrix out(n, bw);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = std::max<Eigen::Index>(0, i - bw); j <= i; ++j) {
      out.set(i, j, a(i, j));
    }
  }
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("banded");

TEST_CASE("band storage round-trips through the dense view") {
  SymmetricBandMatrix a(5, 2);
  a.set(0, 0, 1.0);
  a.set(2, 1, -3.5);
  a.set(4, 2, 2.0);
  CHECK(a(1, 2) == -3.5);  // symmetry
  CHECK(a(0, 3) == 0.0);   // outside the band
  const Eigen::MatrixXd d = a.dense();
  CHECK(d(2, 1) == -3.5);
  CHECK(d(1, 2) == -3.5);
  CHECK(d.rows() == 5);
  CHECK_THROWS_AS(a.set(0, 4, 1.0), ShapeError);
}

TEST_CASE("banded Cholesky solve matches the dense solver") {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng.next_uniform() * 40);
    const Eigen::Index bw =
        static_cast<Eigen::Index>(rng.next_uniform() * std::min<Eigen::Index>(n - 1, 6));
    SymmetricBandMatrix a = random_spd_band(rng, n, bw);
    const Eigen::VectorXd rhs = test::random_vector(rng, n);

    BandCholesky chol;
    REQUIRE(chol.compute(a));
    const Eigen::VectorXd x = chol.solve(rhs);
    const Eigen::VectorXd dense = a.dense().ldlt().solve(rhs);
    CHECK((x - dense).cwiseAbs().maxCoeff() <
          1e-9 * (1.0 + dense.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("singular system fails the factorization and the jittered retry") {
  SymmetricBandMatrix a(4, 1);  // all zero: hopeless even with jitter of 0
  CHECK_FALSE(BandCholesky().compute(a));
  const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(4);
  CHECK_THROWS_AS(solve_banded_spd(a, rhs, "test"), DegeneracyError);
}

TEST_CASE("slightly indefinite diagonal is rescued by the single jitter") {
  SymmetricBandMatrix a(3, 0);
  a.set(0, 0, 1.0);
  a.set(1, 1, 1.0);
  a.set(2, 2, 0.0);  // exactly singular pivot, jitter makes it positive
  const Eigen::VectorXd rhs = Eigen::VectorXd::Zero(3);
  CHECK_NOTHROW(solve_banded_spd(a, rhs, "test"));
}

TEST_SUITE_END();
