#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "kronlp/kron_ops.hpp"
#include "oracles.hpp"

using namespace kronlp;
using oracles::dense_kron;
using oracles::unvec;
using oracles::vec;

TEST_CASE("sym_eig identity and diagonal") {
  const EigenSystemd eye = sym_eig(Matrix::Identity(4, 4));
  CHECK(eye.values.isApproxToConstant(1.0, 1e-14));

  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 2.0;
  D(1, 1) = 5.0;
  const EigenSystemd eig = sym_eig(D);
  CHECK(eig.values[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(eig.values[1] == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("sym_eig reconstruction and orthogonality on random symmetric input") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix K = oracles::random_symmetric(8, rng);
    const EigenSystemd eig = sym_eig(K);
    const Matrix rebuilt = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
    const double scale = std::max(1.0, K.cwiseAbs().maxCoeff());
    CHECK((rebuilt - K).cwiseAbs().maxCoeff() <= 1e-8 * scale);
    const Matrix gram = eig.vectors.transpose() * eig.vectors;
    CHECK((gram - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("sym_eig rejects non-symmetric input") {
  Matrix bad = Matrix::Zero(3, 3);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(sym_eig(bad), std::invalid_argument);
  CHECK_THROWS_AS(sym_eig(Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("kron_apply basics") {
  std::mt19937_64 rng(11);
  const Matrix C = oracles::random_matrix(3, 4, rng);
  CHECK(kron_apply(Matrix::Identity(4, 4), Matrix::Identity(3, 3), C).isApprox(C, 1e-14));
  CHECK(kron_apply(3.0 * Matrix::Identity(4, 4), 2.0 * Matrix::Identity(3, 3), C)
            .isApprox(6.0 * C, 1e-14));
  CHECK_THROWS_AS(kron_apply(Matrix::Identity(5, 5), Matrix::Identity(3, 3), C),
                  std::invalid_argument);
}

TEST_CASE("kron_apply equals the explicit Kronecker product") {
  std::mt19937_64 rng(13);
  SUBCASE("2x2 instance to 1e-12") {
    const Matrix K_D = oracles::random_matrix(2, 2, rng);
    const Matrix K_S = oracles::random_matrix(2, 2, rng);
    const Matrix C = oracles::random_matrix(2, 2, rng);
    const Vector expected = dense_kron(K_S, K_D) * vec(C);
    const Matrix got = kron_apply(K_S, K_D, C);
    CHECK((vec(got) - expected).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("all shapes up to 4x4, 100 random instances") {
    std::uniform_int_distribution<Index> dim(1, 4);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const Index n = dim(rng), m = dim(rng);
      const Matrix K_D = oracles::random_matrix(n, n, rng);
      const Matrix K_S = oracles::random_matrix(m, m, rng);
      const Matrix C = oracles::random_matrix(n, m, rng);
      const Vector expected = dense_kron(K_S, K_D) * vec(C);
      worst = std::max(worst,
                       (vec(kron_apply(K_S, K_D, C)) - expected).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("filter_solve grid of ones is the identity map") {
  std::mt19937_64 rng(17);
  const EigenSystemd eig_d = sym_eig(oracles::random_kernel(5, rng));
  const EigenSystemd eig_s = sym_eig(oracles::random_kernel(4, rng));
  const Matrix R = oracles::random_matrix(5, 4, rng);
  CHECK((filter_solve(eig_d, eig_s, Matrix::Ones(5, 4), R) - R).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(filter_solve(eig_d, eig_s, Matrix::Zero(5, 4), R).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(filter_solve(eig_d, eig_s, Matrix::Ones(4, 4), R), std::invalid_argument);
  CHECK_THROWS_AS(filter_solve(eig_d, eig_s, Matrix::Ones(5, 4), Matrix::Ones(4, 5)),
                  std::invalid_argument);
}

TEST_CASE("filter_solve with eigenvalue-product grid matches kron_apply") {
  std::mt19937_64 rng(19);
  const Matrix K_D = oracles::random_kernel(6, rng);
  const Matrix K_S = oracles::random_kernel(5, rng);
  const EigenSystemd eig_d = sym_eig(K_D);
  const EigenSystemd eig_s = sym_eig(K_S);
  const Matrix R = oracles::random_matrix(6, 5, rng);
  const Matrix grid = eigenvalue_products(eig_d, eig_s, /*clamp_dust=*/false);
  const Matrix via_filter = filter_solve(eig_d, eig_s, grid, R);
  const Matrix direct = kron_apply(K_S, K_D, R);
  CHECK((via_filter - direct).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("kronrls_filter values") {
  EigenSystemd eig_d{Matrix::Identity(3, 3), Vector::Zero(3)};
  eig_d.values << 0.0, 1.0, 2.0;
  EigenSystemd eig_s{Matrix::Identity(2, 2), Vector::Zero(2)};
  eig_s.values << 1.0, 3.0;
  const Matrix grid = kronrls_filter(eig_d, eig_s, 2.0);
  CHECK(grid(0, 0) == 0.0);  // zero eigenvalue product
  CHECK(grid(1, 1) == doctest::Approx(3.0 / 5.0));
  CHECK(grid(2, 0) == doctest::Approx(0.5));  // product equals lambda
  CHECK((grid.array() >= 0.0).all());
  CHECK((grid.array() < 1.0).all());
  CHECK_THROWS_AS(kronrls_filter(eig_d, eig_s, 0.0), std::invalid_argument);
}

TEST_CASE("kronrls_filter shrinkage is monotone in lambda") {
  std::mt19937_64 rng(23);
  const EigenSystemd eig_d = sym_eig(oracles::random_kernel(6, rng));
  const EigenSystemd eig_s = sym_eig(oracles::random_kernel(5, rng));
  const Matrix low = kronrls_filter(eig_d, eig_s, 0.5);
  const Matrix high = kronrls_filter(eig_d, eig_s, 2.5);
  CHECK(((high - low).array() <= 1e-15).all());
}

TEST_CASE("consensus_filter values and guard") {
  EigenSystemd eig_b{Matrix::Identity(2, 2), Vector::Zero(2)};
  eig_b.values << 0.5, 1.0;
  EigenSystemd eig_a{Matrix::Identity(2, 2), Vector::Zero(2)};
  eig_a.values << -1.0, 1.0;
  CHECK(consensus_filter(eig_b, eig_a, 0.0).isApproxToConstant(1.0, 1e-15));
  const Matrix grid = consensus_filter(eig_b, eig_a, 0.5);
  CHECK(grid(1, 1) == doctest::Approx(1.0));  // u = 1: (1 + 0.5 - 0.5)^-1
  CHECK(grid(1, 0) == doctest::Approx(0.5));  // u = -1
  CHECK_THROWS_AS(consensus_filter(eig_b, eig_a, -1.0), std::invalid_argument);

  EigenSystemd huge{Matrix::Identity(1, 1), Vector::Constant(1, 3.0)};
  EigenSystemd one{Matrix::Identity(1, 1), Vector::Constant(1, 1.0)};
  CHECK_THROWS_AS(consensus_filter(huge, one, 1.0), NumericError);
}

TEST_CASE("consensus filter solve matches the dense linear system") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix A = normalized_affinity(oracles::random_kernel(4, rng).cwiseAbs().eval());
    const Matrix B = normalized_affinity(oracles::random_kernel(5, rng).cwiseAbs().eval());
    const Matrix R = oracles::random_matrix(5, 4, rng);
    const double sigma = 0.7;
    const EigenSystemd eig_a = sym_eig(A);
    const EigenSystemd eig_b = sym_eig(B);
    const Matrix grid = consensus_filter(eig_b, eig_a, sigma);
    const Matrix fast = filter_solve(eig_b, eig_a, grid, R);
    const Matrix dense = oracles::dense_consensus_solve(A, B, R, sigma);
    CHECK((fast - dense).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("normalized_affinity basics") {
  CHECK(normalized_affinity(Matrix::Identity(3, 3)).isApprox(Matrix::Identity(3, 3), 1e-14));
  CHECK(normalized_affinity(Matrix::Ones(3, 3)).isApproxToConstant(1.0 / 3.0, 1e-14));
  Matrix zero_row = Matrix::Identity(3, 3);
  zero_row(1, 1) = 0.0;
  CHECK_THROWS_WITH_AS(normalized_affinity(zero_row),
                       "normalized_affinity: nonpositive degree at row 1", NumericError);
}

TEST_CASE("normalized_affinity of a nonnegative kernel has spectral radius at most 1") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix K = oracles::random_kernel(7, rng).cwiseAbs();
    const Matrix A = normalized_affinity(K);
    CHECK(oracles::power_iteration_radius(A) <= 1.0 + 1e-10);
  }
}

TEST_CASE("implied Laplacian I - A (x) B is positive semi-definite, via the trace identity") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix A = normalized_affinity(oracles::random_kernel(4, rng).cwiseAbs().eval());
    const Matrix B = normalized_affinity(oracles::random_kernel(6, rng).cwiseAbs().eval());
    const Matrix X = oracles::random_matrix(6, 4, rng);
    const double quad = X.squaredNorm() - (B * X).cwiseProduct(X * A.transpose()).sum();
    CHECK(quad >= -1e-8);
  }
}
