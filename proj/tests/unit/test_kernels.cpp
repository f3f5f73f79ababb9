#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "itl/kernels.hpp"
#include "support.hpp"

using namespace itl;

TEST_CASE("kernel_eval examples") {
  Eigen::Vector2d a(0, 0), b(1, 0), c(0, 1);
  CHECK(kernel_eval(KernelSpec::rbf(1.0), a, a) == 1.0);
  CHECK(kernel_eval(KernelSpec::linear(), b, c) == 0.0);
  CHECK(kernel_eval(KernelSpec::rbf(1.0), a, b) == doctest::Approx(std::exp(-1.0)));
  CHECK(kernel_eval(KernelSpec::rbf(1.0), a, b) == doctest::Approx(0.367879).epsilon(1e-6));
  CHECK_THROWS(kernel_eval(KernelSpec::rbf(1.0), a, Eigen::Vector3d(0, 0, 0)));
  CHECK_THROWS(kernel_eval(KernelSpec{KernelKind::RBF, -1.0}, a, b));
}

TEST_CASE("gram examples") {
  const Matrix id = Matrix::Identity(2, 2);
  CHECK(gram(KernelSpec::linear(), id, id).isApprox(id));

  Matrix x(2, 2), y(1, 2);
  x << 0, 0, 1, 0;
  y << 1, 0;
  const Matrix k = gram(KernelSpec::rbf(1.0), x, y);
  REQUIRE(k.rows() == 2);
  REQUIRE(k.cols() == 1);
  CHECK(k(0, 0) == doctest::Approx(std::exp(-1.0)));
  CHECK(k(1, 0) == 1.0);
  CHECK_THROWS(gram(KernelSpec::linear(), x, Matrix::Zero(1, 3)));
}

TEST_CASE("gram properties on random inputs") {
  Philox4x32 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + rng.below(49));
    const Matrix x = testing::random_matrix(rng, n, 4);
    const Matrix y = testing::random_matrix(rng, 7, 4);
    const Matrix kr = gram(KernelSpec::rbf(rng.uniform(0.1, 3.0)), x, x);
    CHECK((kr - kr.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((kr.diagonal().array() == 1.0).all());
    CHECK((kr.array() > 0.0).all());
    CHECK((kr.array() <= 1.0).all());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(kr);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-8);

    const Matrix kl = gram(KernelSpec::linear(), x, y);
    CHECK(kl == Matrix(x * y.transpose()));
    Eigen::SelfAdjointEigenSolver<Matrix> eig_l(gram(KernelSpec::linear(), x, x));
    CHECK(eig_l.eigenvalues().minCoeff() >= -1e-8);
  }
}

TEST_CASE("median_bandwidth examples") {
  Matrix two(2, 2);
  two << 0, 0, 2, 0;
  CHECK(median_bandwidth(two) == doctest::Approx(0.25));

  Matrix three(3, 2);
  three << 0, 0, 1, 0, 3, 0;
  CHECK(median_bandwidth(three) == doctest::Approx(0.25));

  Matrix four(4, 1);  // distances {1,2,3,1,2,1}: central pair (1,2) -> 1.5
  four << 0, 1, 2, 3;
  CHECK(median_bandwidth(four) == doctest::Approx(1.0 / 2.25));

  CHECK_THROWS_AS(median_bandwidth(Matrix::Zero(2, 2)), DataError);
  CHECK_THROWS(median_bandwidth(Matrix::Zero(1, 2)));
}

TEST_CASE("median_bandwidth is invariant to row order") {
  Philox4x32 rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = testing::random_matrix(rng, 15, 3);
    std::vector<Eigen::Index> perm(15);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size() - 1; i > 0; --i) {
      std::swap(perm[i], perm[rng.below(i + 1)]);
    }
    Matrix shuffled(15, 3);
    for (Eigen::Index i = 0; i < 15; ++i) shuffled.row(i) = x.row(perm[i]);
    CHECK(median_bandwidth(shuffled) == median_bandwidth(x));
  }
}
