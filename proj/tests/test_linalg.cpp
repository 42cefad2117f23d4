#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "scatterkit/error.hpp"
#include "scatterkit/linalg.hpp"
#include "scatterkit/rng.hpp"

using namespace spk;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

// A^t A + d I is symmetric positive definite for any d > 0.
Matrix random_spd(std::size_t n, std::uint64_t seed, double diag = 1.0) {
  const Matrix a = random_matrix(n, n, seed);
  Matrix s = matmul(transpose(a), a);
  for (std::size_t i = 0; i < n; ++i) s.at(i, i) += diag;
  return s;
}

}  // namespace

TEST_CASE("matvec matches a hand-rolled loop") {
  const Matrix a = random_matrix(5, 7, 11);
  Rng rng(12);
  std::vector<double> x(7);
  for (double& v : x) v = rng.uniform(-2.0, 2.0);

  const auto y = matvec(a, x);
  REQUIRE(y.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 7; ++j) s += a.at(i, j) * x[j];
    CHECK(y[i] == doctest::Approx(s).epsilon(1e-12));
  }

  CHECK_THROWS_AS(matvec(a, std::vector<double>(6)), Error);
}

TEST_CASE("complex matvec applies the field factors") {
  CMatrix t(2, 2);
  t.at(0, 0) = {1.0, 2.0};
  t.at(0, 1) = {0.0, -1.0};
  t.at(1, 0) = {3.0, 0.0};
  t.at(1, 1) = {0.5, 0.5};
  const std::vector<double> x = {2.0, 4.0};
  const auto y = matvec(t, x);
  CHECK(y[0].real() == doctest::Approx(2.0));
  CHECK(y[0].imag() == doctest::Approx(0.0));
  CHECK(y[1].real() == doctest::Approx(8.0));
  CHECK(y[1].imag() == doctest::Approx(2.0));
}

TEST_CASE("matmul against associativity and identity") {
  const Matrix a = random_matrix(4, 6, 21);
  const Matrix b = random_matrix(6, 3, 22);
  const Matrix c = random_matrix(3, 5, 23);

  const Matrix ab_c = matmul(matmul(a, b), c);
  const Matrix a_bc = matmul(a, matmul(b, c));
  REQUIRE(ab_c.rows() == 4);
  REQUIRE(ab_c.cols() == 5);
  for (std::size_t i = 0; i < ab_c.size(); ++i) {
    CHECK(ab_c.values()[i] == doctest::Approx(a_bc.values()[i]).epsilon(1e-10));
  }

  const Matrix ai = matmul(a, identity(6));
  CHECK(ai == a);
  CHECK_THROWS_AS(matmul(a, c), Error);
}

TEST_CASE("transpose and trace") {
  const Matrix a = random_matrix(3, 4, 31);
  const Matrix at = transpose(a);
  REQUIRE(at.rows() == 4);
  REQUIRE(at.cols() == 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(at.at(j, i) == a.at(i, j));

  const Matrix s = random_spd(5, 32);
  double diag = 0.0;
  for (std::size_t i = 0; i < 5; ++i) diag += s.at(i, i);
  CHECK(trace(s) == doctest::Approx(diag));
  CHECK_THROWS_AS(trace(a), Error);
}

TEST_CASE("cholesky solves a known system") {
  // A = [[4,2],[2,3]], b = [8,7]; det 8, so x = (1/8)[[3,-2],[-2,4]] b.
  Matrix a(2, 2);
  a.at(0, 0) = 4.0; a.at(0, 1) = 2.0;
  a.at(1, 0) = 2.0; a.at(1, 1) = 3.0;
  const std::vector<double> b = {8.0, 7.0};
  const auto x = CholeskyFactor(a).solve(b);
  CHECK(x[0] == doctest::Approx(10.0 / 8.0).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(12.0 / 8.0).epsilon(1e-14));
}

TEST_CASE("cholesky residual stays small on random spd systems") {
  for (std::uint64_t seed : {41u, 42u, 43u}) {
    const std::size_t n = 20;
    const Matrix a = random_spd(n, seed, 0.5);
    Rng rng(seed + 100);
    std::vector<double> b(n);
    for (double& v : b) v = rng.normal();

    const auto x = CholeskyFactor(a).solve(b);
    const auto ax = matvec(a, x);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(ax[i] == doctest::Approx(b[i]).epsilon(1e-8));
    }
  }
}

TEST_CASE("cholesky solve_many equals column-wise solves") {
  const Matrix a = random_spd(8, 51);
  const Matrix b = random_matrix(8, 3, 52);
  const CholeskyFactor f(a);
  const Matrix x = f.solve_many(b);
  for (std::size_t j = 0; j < 3; ++j) {
    std::vector<double> col(8);
    for (std::size_t i = 0; i < 8; ++i) col[i] = b.at(i, j);
    const auto xj = f.solve(col);
    for (std::size_t i = 0; i < 8; ++i) CHECK(x.at(i, j) == xj[i]);
  }
}

TEST_CASE("cholesky rejects indefinite and rank-deficient input") {
  Matrix indef(2, 2);
  indef.at(0, 0) = 1.0; indef.at(0, 1) = 2.0;
  indef.at(1, 0) = 2.0; indef.at(1, 1) = 1.0;  // eigenvalues 3, -1
  CHECK_THROWS_AS(CholeskyFactor{indef}, Error);

  // Rank-1 Gram matrix of a single vector.
  Matrix v(1, 3);
  v.at(0, 0) = 1.0; v.at(0, 1) = 2.0; v.at(0, 2) = 3.0;
  const Matrix rank1 = matmul(transpose(v), v);
  try {
    CholeskyFactor f(rank1);
    FAIL("rank-deficient matrix must not factor");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::solver_failure);
  }
}

TEST_CASE("conjugate gradient agrees with cholesky") {
  const std::size_t n = 30;
  const Matrix a = random_spd(n, 61, 0.5);
  Rng rng(62);
  std::vector<double> b(n);
  for (double& v : b) v = rng.normal();

  const auto xc = CholeskyFactor(a).solve(b);
  const auto r = conjugate_gradient(a, b, 1e-14, 10 * n);
  REQUIRE(r.x.size() == n);
  CHECK(r.residual <= 1e-12);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(r.x[i] == doctest::Approx(xc[i]).epsilon(1e-8));
  }
}

TEST_CASE("conjugate gradient handles the zero right-hand side without iterating") {
  const Matrix a = random_spd(6, 71);
  const auto r = conjugate_gradient(a, std::vector<double>(6, 0.0), 1e-10, 100);
  CHECK(r.iterations == 0);
  for (double v : r.x) CHECK(v == 0.0);
}

TEST_CASE("conjugate gradient reports non-convergence through a typed error") {
  const Matrix a = random_spd(16, 81, 1e-6);
  Rng rng(82);
  std::vector<double> b(16);
  for (double& v : b) v = rng.normal();
  try {
    conjugate_gradient(a, b, 1e-15, 1);
    FAIL("one iteration cannot reach 1e-15");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::convergence);
  }
}
