#include "scatterkit/linalg.hpp"

#include <cmath>
#include <string>

#include "scatterkit/error.hpp"

namespace spk {

std::vector<double> matvec(const Matrix& A, std::span<const double> x) {
  if (x.size() != A.cols()) raise(Errc::shape, "matvec: size mismatch");
  std::vector<double> y(A.rows(), 0.0);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const double* r = A.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < A.cols(); ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

std::vector<std::complex<double>> matvec(const CMatrix& A,
                                         std::span<const double> x) {
  if (x.size() != A.cols()) raise(Errc::shape, "matvec: size mismatch");
  std::vector<std::complex<double>> y(A.rows());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const std::complex<double>* r = A.row(i);
    std::complex<double> s{0.0, 0.0};
    for (std::size_t j = 0; j < A.cols(); ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

Matrix matmul(const Matrix& A, const Matrix& B) {
  if (A.cols() != B.rows()) raise(Errc::shape, "matmul: size mismatch");
  Matrix C(A.rows(), B.cols(), 0.0);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    for (std::size_t k = 0; k < A.cols(); ++k) {
      const double a = A.at(i, k);
      if (a == 0.0) continue;
      const double* br = B.row(k);
      double* cr = C.row(i);
      for (std::size_t j = 0; j < B.cols(); ++j) cr[j] += a * br[j];
    }
  }
  return C;
}

Matrix transpose(const Matrix& A) {
  Matrix T(A.cols(), A.rows());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    for (std::size_t j = 0; j < A.cols(); ++j) T.at(j, i) = A.at(i, j);
  }
  return T;
}

double trace(const Matrix& A) {
  if (A.rows() != A.cols()) raise(Errc::shape, "trace: matrix not square");
  double t = 0.0;
  for (std::size_t i = 0; i < A.rows(); ++i) t += A.at(i, i);
  return t;
}

Matrix identity(std::size_t n) {
  Matrix I(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) I.at(i, i) = 1.0;
  return I;
}

CholeskyFactor::CholeskyFactor(Matrix A) : l_(std::move(A)) {
  const std::size_t n = l_.rows();
  if (n != l_.cols()) raise(Errc::shape, "cholesky: matrix not square");
  for (std::size_t j = 0; j < n; ++j) {
    double d = l_.at(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l_.at(j, k) * l_.at(j, k);
    if (!(d > 0.0)) {
      raise(Errc::solver_failure,
            "cholesky: non-positive pivot at column " + std::to_string(j) +
                "; the matrix is not positive definite (a larger ridge may "
                "help)");
    }
    const double root = std::sqrt(d);
    l_.at(j, j) = root;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = l_.at(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l_.at(i, k) * l_.at(j, k);
      l_.at(i, j) = s / root;
    }
    for (std::size_t k = j + 1; k < n; ++k) l_.at(j, k) = 0.0;
  }
}

std::vector<double> CholeskyFactor::solve(std::span<const double> b) const {
  const std::size_t n = l_.rows();
  if (b.size() != n) raise(Errc::shape, "cholesky solve: size mismatch");
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l_.at(i, k) * y[k];
    y[i] = s / l_.at(i, i);
  }
  std::vector<double> x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l_.at(k, ii) * x[k];
    x[ii] = s / l_.at(ii, ii);
  }
  return x;
}

Matrix CholeskyFactor::solve_many(const Matrix& B) const {
  if (B.rows() != l_.rows()) {
    raise(Errc::shape, "cholesky solve: size mismatch");
  }
  Matrix X(B.rows(), B.cols());
  std::vector<double> col(B.rows());
  for (std::size_t j = 0; j < B.cols(); ++j) {
    for (std::size_t i = 0; i < B.rows(); ++i) col[i] = B.at(i, j);
    const std::vector<double> x = solve(col);
    for (std::size_t i = 0; i < B.rows(); ++i) X.at(i, j) = x[i];
  }
  return X;
}

CgResult conjugate_gradient(const Matrix& A, std::span<const double> b,
                            double tol, std::size_t max_iter) {
  const std::size_t n = A.rows();
  if (A.cols() != n) raise(Errc::shape, "cg: matrix not square");
  if (b.size() != n) raise(Errc::shape, "cg: size mismatch");

  CgResult res;
  res.x.assign(n, 0.0);
  double bb = 0.0;
  for (double v : b) bb += v * v;
  if (bb == 0.0) return res;  // exact zero solution for a zero rhs

  const double bnorm = std::sqrt(bb);
  std::vector<double> r(b.begin(), b.end());
  std::vector<double> p = r;
  std::vector<double> ap(n);
  double rs = bb;
  for (std::size_t it = 0; it < max_iter; ++it) {
    ap = matvec(A, p);
    double pap = 0.0;
    for (std::size_t i = 0; i < n; ++i) pap += p[i] * ap[i];
    if (!(pap > 0.0)) {
      raise(Errc::solver_failure, "cg: matrix is not positive definite");
    }
    const double alpha = rs / pap;
    for (std::size_t i = 0; i < n; ++i) {
      res.x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    double rs_new = 0.0;
    for (double v : r) rs_new += v * v;
    res.iterations = it + 1;
    res.residual = std::sqrt(rs_new) / bnorm;
    if (res.residual <= tol) return res;
    const double beta = rs_new / rs;
    rs = rs_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  raise(Errc::convergence,
        "cg: no convergence after " + std::to_string(max_iter) +
            " iterations, relative residual " + std::to_string(res.residual));
}

}  // namespace spk
