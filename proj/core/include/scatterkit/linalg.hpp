#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace spk {

// Dense row-major matrix. Sizes in this project stay small (a few hundred
// rows), so everything is plain loops over contiguous storage.
template <typename T>
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return a_.size(); }

  T& at(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  T at(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  T* row(std::size_t i) { return a_.data() + i * cols_; }
  const T* row(std::size_t i) const { return a_.data() + i * cols_; }

  std::vector<T>& values() { return a_; }
  const std::vector<T>& values() const { return a_; }
  T* data() { return a_.data(); }
  const T* data() const { return a_.data(); }

  bool operator==(const Mat&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> a_;
};

using Matrix = Mat<double>;
using CMatrix = Mat<std::complex<double>>;

std::vector<double> matvec(const Matrix& A, std::span<const double> x);
std::vector<std::complex<double>> matvec(const CMatrix& A,
                                         std::span<const double> x);
Matrix matmul(const Matrix& A, const Matrix& B);
Matrix transpose(const Matrix& A);
double trace(const Matrix& A);
Matrix identity(std::size_t n);

// Dense Cholesky factorisation of a symmetric positive definite matrix.
// Raises Errc::solver_failure on a non-positive pivot.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(Matrix A);

  std::vector<double> solve(std::span<const double> b) const;
  // Solves A X = B column by column.
  Matrix solve_many(const Matrix& B) const;

 private:
  Matrix l_;  // lower triangle
};

struct CgResult {
  std::vector<double> x;
  std::size_t iterations = 0;
  double residual = 0.0;  // final |r| / |b|
};

// Conjugate gradients for SPD systems; the independent second route next to
// Cholesky. tol is relative to |b|; a zero right-hand side returns exact
// zeros without iterating.
CgResult conjugate_gradient(const Matrix& A, std::span<const double> b,
                            double tol, std::size_t max_iter);

}  // namespace spk
