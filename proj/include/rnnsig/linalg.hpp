#pragma once

// Small dense vectors and row-major matrices. Sizes here are tens of entries,
// so this is deliberately thin: storage plus the handful of products the RNN
// and ODE code need, routed through the SIMD kernels.

#include <cstddef>
#include <span>
#include <vector>

namespace rnnsig {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// y = A x
Vector matvec(const Matrix& a, std::span<const double> x);
// y += A x
void matvec_add(const Matrix& a, std::span<const double> x, std::span<double> y);
// y += A^T x
void matvec_transposed_add(const Matrix& a, std::span<const double> x, std::span<double> y);
// A += alpha * x y^T
void rank1_update(Matrix& a, double alpha, std::span<const double> x, std::span<const double> y);

Matrix matmul(const Matrix& a, const Matrix& b);

double norm(std::span<const double> x);
double frobenius_norm(const Matrix& a);
// Largest singular value.
double operator_norm(const Matrix& a);

// [A B] with A and B sharing their row count.
Matrix hconcat(const Matrix& a, const Matrix& b);

}  // namespace rnnsig
