#include "rnnsig/linalg.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "rnnsig/error.hpp"
#include "rnnsig/simd/kernels.hpp"

namespace rnnsig {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(data_.size() == rows_ * cols_, "Matrix: data length does not match shape");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
  Vector y(a.rows(), 0.0);
  matvec_add(a, x, y);
  return y;
}

void matvec_add(const Matrix& a, std::span<const double> x, std::span<double> y) {
  require(x.size() == a.cols() && y.size() == a.rows(), "matvec: shape mismatch");
  for (std::size_t r = 0; r < a.rows(); ++r) y[r] += simd::dot(a.row(r), x);
}

void matvec_transposed_add(const Matrix& a, std::span<const double> x, std::span<double> y) {
  require(x.size() == a.rows() && y.size() == a.cols(), "matvec_transposed: shape mismatch");
  for (std::size_t r = 0; r < a.rows(); ++r) simd::axpy(x[r], a.row(r), y);
}

void rank1_update(Matrix& a, double alpha, std::span<const double> x, std::span<const double> y) {
  require(x.size() == a.rows() && y.size() == a.cols(), "rank1_update: shape mismatch");
  for (std::size_t r = 0; r < a.rows(); ++r) simd::axpy(alpha * x[r], y, a.row(r));
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) simd::axpy(a(i, k), b.row(k), c.row(i));
  return c;
}

double norm(std::span<const double> x) { return std::sqrt(simd::dot(x, x)); }

double frobenius_norm(const Matrix& a) { return norm(a.data()); }

double operator_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      a.data().data(), static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols()));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

Matrix hconcat(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), "hconcat: row counts differ");
  Matrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c);
    for (std::size_t c = 0; c < b.cols(); ++c) out(r, a.cols() + c) = b(r, c);
  }
  return out;
}

}  // namespace rnnsig
