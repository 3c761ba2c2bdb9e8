#pragma once

// Dense tensors over R^d and truncated graded sequences of them.
//
// Storage is row-major with the last index fastest. Axis arguments of the
// public contraction and permutation routines are 1-indexed; element indices
// passed to at() are 0-indexed.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace rnnsig {

class DenseTensor {
 public:
  DenseTensor() : DenseTensor(1, 0) {}
  DenseTensor(std::size_t dim, std::size_t order);
  DenseTensor(std::size_t dim, std::size_t order, std::vector<double> data);

  static DenseTensor scalar(double value);
  static DenseTensor vector(std::span<const double> values);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t order() const noexcept { return order_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  double& operator[](std::size_t flat) noexcept { return data_[flat]; }
  double operator[](std::size_t flat) const noexcept { return data_[flat]; }

  double& at(std::span<const std::size_t> index);
  double at(std::span<const std::size_t> index) const;
  double& at(std::initializer_list<std::size_t> index) { return at(std::span(index.begin(), index.size())); }
  double at(std::initializer_list<std::size_t> index) const {
    return at(std::span(index.begin(), index.size()));
  }

  // this += alpha * other
  void add_scaled(const DenseTensor& other, double alpha);
  void scale(double alpha);

  double norm() const;
  bool is_zero() const noexcept;

  bool operator==(const DenseTensor&) const = default;

 private:
  std::size_t offset(std::span<const std::size_t> index) const;

  std::size_t dim_;
  std::size_t order_;
  std::vector<double> data_;
};

// dim^order, with overflow checking.
std::size_t tensor_size(std::size_t dim, std::size_t order);

DenseTensor tensor_product(const DenseTensor& a, const DenseTensor& b);

// Contract axis p of a with axis q of b (both 1-indexed). The result keeps a's
// remaining axes in order, followed by b's remaining axes.
DenseTensor tensor_dot(const DenseTensor& a, const DenseTensor& b, std::size_t p, std::size_t q);

// result[i_1..i_k] = a[i_perm(1)..i_perm(k)], perm given 1-indexed.
DenseTensor permute_axes(const DenseTensor& a, std::span<const std::size_t> perm);
inline DenseTensor permute_axes(const DenseTensor& a, std::initializer_list<std::size_t> perm) {
  return permute_axes(a, std::span(perm.begin(), perm.size()));
}

double inner(const DenseTensor& a, const DenseTensor& b);

// Truncated element (a_0, a_1, ..., a_depth) of the tensor Hilbert space, with
// level k of order k.
class GradedTensorSeq {
 public:
  GradedTensorSeq(std::size_t dim, std::size_t depth);
  explicit GradedTensorSeq(std::vector<DenseTensor> levels);

  // (1, 0, 0, ...)
  static GradedTensorSeq unit(std::size_t dim, std::size_t depth);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t depth() const noexcept { return levels_.size() - 1; }

  DenseTensor& level(std::size_t k) { return levels_.at(k); }
  const DenseTensor& level(std::size_t k) const { return levels_.at(k); }
  std::span<const DenseTensor> levels() const noexcept { return levels_; }

  GradedTensorSeq truncated(std::size_t depth) const;

  void add_scaled(const GradedTensorSeq& other, double alpha);

  bool operator==(const GradedTensorSeq&) const = default;

 private:
  std::size_t dim_;
  std::vector<DenseTensor> levels_;
};

// Sum of level-wise inner products over the shared prefix of levels.
double seq_inner(const GradedTensorSeq& a, const GradedTensorSeq& b);
double seq_norm(const GradedTensorSeq& a);

// Truncated tensor-algebra product: (a*b)_k = sum_{i+j=k} a_i (x) b_j, depth
// is the smaller of the two.
GradedTensorSeq tensor_algebra_product(const GradedTensorSeq& a, const GradedTensorSeq& b);

}  // namespace rnnsig
