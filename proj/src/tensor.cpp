#include "rnnsig/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "rnnsig/error.hpp"
#include "rnnsig/simd/kernels.hpp"

namespace rnnsig {

std::size_t tensor_size(std::size_t dim, std::size_t order) {
  std::size_t n = 1;
  for (std::size_t k = 0; k < order; ++k) {
    require(dim == 0 || n <= std::numeric_limits<std::size_t>::max() / dim, "tensor size overflows");
    n *= dim;
  }
  return n;
}

DenseTensor::DenseTensor(std::size_t dim, std::size_t order)
    : dim_(dim), order_(order), data_(tensor_size(dim, order), 0.0) {
  require(dim > 0, "DenseTensor: dim must be positive");
}

DenseTensor::DenseTensor(std::size_t dim, std::size_t order, std::vector<double> data)
    : dim_(dim), order_(order), data_(std::move(data)) {
  require(dim > 0, "DenseTensor: dim must be positive");
  require(data_.size() == tensor_size(dim, order), "DenseTensor: data length must equal dim^order");
}

DenseTensor DenseTensor::scalar(double value) { return DenseTensor(1, 0, {value}); }

DenseTensor DenseTensor::vector(std::span<const double> values) {
  return DenseTensor(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

std::size_t DenseTensor::offset(std::span<const std::size_t> index) const {
  require(index.size() == order_, "DenseTensor::at: index arity does not match order");
  std::size_t off = 0;
  for (std::size_t i : index) {
    require(i < dim_, "DenseTensor::at: index out of range");
    off = off * dim_ + i;
  }
  return off;
}

double& DenseTensor::at(std::span<const std::size_t> index) { return data_[offset(index)]; }
double DenseTensor::at(std::span<const std::size_t> index) const { return data_[offset(index)]; }

void DenseTensor::add_scaled(const DenseTensor& other, double alpha) {
  require(other.dim_ == dim_ && other.order_ == order_, "DenseTensor::add_scaled: shape mismatch");
  simd::axpy(alpha, other.data_, data_);
}

void DenseTensor::scale(double alpha) { simd::scal(alpha, data_); }

double DenseTensor::norm() const { return std::sqrt(simd::dot(data_, data_)); }

bool DenseTensor::is_zero() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0; });
}

DenseTensor tensor_product(const DenseTensor& a, const DenseTensor& b) {
  // Scalars combine with anything.
  if (a.order() == 0) {
    DenseTensor out = b;
    out.scale(a[0]);
    return out;
  }
  if (b.order() == 0) {
    DenseTensor out = a;
    out.scale(b[0]);
    return out;
  }
  require(a.dim() == b.dim(), "tensor_product: dimension mismatch");
  DenseTensor out(a.dim(), a.order() + b.order());
  const std::size_t nb = b.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    simd::axpy(a[i], b.data(), out.data().subspan(i * nb, nb));
  }
  return out;
}

DenseTensor permute_axes(const DenseTensor& a, std::span<const std::size_t> perm) {
  const std::size_t k = a.order();
  require(perm.size() == k, "permute_axes: permutation length must equal the order");
  std::vector<std::size_t> inverse(k, 0);
  std::vector<bool> seen(k, false);
  for (std::size_t m = 0; m < k; ++m) {
    require(perm[m] >= 1 && perm[m] <= k && !seen[perm[m] - 1], "permute_axes: not a permutation");
    seen[perm[m] - 1] = true;
    inverse[perm[m] - 1] = m;
  }
  if (k <= 1) return a;

  // Result axis l contributes to source position inverse[l].
  std::vector<std::size_t> src_stride(k);
  for (std::size_t l = 0; l < k; ++l) src_stride[l] = tensor_size(a.dim(), k - 1 - inverse[l]);

  DenseTensor out(a.dim(), k);
  std::vector<std::size_t> idx(k, 0);
  std::size_t src = 0;
  const std::size_t d = a.dim();
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    out[flat] = a[src];
    // Odometer increment on the result index, tracking the source offset.
    for (std::size_t l = k; l-- > 0;) {
      if (++idx[l] < d) {
        src += src_stride[l];
        break;
      }
      idx[l] = 0;
      src -= (d - 1) * src_stride[l];
    }
  }
  return out;
}

DenseTensor tensor_dot(const DenseTensor& a, const DenseTensor& b, std::size_t p, std::size_t q) {
  require(a.dim() == b.dim(), "tensor_dot: dimension mismatch");
  require(p >= 1 && p <= a.order(), "tensor_dot: axis p out of range");
  require(q >= 1 && q <= b.order(), "tensor_dot: axis q out of range");
  const std::size_t d = a.dim();
  const std::size_t ka = a.order();
  const std::size_t kb = b.order();

  // Bring the contracted axis of a to the back and that of b to the front, so
  // the contraction is a plain (M x d)(d x K) product.
  DenseTensor a_moved;
  const DenseTensor* am = &a;
  if (p != ka) {
    std::vector<std::size_t> perm;
    for (std::size_t m = 1; m < p; ++m) perm.push_back(m);
    perm.push_back(ka);
    for (std::size_t m = p; m < ka; ++m) perm.push_back(m);
    a_moved = permute_axes(a, perm);
    am = &a_moved;
  }
  DenseTensor b_moved;
  const DenseTensor* bm = &b;
  if (q != 1) {
    std::vector<std::size_t> perm;
    for (std::size_t m = 2; m <= q; ++m) perm.push_back(m);
    perm.push_back(1);
    for (std::size_t m = q + 1; m <= kb; ++m) perm.push_back(m);
    b_moved = permute_axes(b, perm);
    bm = &b_moved;
  }

  DenseTensor out(d, ka + kb - 2);
  const std::size_t rows = am->size() / d;
  const std::size_t cols = bm->size() / d;
  for (std::size_t i = 0; i < rows; ++i) {
    std::span<double> dst = out.data().subspan(i * cols, cols);
    for (std::size_t j = 0; j < d; ++j) {
      simd::axpy((*am)[i * d + j], bm->data().subspan(j * cols, cols), dst);
    }
  }
  return out;
}

double inner(const DenseTensor& a, const DenseTensor& b) {
  require(a.dim() == b.dim() && a.order() == b.order(), "inner: shape mismatch");
  return simd::dot(a.data(), b.data());
}

GradedTensorSeq::GradedTensorSeq(std::size_t dim, std::size_t depth) : dim_(dim) {
  require(dim > 0, "GradedTensorSeq: dim must be positive");
  levels_.reserve(depth + 1);
  for (std::size_t k = 0; k <= depth; ++k) levels_.emplace_back(dim, k);
}

GradedTensorSeq::GradedTensorSeq(std::vector<DenseTensor> levels) : dim_(0), levels_(std::move(levels)) {
  require(!levels_.empty(), "GradedTensorSeq: needs at least level 0");
  // Level 0 is a scalar whatever dim it was built with.
  dim_ = levels_.size() > 1 ? levels_[1].dim() : levels_[0].dim();
  for (std::size_t k = 0; k < levels_.size(); ++k) {
    require(levels_[k].order() == k, "GradedTensorSeq: level k must have order k");
    if (k >= 1) require(levels_[k].dim() == dim_, "GradedTensorSeq: levels must share dim");
  }
  if (levels_[0].dim() != dim_) levels_[0] = DenseTensor(dim_, 0, {levels_[0][0]});
}

GradedTensorSeq GradedTensorSeq::unit(std::size_t dim, std::size_t depth) {
  GradedTensorSeq s(dim, depth);
  s.level(0)[0] = 1.0;
  return s;
}

GradedTensorSeq GradedTensorSeq::truncated(std::size_t depth) const {
  require(depth <= this->depth(), "truncated: requested depth exceeds available depth");
  return GradedTensorSeq(std::vector<DenseTensor>(levels_.begin(), levels_.begin() + depth + 1));
}

void GradedTensorSeq::add_scaled(const GradedTensorSeq& other, double alpha) {
  require(other.dim_ == dim_ && other.depth() == depth(), "GradedTensorSeq::add_scaled: shape mismatch");
  for (std::size_t k = 0; k < levels_.size(); ++k) levels_[k].add_scaled(other.levels_[k], alpha);
}

double seq_inner(const GradedTensorSeq& a, const GradedTensorSeq& b) {
  require(a.dim() == b.dim(), "seq_inner: dimension mismatch");
  const std::size_t depth = std::min(a.depth(), b.depth());
  double s = 0.0;
  for (std::size_t k = 0; k <= depth; ++k) s += inner(a.level(k), b.level(k));
  return s;
}

double seq_norm(const GradedTensorSeq& a) { return std::sqrt(seq_inner(a, a)); }

GradedTensorSeq tensor_algebra_product(const GradedTensorSeq& a, const GradedTensorSeq& b) {
  require(a.dim() == b.dim(), "tensor_algebra_product: dimension mismatch");
  const std::size_t depth = std::min(a.depth(), b.depth());
  GradedTensorSeq out(a.dim(), depth);
  for (std::size_t k = 0; k <= depth; ++k) {
    DenseTensor& dst = out.level(k);
    for (std::size_t i = 0; i <= k; ++i) {
      const DenseTensor& left = a.level(i);
      const DenseTensor& right = b.level(k - i);
      const std::size_t nr = right.size();
      for (std::size_t m = 0; m < left.size(); ++m) {
        if (left[m] == 0.0) continue;
        simd::axpy(left[m], right.data(), dst.data().subspan(m * nr, nr));
      }
    }
  }
  return out;
}

}  // namespace rnnsig
