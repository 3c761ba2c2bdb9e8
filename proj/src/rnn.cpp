#include "rnnsig/rnn.hpp"

#include <algorithm>
#include <cmath>

#include "rnnsig/error.hpp"

namespace rnnsig {

void RnnParams::validate() const {
  const std::size_t e = U.rows();
  require(e > 0, "RnnParams: hidden size must be positive");
  require(U.cols() == e, "RnnParams: U must be e x e");
  require(V.rows() == e && V.cols() > 0, "RnnParams: V must be e x d with d > 0");
  require(b.size() == e, "RnnParams: b must have length e");
  require(psi.cols() == e && psi.rows() > 0, "RnnParams: psi must be p x e with p > 0");
  require(h0.size() == e, "RnnParams: h0 must have length e");
}

std::size_t RnnParams::num_parameters() const noexcept {
  return U.size() + V.size() + b.size() + psi.size() + h0.size();
}

Vector RnnParams::flatten() const {
  Vector out;
  out.reserve(num_parameters());
  out.insert(out.end(), U.data().begin(), U.data().end());
  out.insert(out.end(), V.data().begin(), V.data().end());
  out.insert(out.end(), b.begin(), b.end());
  out.insert(out.end(), psi.data().begin(), psi.data().end());
  out.insert(out.end(), h0.begin(), h0.end());
  return out;
}

void RnnParams::unflatten(std::span<const double> flat) {
  require(flat.size() == num_parameters(), "RnnParams::unflatten: length mismatch");
  auto it = flat.begin();
  auto take = [&it](std::span<double> dst) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(dst.size()), dst.begin());
    it += static_cast<std::ptrdiff_t>(dst.size());
  };
  take(U.data());
  take(V.data());
  take(b);
  take(psi.data());
  take(h0);
}

RnnParams zero_params(std::size_t hidden, std::size_t input, std::size_t output, Activation activation) {
  RnnParams p{Matrix(hidden, hidden), Matrix(hidden, input), Vector(hidden, 0.0),
              Matrix(output, hidden), Vector(hidden, 0.0), activation};
  p.validate();
  return p;
}

RnnParams init_params(std::size_t hidden, std::size_t input, std::size_t output, Activation activation,
                      std::mt19937_64& rng) {
  RnnParams p = zero_params(hidden, input, output, activation);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : p.U.data()) v = dist(rng);
  for (double& v : p.V.data()) v = dist(rng);
  for (double& v : p.b) v = dist(rng);
  for (double& v : p.psi.data()) v = dist(rng);
  return p;
}

Vector cell(const RnnParams& params, std::span<const double> h, std::span<const double> x) {
  Vector a = params.b;
  matvec_add(params.U, h, a);
  matvec_add(params.V, x, a);
  for (double& v : a) v = params.activation.value(v);
  return a;
}

ForwardResult forward(const RnnParams& params, std::span<const Vector> samples) {
  params.validate();
  require(!samples.empty(), "forward: empty input sequence");
  const std::size_t T = samples.size();
  const double inv_T = 1.0 / static_cast<double>(T);
  ForwardResult r;
  r.h.reserve(T + 1);
  r.pre.reserve(T);
  r.z.reserve(T);
  r.h.push_back(params.h0);
  for (std::size_t j = 0; j < T; ++j) {
    require(samples[j].size() == params.input(), "forward: sample dimension mismatch");
    const Vector& h = r.h.back();
    Vector a = params.b;
    matvec_add(params.U, h, a);
    matvec_add(params.V, samples[j], a);
    Vector next = h;
    for (std::size_t i = 0; i < next.size(); ++i) next[i] += inv_T * params.activation.value(a[i]);
    r.pre.push_back(std::move(a));
    r.z.push_back(matvec(params.psi, next));
    r.h.push_back(std::move(next));
  }
  return r;
}

Vector RnnGradients::flatten() const {
  Vector out;
  out.insert(out.end(), U.data().begin(), U.data().end());
  out.insert(out.end(), V.data().begin(), V.data().end());
  out.insert(out.end(), b.begin(), b.end());
  out.insert(out.end(), psi.data().begin(), psi.data().end());
  out.insert(out.end(), h0.begin(), h0.end());
  return out;
}

RnnGradients backward(const RnnParams& params, std::span<const Vector> samples, const ForwardResult& fwd,
                      std::span<const Vector> grad_z) {
  params.validate();
  const std::size_t T = samples.size();
  require(fwd.h.size() == T + 1 && fwd.pre.size() == T, "backward: forward result does not match samples");
  require(grad_z.size() == T, "backward: need one upstream gradient per output");
  const std::size_t e = params.hidden();
  const double inv_T = 1.0 / static_cast<double>(T);

  RnnGradients g{Matrix(e, e), Matrix(e, params.input()), Vector(e, 0.0), Matrix(params.output(), e),
                 Vector(e, 0.0), std::vector<Vector>(T, Vector(params.input(), 0.0))};
  for (std::size_t j = 1; j <= T; ++j) {
    require(grad_z[j - 1].size() == params.output(), "backward: upstream gradient has wrong length");
    rank1_update(g.psi, 1.0, grad_z[j - 1], fwd.h[j]);
  }

  // gh holds dLoss/dh_{j+1} on entry to iteration j.
  Vector gh(e, 0.0);
  matvec_transposed_add(params.psi, grad_z[T - 1], gh);
  Vector delta(e);
  for (std::size_t j = T; j-- > 0;) {
    for (std::size_t i = 0; i < e; ++i) delta[i] = inv_T * gh[i] * params.activation.derivative(fwd.pre[j][i], 1);
    rank1_update(g.U, 1.0, delta, fwd.h[j]);
    rank1_update(g.V, 1.0, delta, samples[j]);
    for (std::size_t i = 0; i < e; ++i) g.b[i] += delta[i];
    matvec_transposed_add(params.V, delta, g.x[j]);
    matvec_transposed_add(params.U, delta, gh);
    if (j >= 1) matvec_transposed_add(params.psi, grad_z[j - 1], gh);
  }
  g.h0 = gh;
  return g;
}

LipschitzConstants lipschitz_constants(const RnnParams& params) {
  const double ks = params.activation.lipschitz();
  const double kh = ks * operator_norm(params.U);
  const double kx = ks * operator_norm(params.V);
  return {kh, kx, std::max(kh, kx)};
}

}  // namespace rnnsig
