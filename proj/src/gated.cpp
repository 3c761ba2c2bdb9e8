#include "rnnsig/gated.hpp"

#include <algorithm>
#include <cmath>

#include "rnnsig/activation.hpp"
#include "rnnsig/error.hpp"

namespace rnnsig {

namespace {

Gate zero_gate(std::size_t e, std::size_t d) { return {Matrix(e, d), Matrix(e, e), Vector(e, 0.0)}; }

void validate_gate(const Gate& g, std::size_t e, std::size_t d, const char* name) {
  require(g.W.rows() == e && g.W.cols() == d, std::string("gate ") + name + ": W must be e x d");
  require(g.U.rows() == e && g.U.cols() == e, std::string("gate ") + name + ": U must be e x e");
  require(g.b.size() == e, std::string("gate ") + name + ": b must have length e");
}

void randomize(std::span<double> v, std::uniform_real_distribution<double>& dist, std::mt19937_64& rng) {
  for (double& x : v) x = dist(rng);
}

void randomize(Gate& g, std::uniform_real_distribution<double>& dist, std::mt19937_64& rng) {
  randomize(g.W.data(), dist, rng);
  randomize(g.U.data(), dist, rng);
  randomize(g.b, dist, rng);
}

// Flat layout helpers: a list of mutable spans walked in order.
std::vector<std::span<double>> gate_spans(Gate& g) { return {g.W.data(), g.U.data(), g.b}; }

Vector gather(const std::vector<std::span<double>>& parts) {
  Vector out;
  for (auto s : parts) out.insert(out.end(), s.begin(), s.end());
  return out;
}

void scatter(const std::vector<std::span<double>>& parts, std::span<const double> flat) {
  std::size_t total = 0;
  for (auto s : parts) total += s.size();
  require(flat.size() == total, "unflatten: length mismatch");
  auto it = flat.begin();
  for (auto s : parts) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(s.size()), s.begin());
    it += static_cast<std::ptrdiff_t>(s.size());
  }
}

std::vector<std::span<double>> gru_spans(GruParams& p) {
  std::vector<std::span<double>> out;
  for (Gate* g : {&p.r, &p.z, &p.n}) {
    auto s = gate_spans(*g);
    out.insert(out.end(), s.begin(), s.end());
  }
  out.push_back(p.cn);
  out.push_back(p.psi.data());
  out.push_back(p.h0);
  return out;
}

std::vector<std::span<double>> lstm_spans(LstmParams& p) {
  std::vector<std::span<double>> out;
  for (Gate* g : {&p.i, &p.f, &p.g, &p.o}) {
    auto s = gate_spans(*g);
    out.insert(out.end(), s.begin(), s.end());
  }
  out.push_back(p.psi.data());
  out.push_back(p.h0);
  out.push_back(p.c0);
  return out;
}

Vector preact(const Gate& g, std::span<const double> h, std::span<const double> x) {
  Vector a = g.b;
  matvec_add(g.W, x, a);
  matvec_add(g.U, h, a);
  return a;
}

// Accumulates the gradient of a gate given dL/d(pre-activation).
void gate_backward(const Gate& g, Gate& grad, std::span<const double> ga, std::span<const double> h,
                   std::span<const double> x, std::span<double> gh, std::span<double> gx) {
  rank1_update(grad.W, 1.0, ga, x);
  rank1_update(grad.U, 1.0, ga, h);
  for (std::size_t k = 0; k < ga.size(); ++k) grad.b[k] += ga[k];
  matvec_transposed_add(g.U, ga, gh);
  matvec_transposed_add(g.W, ga, gx);
}

void check_samples(std::span<const Vector> samples, std::size_t d) {
  require(!samples.empty(), "gated forward: empty input sequence");
  for (const Vector& x : samples) require(x.size() == d, "gated forward: sample dimension mismatch");
}

struct GruStep {
  Vector r, z, m, n;
};

GruStep gru_step(const GruParams& p, std::span<const double> h, std::span<const double> x) {
  const std::size_t e = p.hidden();
  GruStep s;
  s.r = preact(p.r, h, x);
  s.z = preact(p.z, h, x);
  s.m = p.cn;
  matvec_add(p.n.U, h, s.m);
  s.n = p.n.b;
  matvec_add(p.n.W, x, s.n);
  for (std::size_t k = 0; k < e; ++k) {
    s.r[k] = logistic(s.r[k]);
    s.z[k] = logistic(s.z[k]);
    s.n[k] = std::tanh(s.n[k] + s.r[k] * s.m[k]);
  }
  return s;
}

struct LstmStep {
  Vector i, f, g, o, c_new, tc;
};

LstmStep lstm_step(const LstmParams& p, std::span<const double> h, std::span<const double> c,
                   std::span<const double> x) {
  const std::size_t e = p.hidden();
  LstmStep s;
  s.i = preact(p.i, h, x);
  s.f = preact(p.f, h, x);
  s.g = preact(p.g, h, x);
  s.o = preact(p.o, h, x);
  s.c_new.resize(e);
  s.tc.resize(e);
  for (std::size_t k = 0; k < e; ++k) {
    s.i[k] = logistic(s.i[k]);
    s.f[k] = logistic(s.f[k]);
    s.g[k] = std::tanh(s.g[k]);
    s.o[k] = logistic(s.o[k]);
    s.c_new[k] = s.f[k] * c[k] + s.i[k] * s.g[k];
    s.tc[k] = std::tanh(s.c_new[k]);
  }
  return s;
}

}  // namespace

void GruParams::validate() const {
  const std::size_t e = r.U.rows();
  const std::size_t d = r.W.cols();
  require(e > 0 && d > 0, "GruParams: sizes must be positive");
  validate_gate(r, e, d, "r");
  validate_gate(z, e, d, "z");
  validate_gate(n, e, d, "n");
  require(cn.size() == e, "GruParams: c_n must have length e");
  require(psi.cols() == e && psi.rows() > 0, "GruParams: psi must be p x e");
  require(h0.size() == e, "GruParams: h0 must have length e");
}

std::size_t GruParams::num_parameters() const noexcept {
  return 3 * (r.W.size() + r.U.size() + r.b.size()) + cn.size() + psi.size() + h0.size();
}

Vector GruParams::flatten() const { return gather(gru_spans(const_cast<GruParams&>(*this))); }
void GruParams::unflatten(std::span<const double> flat) { scatter(gru_spans(*this), flat); }

GruParams GruParams::zeros(std::size_t hidden, std::size_t input, std::size_t output) {
  GruParams p{zero_gate(hidden, input), zero_gate(hidden, input), zero_gate(hidden, input),
              Vector(hidden, 0.0), Matrix(output, hidden), Vector(hidden, 0.0)};
  p.validate();
  return p;
}

GruParams GruParams::random(std::size_t hidden, std::size_t input, std::size_t output, std::mt19937_64& rng) {
  GruParams p = zeros(hidden, input, output);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::uniform_real_distribution<double> dist(-bound, bound);
  randomize(p.r, dist, rng);
  randomize(p.z, dist, rng);
  randomize(p.n, dist, rng);
  randomize(p.cn, dist, rng);
  randomize(p.psi.data(), dist, rng);
  return p;
}

void LstmParams::validate() const {
  const std::size_t e = i.U.rows();
  const std::size_t d = i.W.cols();
  require(e > 0 && d > 0, "LstmParams: sizes must be positive");
  validate_gate(i, e, d, "i");
  validate_gate(f, e, d, "f");
  validate_gate(g, e, d, "g");
  validate_gate(o, e, d, "o");
  require(psi.cols() == e && psi.rows() > 0, "LstmParams: psi must be p x e");
  require(h0.size() == e && c0.size() == e, "LstmParams: h0 and c0 must have length e");
}

std::size_t LstmParams::num_parameters() const noexcept {
  return 4 * (i.W.size() + i.U.size() + i.b.size()) + psi.size() + h0.size() + c0.size();
}

Vector LstmParams::flatten() const { return gather(lstm_spans(const_cast<LstmParams&>(*this))); }
void LstmParams::unflatten(std::span<const double> flat) { scatter(lstm_spans(*this), flat); }

LstmParams LstmParams::zeros(std::size_t hidden, std::size_t input, std::size_t output) {
  LstmParams p{zero_gate(hidden, input), zero_gate(hidden, input), zero_gate(hidden, input),
               zero_gate(hidden, input), Matrix(output, hidden), Vector(hidden, 0.0), Vector(hidden, 0.0)};
  p.validate();
  return p;
}

LstmParams LstmParams::random(std::size_t hidden, std::size_t input, std::size_t output, std::mt19937_64& rng) {
  LstmParams p = zeros(hidden, input, output);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Gate* g : {&p.i, &p.f, &p.g, &p.o}) randomize(*g, dist, rng);
  randomize(p.psi.data(), dist, rng);
  return p;
}

GatedForward gru_forward(const GruParams& p, std::span<const Vector> samples) {
  p.validate();
  check_samples(samples, p.input());
  const std::size_t e = p.hidden();
  const double inv_T = 1.0 / static_cast<double>(samples.size());
  GatedForward out;
  out.states.push_back(p.h0);
  for (const Vector& x : samples) {
    const Vector& h = out.states.back();
    const GruStep s = gru_step(p, h, x);
    Vector next = h;
    for (std::size_t k = 0; k < e; ++k) next[k] += inv_T * s.z[k] * (s.n[k] - h[k]);
    out.z.push_back(matvec(p.psi, next));
    out.states.push_back(std::move(next));
  }
  return out;
}

GatedForward lstm_forward(const LstmParams& p, std::span<const Vector> samples) {
  p.validate();
  check_samples(samples, p.input());
  const std::size_t e = p.hidden();
  const double inv_T = 1.0 / static_cast<double>(samples.size());
  GatedForward out;
  Vector s0 = p.h0;
  s0.insert(s0.end(), p.c0.begin(), p.c0.end());
  out.states.push_back(std::move(s0));
  for (const Vector& x : samples) {
    const Vector& st = out.states.back();
    std::span<const double> h(st.data(), e);
    std::span<const double> c(st.data() + e, e);
    const LstmStep s = lstm_step(p, h, c, x);
    Vector next = st;
    for (std::size_t k = 0; k < e; ++k) {
      next[k] += inv_T * (s.o[k] * s.tc[k] - h[k]);
      next[e + k] += inv_T * (s.c_new[k] - c[k]);
    }
    out.z.push_back(matvec(p.psi, std::span<const double>(next.data(), e)));
    out.states.push_back(std::move(next));
  }
  return out;
}

GruGradients gru_backward(const GruParams& p, std::span<const Vector> samples, std::span<const Vector> grad_z) {
  const GatedForward fwd = gru_forward(p, samples);
  const std::size_t T = samples.size();
  require(grad_z.size() == T, "gru_backward: need one upstream gradient per output");
  const std::size_t e = p.hidden();
  const double inv_T = 1.0 / static_cast<double>(T);

  GruGradients g{GruParams::zeros(e, p.input(), p.output()), std::vector<Vector>(T, Vector(p.input(), 0.0))};
  for (std::size_t j = 1; j <= T; ++j) {
    require(grad_z[j - 1].size() == p.output(), "gru_backward: upstream gradient has wrong length");
    rank1_update(g.params.psi, 1.0, grad_z[j - 1], fwd.states[j]);
  }

  Vector gh(e, 0.0);
  matvec_transposed_add(p.psi, grad_z[T - 1], gh);
  Vector ga_r(e), ga_z(e), ga_n(e), gm(e);
  for (std::size_t j = T; j-- > 0;) {
    const Vector& h = fwd.states[j];
    const Vector& x = samples[j];
    const GruStep s = gru_step(p, h, x);
    Vector gprev = gh;
    for (std::size_t k = 0; k < e; ++k) {
      const double gf = inv_T * gh[k];
      gprev[k] -= gf * s.z[k];
      ga_z[k] = gf * (s.n[k] - h[k]) * s.z[k] * (1.0 - s.z[k]);
      ga_n[k] = gf * s.z[k] * (1.0 - s.n[k] * s.n[k]);
      gm[k] = ga_n[k] * s.r[k];
      ga_r[k] = ga_n[k] * s.m[k] * s.r[k] * (1.0 - s.r[k]);
    }
    gate_backward(p.r, g.params.r, ga_r, h, x, gprev, g.x[j]);
    gate_backward(p.z, g.params.z, ga_z, h, x, gprev, g.x[j]);
    // Candidate gate: W and b see ga_n, U and c_n see gm.
    rank1_update(g.params.n.W, 1.0, ga_n, x);
    for (std::size_t k = 0; k < e; ++k) g.params.n.b[k] += ga_n[k];
    matvec_transposed_add(p.n.W, ga_n, g.x[j]);
    rank1_update(g.params.n.U, 1.0, gm, h);
    for (std::size_t k = 0; k < e; ++k) g.params.cn[k] += gm[k];
    matvec_transposed_add(p.n.U, gm, gprev);
    if (j >= 1) matvec_transposed_add(p.psi, grad_z[j - 1], gprev);
    gh.swap(gprev);
  }
  g.params.h0 = gh;
  return g;
}

LstmGradients lstm_backward(const LstmParams& p, std::span<const Vector> samples, std::span<const Vector> grad_z) {
  const GatedForward fwd = lstm_forward(p, samples);
  const std::size_t T = samples.size();
  require(grad_z.size() == T, "lstm_backward: need one upstream gradient per output");
  const std::size_t e = p.hidden();
  const double inv_T = 1.0 / static_cast<double>(T);

  LstmGradients g{LstmParams::zeros(e, p.input(), p.output()), std::vector<Vector>(T, Vector(p.input(), 0.0))};
  for (std::size_t j = 1; j <= T; ++j) {
    require(grad_z[j - 1].size() == p.output(), "lstm_backward: upstream gradient has wrong length");
    rank1_update(g.params.psi, 1.0, grad_z[j - 1], std::span<const double>(fwd.states[j].data(), e));
  }

  Vector gh(e, 0.0), gc(e, 0.0);
  matvec_transposed_add(p.psi, grad_z[T - 1], gh);
  Vector ga_i(e), ga_f(e), ga_g(e), ga_o(e);
  for (std::size_t j = T; j-- > 0;) {
    const Vector& st = fwd.states[j];
    std::span<const double> h(st.data(), e);
    std::span<const double> c(st.data() + e, e);
    const Vector& x = samples[j];
    const LstmStep s = lstm_step(p, h, c, x);
    Vector gh_prev(e), gc_prev(e);
    for (std::size_t k = 0; k < e; ++k) {
      const double ghn = inv_T * gh[k];
      double gcn = inv_T * gc[k];
      gh_prev[k] = gh[k] - ghn;
      gc_prev[k] = gc[k] - gcn;
      gcn += ghn * s.o[k] * (1.0 - s.tc[k] * s.tc[k]);
      ga_o[k] = ghn * s.tc[k] * s.o[k] * (1.0 - s.o[k]);
      ga_f[k] = gcn * c[k] * s.f[k] * (1.0 - s.f[k]);
      ga_i[k] = gcn * s.g[k] * s.i[k] * (1.0 - s.i[k]);
      ga_g[k] = gcn * s.i[k] * (1.0 - s.g[k] * s.g[k]);
      gc_prev[k] += gcn * s.f[k];
    }
    gate_backward(p.i, g.params.i, ga_i, h, x, gh_prev, g.x[j]);
    gate_backward(p.f, g.params.f, ga_f, h, x, gh_prev, g.x[j]);
    gate_backward(p.g, g.params.g, ga_g, h, x, gh_prev, g.x[j]);
    gate_backward(p.o, g.params.o, ga_o, h, x, gh_prev, g.x[j]);
    if (j >= 1) matvec_transposed_add(p.psi, grad_z[j - 1], gh_prev);
    gh.swap(gh_prev);
    gc.swap(gc_prev);
  }
  g.params.h0 = gh;
  g.params.c0 = gc;
  return g;
}

}  // namespace rnnsig
