#include "rnnsig/taylor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>

#include "rnnsig/error.hpp"
#include "rnnsig/signature.hpp"
#include "rnnsig/simd/kernels.hpp"

namespace rnnsig {

Vector DerivativeTower::value() const {
  const auto d = derivs.front().data();
  return Vector(d.begin(), d.end());
}

DerivativeTower field_tower(const CdeField& field, std::size_t column, std::span<const double> basepoint,
                            std::size_t order) {
  const std::size_t eb = field.state_dim();
  const std::size_t e = field.hidden();
  const std::size_t d = field.input();
  require(column <= d, "field_tower: column index out of range");
  require(basepoint.size() == eb, "field_tower: basepoint dimension mismatch");
  const RnnParams& p = field.params();
  if (column == d) {
    require(order <= Activation::max_derivative_order(),
            "field_tower: order exceeds the supported activation derivative depth");
  }

  DerivativeTower t{Vector(basepoint.begin(), basepoint.end()), {}};
  t.derivs.reserve(order + 1);
  for (std::size_t n = 0; n <= order; ++n) t.derivs.emplace_back(eb, n + 1);

  if (column < d) {
    t.derivs[0][e + column] = 1.0;
    return t;
  }

  const double s = 2.0 / (1.0 - field.L());
  std::vector<double> w(eb);
  std::vector<double> power;
  std::vector<double> next;
  for (std::size_t j = 0; j < e; ++j) {
    // Row j of W = [U V] and the pre-activation at the basepoint.
    for (std::size_t a = 0; a < e; ++a) w[a] = p.U(j, a);
    for (std::size_t a = 0; a < d; ++a) w[e + a] = p.V(j, a);
    const double z = p.b[j] + simd::dot(w, basepoint);
    power.assign(1, 1.0);
    for (std::size_t n = 0; n <= order; ++n) {
      if (n > 0) {
        next.assign(power.size() * eb, 0.0);
        for (std::size_t m = 0; m < power.size(); ++m)
          if (power[m] != 0.0) simd::axpy(power[m], w, std::span(next).subspan(m * eb, eb));
        power.swap(next);
      }
      const double coef = s * p.activation.derivative(z, n);
      if (coef == 0.0) continue;
      simd::axpy(coef, power, t.derivs[n].data().subspan(j * power.size(), power.size()));
    }
  }
  return t;
}

DerivativeTower star_apply(const DerivativeTower& g, const DerivativeTower& f) {
  require(g.dim() == f.dim(), "star_apply: dimension mismatch");
  require(g.max_order() >= 1, "star_apply: G needs at least first derivatives");
  const std::size_t m = g.max_order() - 1;
  require(f.max_order() >= m, "star_apply: F tower is too short");
  const std::size_t eb = g.dim();

  DerivativeTower out{f.basepoint, {}};
  out.derivs.reserve(m + 1);
  std::vector<std::size_t> perm;
  for (std::size_t n = 0; n <= m; ++n) {
    DenseTensor acc(eb, n + 1);
    for (std::size_t r = 0; r <= n; ++r) {
      const DenseTensor& gr = g.derivs[r + 1];
      const DenseTensor& fn = f.derivs[n - r];
      if (gr.is_zero() || fn.is_zero()) continue;
      const DenseTensor c = tensor_dot(gr, fn, 2, 1);
      // Leibniz: one term per choice of which r of the n output derivative
      // axes fall on J(G); the rest fall on F.
      for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) != r) continue;
        perm.assign(1, 1);
        for (std::size_t l = 0; l < n; ++l)
          if (mask & (std::size_t{1} << l)) perm.push_back(l + 2);
        for (std::size_t l = 0; l < n; ++l)
          if (!(mask & (std::size_t{1} << l))) perm.push_back(l + 2);
        bool identity = true;
        for (std::size_t l = 0; l < perm.size(); ++l) identity = identity && perm[l] == l + 1;
        if (identity) {
          acc.add_scaled(c, 1.0);
        } else {
          acc.add_scaled(permute_axes(c, perm), 1.0);
        }
      }
    }
    out.derivs.push_back(std::move(acc));
  }
  return out;
}

Vector iterated_star(const CdeField& field, const Word& word, std::span<const double> hbar) {
  require(!word.empty(), "iterated_star: empty word");
  for (std::size_t i : word) require(i < field.control_dim(), "iterated_star: letter out of range");
  const std::size_t k = word.size();
  DerivativeTower g = field_tower(field, word.back(), hbar, k - 1);
  for (std::size_t pos = k - 1; pos-- > 0;) {
    const DerivativeTower f = field_tower(field, word[pos], hbar, g.max_order() - 1);
    g = star_apply(g, f);
  }
  return g.value();
}

Vector iterated_star_closed_form(const CdeField& field, const Word& word, std::span<const double> hbar) {
  require(!word.empty(), "iterated_star_closed_form: empty word");
  require(field.params().activation.kind() == ActivationKind::Identity,
          "iterated_star_closed_form: requires the identity activation");
  const std::size_t eb = field.state_dim();
  const std::size_t e = field.hidden();
  const std::size_t d = field.input();
  require(hbar.size() == eb, "iterated_star_closed_form: state dimension mismatch");
  for (std::size_t i : word) require(i <= d, "iterated_star_closed_form: letter out of range");
  const RnnParams& p = field.params();
  const double s = 2.0 / (1.0 - field.L());

  // W_d v = s [W v; 0], other W_i vanish.
  auto apply_w = [&](std::span<const double> v) {
    Vector out(eb, 0.0);
    for (std::size_t j = 0; j < e; ++j) {
      double acc = simd::dot(p.U.row(j), v.subspan(0, e));
      acc += simd::dot(p.V.row(j), v.subspan(e, d));
      out[j] = s * acc;
    }
    return out;
  };

  Vector v(eb, 0.0);
  if (word[0] < d) {
    v[e + word[0]] = 1.0;
  } else {
    v = apply_w(hbar);
    for (std::size_t j = 0; j < e; ++j) v[j] += s * p.b[j];
  }
  for (std::size_t l = 1; l < word.size(); ++l) {
    if (word[l] < d) return Vector(eb, 0.0);
    v = apply_w(v);
  }
  return v;
}

std::size_t word_index(const Word& word, std::size_t alphabet) {
  std::size_t idx = 0;
  for (std::size_t i : word) {
    require(i < alphabet, "word_index: letter out of range");
    idx = idx * alphabet + i;
  }
  return idx;
}

Word word_from_index(std::size_t index, std::size_t length, std::size_t alphabet) {
  Word w(length);
  for (std::size_t l = length; l-- > 0;) {
    w[l] = index % alphabet;
    index /= alphabet;
  }
  return w;
}

StarTable all_word_stars(const CdeField& field, std::span<const double> hbar, std::size_t depth) {
  const std::size_t eb = field.state_dim();
  const std::size_t db = field.control_dim();
  require(hbar.size() == eb, "all_word_stars: state dimension mismatch");
  StarTable table{db, {}};
  table.levels.reserve(depth + 1);
  table.levels.emplace_back(1, eb, Vector(hbar.begin(), hbar.end()));
  for (std::size_t k = 1; k <= depth; ++k) table.levels.emplace_back(tensor_size(db, k), eb);
  if (depth == 0) return table;

  std::vector<DerivativeTower> fields;
  fields.reserve(db);
  for (std::size_t i = 0; i < db; ++i) fields.push_back(field_tower(field, i, hbar, depth - 1));

  std::vector<std::size_t> pow_db(depth + 1, 1);
  for (std::size_t k = 1; k <= depth; ++k) pow_db[k] = pow_db[k - 1] * db;

  // Words are grown by prepending a letter: F^i * G_w is the jet of the word
  // (i, w), whose index is i * dbar^{|w|} + index(w).
  std::function<void(const DerivativeTower&, std::size_t, std::size_t)> visit =
      [&](const DerivativeTower& g, std::size_t idx, std::size_t k) {
        const auto v = g.derivs[0].data();
        std::copy(v.begin(), v.end(), table.levels[k].row(idx).begin());
        if (k == depth) return;
        bool all_zero = true;
        for (const DenseTensor& t : g.derivs) all_zero = all_zero && t.is_zero();
        if (all_zero) return;
        for (std::size_t i = 0; i < db; ++i) visit(star_apply(g, fields[i]), i * pow_db[k] + idx, k + 1);
      };
  for (std::size_t i = 0; i < db; ++i) visit(fields[i], i, 1);
  return table;
}

Vector cde_initial_state(const RnnParams& params, const PiecewiseLinearPath& xbar) {
  require(xbar.dim() == params.input() + 1, "cde_initial_state: path must be time-augmented");
  Vector h = params.h0;
  const Vector& x0 = xbar.values().front();
  h.insert(h.end(), x0.begin(), x0.begin() + static_cast<std::ptrdiff_t>(params.input()));
  return h;
}

Vector taylor_expansion(const StarTable& table, const PiecewiseLinearPath& xbar, double t) {
  require(xbar.dim() == table.control_dim, "taylor_expansion: path dimension does not match the field");
  const Signature sig = signature(xbar, table.depth(), 0.0, t);
  Vector out(table.levels[0].row(0).begin(), table.levels[0].row(0).end());
  double fact = 1.0;
  for (std::size_t k = 1; k <= table.depth(); ++k) {
    fact *= static_cast<double>(k);
    const DenseTensor& s = sig.seq.level(k);
    const Matrix& vals = table.levels[k];
    for (std::size_t r = 0; r < vals.rows(); ++r) {
      if (s[r] == 0.0) continue;
      simd::axpy(s[r] / fact, vals.row(r), out);
    }
  }
  return out;
}

Vector taylor_expansion(const RnnParams& params, const PiecewiseLinearPath& xbar, std::size_t depth, double t,
                        double L) {
  const CdeField field(params, L);
  const Vector h0 = cde_initial_state(params, xbar);
  return taylor_expansion(all_word_stars(field, h0, depth), xbar, t);
}

double radius_limit(const RnnParams& params, double L) {
  const double a = params.activation.growth_constant();
  if (a == 0.0) return std::numeric_limits<double>::infinity();
  const double db = static_cast<double>(params.input() + 1);
  return (1.0 - L) / (8.0 * a * a * db);
}

LambdaBound lambda_bound(const RnnParams& params, double L, std::size_t k) {
  PathConfig{L}.validate();
  params.validate();
  if (k == 0) return {norm(params.h0), true};
  const Matrix W = params.W();
  if (params.activation.kind() == ActivationKind::Identity) {
    const double s = 2.0 / (1.0 - L);
    const double wop = s * operator_norm(W);
    const double m_bar = compute_bound_constants(params, L).M + L;
    const double c = wop * m_bar + std::max(1.0, s * norm(params.b));
    return {c * std::pow(wop, static_cast<double>(k - 1)), true};
  }
  const double a = params.activation.growth_constant();
  const double wf = frobenius_norm(W);
  double fact = 1.0;
  for (std::size_t i = 2; i <= k; ++i) fact *= static_cast<double>(i);
  const double value = std::sqrt(2.0) * a * std::pow(8.0 * a * a * wf / (1.0 - L), static_cast<double>(k - 1)) * fact;
  return {value, wf < radius_limit(params, L)};
}

LambdaBound taylor_error_bound(const RnnParams& params, double L, std::size_t N) {
  const LambdaBound lb = lambda_bound(params, L, N + 1);
  const double db = static_cast<double>(params.input() + 1);
  double coef = 1.0;
  for (std::size_t i = 1; i <= N + 1; ++i) coef *= db / static_cast<double>(i);
  return {coef * lb.value, lb.applicable};
}

std::vector<double> star_point_estimates(const StarTable& table) {
  std::vector<double> out;
  for (const Matrix& m : table.levels) {
    double best = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) best = std::max(best, norm(m.row(r)));
    out.push_back(best);
  }
  return out;
}

}  // namespace rnnsig
