// Weighted gradients/divergences with transfer operators, the bidiagonal
// operator stack of the discrete TDV characterisation, reduced (exact inner
// derivative) operators for the joint model, and operator-norm bounds.

#ifndef TDV_TDVOP_HPP
#define TDV_TDVOP_HPP

#include <limits>
#include <optional>

#include "tdv/anisotropy.hpp"
#include "tdv/diffops.hpp"
#include "tdv/rng.hpp"

namespace tdv {

namespace detail {

// Pointwise rotation-contraction of a transferred gradient pair:
//   r1 = b1 (g1 v1 + g2 v2),  r2 = b2 (g2 v1 - g1 v2).
inline void mix_pair(const DirectionModel& m, const ScalarField& g1, const ScalarField& g2,
                     ScalarField& r1, ScalarField& r2) {
  r1 = ScalarField(g1.grid);
  r2 = ScalarField(g1.grid);
  for (std::size_t i = 0; i < g1.v.size(); ++i) {
    r1.v[i] = m.b1.v[i] * (g1.v[i] * m.v1.v[i] + g2.v[i] * m.v2.v[i]);
    r2.v[i] = m.b2.v[i] * (g2.v[i] * m.v1.v[i] - g1.v[i] * m.v2.v[i]);
  }
}

// Transpose of mix_pair: s1 = b1 p1 v1 - b2 p2 v2,  s2 = b1 p1 v2 + b2 p2 v1.
inline void unmix_pair(const DirectionModel& m, const ScalarField& p1, const ScalarField& p2,
                       ScalarField& s1, ScalarField& s2) {
  s1 = ScalarField(p1.grid);
  s2 = ScalarField(p1.grid);
  for (std::size_t i = 0; i < p1.v.size(); ++i) {
    s1.v[i] = m.b1.v[i] * p1.v[i] * m.v1.v[i] - m.b2.v[i] * p2.v[i] * m.v2.v[i];
    s2.v[i] = m.b1.v[i] * p1.v[i] * m.v2.v[i] + m.b2.v[i] * p2.v[i] * m.v1.v[i];
  }
}

}  // namespace detail

// M^h W^1 grad^h applied to a pixel field; result lives on the cell centres.
inline TensorFieldStack weighted_grad1(const ScalarField& u, const DirectionModel& dm) {
  TensorFieldStack g = grad1(u);
  ScalarField g1 = transfer_for(g.c[0].grid).to_centres(g.c[0]);
  ScalarField g2 = transfer_for(g.c[1].grid).to_centres(g.c[1]);
  check_same_shape(g1, dm.v1, "weighted_grad1");
  ScalarField r1, r2;
  detail::mix_pair(dm, g1, g2, r1, r2);
  return TensorFieldStack(1, {std::move(r1), std::move(r2)});
}

// Exact adjoint of weighted_grad1.
inline ScalarField weighted_div1(const TensorFieldStack& p, const DirectionModel& dm) {
  if (p.order != 1) throw error("weighted_div1: expected an order-1 stack");
  check_same_shape(p.c[0], dm.v1, "weighted_div1");
  ScalarField s1, s2;
  detail::unmix_pair(dm, p.c[0], p.c[1], s1, s2);
  const GridId& g = p.c[0].grid;
  GridId x1 = derivative_grid(g.m, g.n, 1, 0u, g.h);
  GridId x2 = derivative_grid(g.m, g.n, 1, 1u, g.h);
  TensorFieldStack back(1, {transfer_for(x1).from_centres(s1), transfer_for(x2).from_centres(s2)});
  return div1(back);
}

// Dual-ball radius; +infinity is an explicit marker, never a float sentinel.
struct Radius {
  bool finite = true;
  double value = 1.0;

  static Radius of(double a) {
    if (a <= 0) throw error("Radius: must be positive");
    return {true, a};
  }
  static Radius unbounded() { return {false, 0.0}; }
};

// Per-level weighting: empty optional = identity (no transfer averaging).
struct LevelWeight {
  std::optional<DirectionModel> m;
  bool identity() const { return !m.has_value(); }
};

using Block = std::vector<ScalarField>;  // components of one primal/dual slot

inline void block_axpy(double a, const Block& x, Block& y) {
  for (std::size_t k = 0; k < y.size(); ++k) axpy(a, x[k], y[k]);
}

inline double block_dot(const Block& a, const Block& b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += inner_product(a[k], b[k]);
  return s;
}

struct PrimalVars {
  std::vector<Block> z;  // z[0] = {u}; z[i], i >= 1, on the order-i grids
};

struct DualVars {
  std::vector<Block> w;  // w[j-1] = dual of row j
};

// The bidiagonal operator matrix K of the discrete TDV characterisation:
// diagonal blocks K_{j,j}, super-diagonal -I, dual-ball radii alpha.
struct OperatorStack {
  int q = 1;
  GridId pixels;
  std::vector<LevelWeight> levels;  // levels[j-1] for j = 1..q
  std::vector<Radius> alpha;        // alpha[0] = alpha_0 .. alpha[q-1]

  Radius row_radius(int j) const { return alpha[std::size_t(q - j)]; }  // row j, 1-based

  // Diagonal block applied to the components of z_{j-1}.
  Block level_forward(int j, const Block& prev) const {
    const LevelWeight& lw = levels[std::size_t(j - 1)];
    Block out;
    out.reserve(prev.size() * 2);
    for (const auto& f : prev) {
      ScalarField g1 = dx1(f), g2 = dx2(f);
      if (lw.identity()) {
        out.push_back(std::move(g1));
        out.push_back(std::move(g2));
        continue;
      }
      TransferOperator w1 = transfer_for(g1.grid), w2 = transfer_for(g2.grid);
      ScalarField c1 = w1.to_centres(g1), c2 = w2.to_centres(g2);
      ScalarField r1, r2;
      detail::mix_pair(*lw.m, c1, c2, r1, r2);
      if (j < q) {
        out.push_back(w1.from_centres(r1));
        out.push_back(w2.from_centres(r2));
      } else {
        out.push_back(std::move(r1));
        out.push_back(std::move(r2));
      }
    }
    return out;
  }

  // Exact transpose of level_forward.
  Block level_adjoint(int j, const Block& w) const {
    const LevelWeight& lw = levels[std::size_t(j - 1)];
    Block out;
    out.reserve(w.size() / 2);
    for (std::size_t t = 0; 2 * t < w.size(); ++t) {
      ScalarField s1, s2;
      if (lw.identity()) {
        s1 = w[2 * t];
        s2 = w[2 * t + 1];
      } else {
        GridId x1 = derivative_grid(pixels.m, pixels.n, j, unsigned(2 * t), pixels.h);
        GridId x2 = derivative_grid(pixels.m, pixels.n, j, unsigned(2 * t + 1), pixels.h);
        ScalarField p1, p2;
        if (j < q) {
          p1 = transfer_for(x1).to_centres(w[2 * t]);
          p2 = transfer_for(x2).to_centres(w[2 * t + 1]);
        } else {
          p1 = w[2 * t];
          p2 = w[2 * t + 1];
        }
        ScalarField m1, m2;
        detail::unmix_pair(*lw.m, p1, p2, m1, m2);
        s1 = transfer_for(x1).from_centres(m1);
        s2 = transfer_for(x2).from_centres(m2);
      }
      GridId target = (j == 1) ? pixels
                               : derivative_grid(pixels.m, pixels.n, j - 1, unsigned(t), pixels.h);
      ScalarField f = dx1_adjoint(s1, target);
      axpy(1.0, dx2_adjoint(s2, target), f);
      out.push_back(std::move(f));
    }
    return out;
  }

  Block zero_primal_block(int i) const {
    Block b;
    if (i == 0) {
      b.emplace_back(pixels, 0.0);
      return b;
    }
    for (unsigned t = 0; t < (1u << unsigned(i)); ++t)
      b.emplace_back(derivative_grid(pixels.m, pixels.n, i, t, pixels.h), 0.0);
    return b;
  }

  Block zero_dual_block(int j) const {
    const bool on_centres = (j == q) && !levels[std::size_t(j - 1)].identity();
    Block b;
    for (unsigned t = 0; t < (1u << unsigned(j)); ++t)
      b.emplace_back(on_centres ? centre_grid(pixels.m, pixels.n, pixels.h)
                                : derivative_grid(pixels.m, pixels.n, j, t, pixels.h),
                     0.0);
    return b;
  }

  PrimalVars zero_primal() const {
    PrimalVars p;
    for (int i = 0; i < q; ++i) p.z.push_back(zero_primal_block(i));
    return p;
  }

  DualVars zero_dual() const {
    DualVars d;
    for (int j = 1; j <= q; ++j) d.w.push_back(zero_dual_block(j));
    return d;
  }
};

inline OperatorStack build_stack(int q, std::vector<LevelWeight> weights,
                                 std::vector<Radius> alpha, const GridId& pixels) {
  if (q < 1 || q > kMaxOrder) throw error("build_stack: order must be in 1..3");
  if (weights.size() != std::size_t(q)) throw error("build_stack: expected one weight per level");
  if (alpha.size() != std::size_t(q)) throw error("build_stack: expected q radii");
  for (const auto& lw : weights)
    if (!lw.identity()) {
      if (lw.m->v1.rows() != pixels.m - 1 || lw.m->v1.cols() != pixels.n - 1)
        throw error("build_stack: direction model must live on the cell centres");
    }
  return OperatorStack{q, pixels, std::move(weights), std::move(alpha)};
}

// Row j of K z: K_{j,j} z_{j-1} - z_j (no -z term in the last row).
inline DualVars stack_apply(const OperatorStack& K, const PrimalVars& z) {
  if (z.z.size() != std::size_t(K.q)) throw error("stack_apply: arity mismatch");
  DualVars out;
  out.w.reserve(std::size_t(K.q));
  for (int j = 1; j <= K.q; ++j) {
    Block row = K.level_forward(j, z.z[std::size_t(j - 1)]);
    if (j < K.q) block_axpy(-1.0, z.z[std::size_t(j)], row);
    out.w.push_back(std::move(row));
  }
  return out;
}

// (K^T w)_i = K_{i+1,i+1}^T w_{i+1} - w_i  (the w_i term only for i >= 1).
inline PrimalVars stack_apply_adjoint(const OperatorStack& K, const DualVars& w) {
  if (w.w.size() != std::size_t(K.q)) throw error("stack_apply_adjoint: arity mismatch");
  PrimalVars out;
  out.z.reserve(std::size_t(K.q));
  for (int i = 0; i < K.q; ++i) {
    Block b = K.level_adjoint(i + 1, w.w[std::size_t(i)]);
    if (i >= 1) block_axpy(-1.0, w.w[std::size_t(i - 1)], b);
    out.z.push_back(std::move(b));
  }
  return out;
}

// Reduced operator of the joint model: K_q = M W^q grad^q (exact inner
// derivatives); an absent direction model is the plain isotropic grad^q.
struct ReducedOperator {
  int q = 1;
  GridId pixels;
  std::optional<DirectionModel> m;

  TensorFieldStack apply(const ScalarField& u) const {
    TensorFieldStack g = grad_q(u, q);
    if (!m) return g;
    std::vector<ScalarField> centred(g.c.size());
    for (std::size_t k = 0; k < g.c.size(); ++k)
      centred[k] = transfer_for(g.c[k].grid).to_centres(g.c[k]);
    std::vector<ScalarField> out(g.c.size());
    for (std::size_t t = 0; 2 * t < g.c.size(); ++t)
      detail::mix_pair(*m, centred[2 * t], centred[2 * t + 1], out[2 * t], out[2 * t + 1]);
    return TensorFieldStack(q, std::move(out));
  }

  ScalarField apply_adjoint(const TensorFieldStack& w) const {
    if (w.order != q) throw error("ReducedOperator: dual order mismatch");
    if (!m) return div_q(w);
    std::vector<ScalarField> unmixed(w.c.size());
    for (std::size_t t = 0; 2 * t < w.c.size(); ++t)
      detail::unmix_pair(*m, w.c[2 * t], w.c[2 * t + 1], unmixed[2 * t], unmixed[2 * t + 1]);
    std::vector<ScalarField> back(w.c.size());
    for (unsigned k = 0; k < w.c.size(); ++k) {
      GridId xk = derivative_grid(pixels.m, pixels.n, q, k, pixels.h);
      back[k] = transfer_for(xk).from_centres(unmixed[k]);
    }
    for (int j = 0; j < q; ++j) back = detail::div_level(back);
    return back.front();
  }

  TensorFieldStack zero_dual() const {
    std::vector<ScalarField> c;
    for (unsigned k = 0; k < (1u << unsigned(q)); ++k)
      c.emplace_back(m ? centre_grid(pixels.m, pixels.n, pixels.h)
                       : derivative_grid(pixels.m, pixels.n, q, k, pixels.h),
                     0.0);
    return TensorFieldStack(q, std::move(c));
  }
};

// alpha_0 || M W^q grad^q u ||_{2,1}.
inline double tdv_energy_reduced(const ScalarField& u, int q,
                                 const std::optional<DirectionModel>& dm, double alpha0) {
  ReducedOperator op{q, u.grid, dm};
  return alpha0 * norm21(op.apply(u));
}

namespace detail {

inline double level_weight_factor(const LevelWeight& lw) {
  if (lw.identity()) return 1.0;
  double f = 0;
  for (std::size_t i = 0; i < lw.m->b1.v.size(); ++i)
    f = std::max(f, std::max(std::abs(lw.m->b1.v[i]), std::abs(lw.m->b2.v[i])));
  return f;
}

}  // namespace detail

// Analytic bound L_q on the norm of the weighted q-th order derivative
// chain: L_q^2 <= (8 h^-2)^q prod_j ||W^T M_j W||^2, with ||W|| <= 1 and
// the per-cell spectral norm of M_j equal to max(b1, b2).
inline double operator_norm_bound(const OperatorStack& K) {
  double L2 = 1.0;
  const double c = 8.0 / (K.pixels.h * K.pixels.h);
  for (int j = 1; j <= K.q; ++j) {
    const double f = detail::level_weight_factor(K.levels[std::size_t(j - 1)]);
    L2 *= c * f * f;
  }
  return std::sqrt(L2);
}

inline double operator_norm_bound(const ReducedOperator& op) {
  const double c = 8.0 / (op.pixels.h * op.pixels.h);
  double f = 1.0;
  if (op.m) f = detail::level_weight_factor(LevelWeight{op.m});
  return std::sqrt(std::pow(c, op.q)) * f;
}

// Power iteration on K^T K for the full bidiagonal stack, -I couplings
// included. Deterministic: fixed seed and iteration count.
inline double power_iteration_norm(const OperatorStack& K, int iters = 60,
                                   std::uint64_t seed = 0x9E3779B97F4A7C15ull) {
  Rng rng(seed);
  PrimalVars z = K.zero_primal();
  for (auto& blk : z.z)
    for (auto& f : blk)
      for (double& x : f.v) x = rng.uniform(-1.0, 1.0);
  double est = 0;
  for (int it = 0; it < iters; ++it) {
    DualVars w = stack_apply(K, z);
    PrimalVars zn = stack_apply_adjoint(K, w);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < z.z.size(); ++i) {
      num += block_dot(zn.z[i], z.z[i]);
      den += block_dot(z.z[i], z.z[i]);
    }
    if (den == 0) return 0;
    est = std::sqrt(std::max(0.0, num / den));
    double nn = 0;
    for (auto& blk : zn.z) nn += block_dot(blk, blk);
    nn = std::sqrt(nn);
    if (nn == 0) return 0;
    for (auto& blk : zn.z)
      for (auto& f : blk) scale(f, 1.0 / nn);
    z = std::move(zn);
  }
  return est;
}

inline double power_iteration_norm(const std::vector<ReducedOperator>& ops, int iters = 60,
                                   std::uint64_t seed = 0x9E3779B97F4A7C15ull) {
  if (ops.empty()) throw error("power_iteration_norm: empty operator list");
  Rng rng(seed);
  ScalarField z(ops.front().pixels);
  for (double& x : z.v) x = rng.uniform(-1.0, 1.0);
  double est = 0;
  for (int it = 0; it < iters; ++it) {
    ScalarField zn(z.grid, 0.0);
    for (const auto& op : ops) axpy(1.0, op.apply_adjoint(op.apply(z)), zn);
    const double den = inner_product(z, z);
    if (den == 0) return 0;
    est = std::sqrt(std::max(0.0, inner_product(zn, z) / den));
    const double nn = std::sqrt(inner_product(zn, zn));
    if (nn == 0) return 0;
    scale(zn, 1.0 / nn);
    z = std::move(zn);
  }
  return est;
}

}  // namespace tdv

#endif  // TDV_TDVOP_HPP
