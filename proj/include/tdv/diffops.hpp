// Isotropic half-step finite differences, their exact adjoints, and the
// partition-of-unity transfer operators between derivative grids and the
// cell-centre grid.

#ifndef TDV_DIFFOPS_HPP
#define TDV_DIFFOPS_HPP

#include "tdv/fields.hpp"

namespace tdv {

// Forward half-step difference along axis 1 (rows); last row is zero.
// Output lives on the derivative grid obtained by appending iota = 1.
inline ScalarField dx1(const ScalarField& f) {
  GridId g = derivative_grid(f.grid.m, f.grid.n, f.grid.order + 1, f.grid.index << 1u,
                             f.grid.h);
  ScalarField out(g);
  const int M = f.rows(), N = f.cols();
  const double ih = 1.0 / f.grid.h;
  for (int r = 0; r + 1 < M; ++r)
    for (int c = 0; c < N; ++c) out.at(r, c) = (f.at(r + 1, c) - f.at(r, c)) * ih;
  return out;
}

// Forward half-step difference along axis 2 (columns); last column zero.
inline ScalarField dx2(const ScalarField& f) {
  GridId g = derivative_grid(f.grid.m, f.grid.n, f.grid.order + 1,
                             (f.grid.index << 1u) | 1u, f.grid.h);
  ScalarField out(g);
  const int M = f.rows(), N = f.cols();
  const double ih = 1.0 / f.grid.h;
  for (int r = 0; r < M; ++r)
    for (int c = 0; c + 1 < N; ++c) out.at(r, c) = (f.at(r, c + 1) - f.at(r, c)) * ih;
  return out;
}

// Exact transposes of dx1/dx2 (the divergence building blocks). The
// target grid drops the outermost derivative index.
inline ScalarField dx1_adjoint(const ScalarField& p, const GridId& target) {
  ScalarField out(target);
  const int M = p.rows(), N = p.cols();
  const double ih = 1.0 / p.grid.h;
  for (int c = 0; c < N; ++c) {
    out.at(0, c) = -p.at(0, c) * ih;
    for (int r = 1; r + 1 < M; ++r) out.at(r, c) = (p.at(r - 1, c) - p.at(r, c)) * ih;
    if (M > 1) out.at(M - 1, c) = p.at(M - 2, c) * ih;
  }
  return out;
}

inline ScalarField dx2_adjoint(const ScalarField& p, const GridId& target) {
  ScalarField out(target);
  const int M = p.rows(), N = p.cols();
  const double ih = 1.0 / p.grid.h;
  for (int r = 0; r < M; ++r) {
    out.at(r, 0) = -p.at(r, 0) * ih;
    for (int c = 1; c + 1 < N; ++c) out.at(r, c) = (p.at(r, c - 1) - p.at(r, c)) * ih;
    if (N > 1) out.at(r, N - 1) = p.at(r, N - 2) * ih;
  }
  return out;
}

inline GridId parent_grid(const GridId& g) {
  if (g.order == 1) return pixel_grid(g.m, g.n, g.h);
  return derivative_grid(g.m, g.n, g.order - 1, g.index >> 1u, g.h);
}

inline TensorFieldStack grad1(const ScalarField& u) {
  if (u.grid.kind != GridKind::Pixels) throw error("grad1: field must live on the pixel grid");
  return TensorFieldStack(1, {dx1(u), dx2(u)});
}

inline ScalarField div1(const TensorFieldStack& p) {
  if (p.order != 1) throw error("div1: expected an order-1 stack");
  GridId target = pixel_grid(p.c[0].grid.m, p.c[0].grid.n, p.c[0].grid.h);
  ScalarField out = dx1_adjoint(p.c[0], target);
  axpy(1.0, dx2_adjoint(p.c[1], target), out);
  return out;
}

namespace detail {

// One gradient level applied to every component: (.., g) -> (.., dx1 g, dx2 g).
inline std::vector<ScalarField> grad_level(const std::vector<ScalarField>& comps) {
  std::vector<ScalarField> out;
  out.reserve(comps.size() * 2);
  for (const auto& f : comps) {
    out.push_back(dx1(f));
    out.push_back(dx2(f));
  }
  return out;
}

// Transpose of grad_level: adjacent pairs collapse to their parent grid.
inline std::vector<ScalarField> div_level(const std::vector<ScalarField>& comps) {
  std::vector<ScalarField> out;
  out.reserve(comps.size() / 2);
  for (std::size_t t = 0; t * 2 < comps.size(); ++t) {
    GridId target = parent_grid(comps[2 * t].grid);
    ScalarField f = dx1_adjoint(comps[2 * t], target);
    axpy(1.0, dx2_adjoint(comps[2 * t + 1], target), f);
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace detail

constexpr int kMaxOrder = 3;

// Iterated half-step gradient; component iota = d_{iota_q} ... d_{iota_1} u,
// components in lexicographic iota order.
inline TensorFieldStack grad_q(const ScalarField& u, int q) {
  if (q < 1) throw error("grad_q: order must be >= 1");
  if (q > kMaxOrder) throw error("grad_q: orders above " + std::to_string(kMaxOrder) +
                                 " are unsupported");
  if (u.grid.kind != GridKind::Pixels) throw error("grad_q: field must live on the pixel grid");
  std::vector<ScalarField> comps{u};
  for (int j = 0; j < q; ++j) comps = detail::grad_level(comps);
  return TensorFieldStack(q, std::move(comps));
}

// Exact adjoint of grad_q (div_level applied q times).
inline ScalarField div_q(const TensorFieldStack& p) {
  if (p.order < 1 || p.order > kMaxOrder) throw error("div_q: unsupported order");
  std::vector<ScalarField> comps = p.c;
  for (int j = 0; j < p.order; ++j) comps = detail::div_level(comps);
  return comps.front();
}

// Partition-of-unity transfer W from one derivative grid onto the cell
// centres, with its exact transpose. Along each axis the stencil either
// averages the two adjacent samples (when the number of derivatives taken
// along that axis is even, so the lattice has no half-offset there) or
// passes the sample through.
struct TransferOperator {
  GridId source;

  bool average_rows() const { return source.count_axis1() % 2 == 0; }
  bool average_cols() const { return source.count_axis2() % 2 == 0; }

  ScalarField to_centres(const ScalarField& x) const {
    if (!(x.grid == source)) throw error("TransferOperator: field/grid mismatch");
    const bool ar = average_rows(), ac = average_cols();
    ScalarField out(centre_grid(source.m, source.n, source.h));
    const int R = out.rows(), C = out.cols();
    const double w = 1.0 / ((ar ? 2.0 : 1.0) * (ac ? 2.0 : 1.0));
    for (int r = 0; r < R; ++r)
      for (int c = 0; c < C; ++c) {
        double s = x.at(r, c);
        if (ar) s += x.at(r + 1, c);
        if (ac) s += x.at(r, c + 1);
        if (ar && ac) s += x.at(r + 1, c + 1);
        out.at(r, c) = s * w;
      }
    return out;
  }

  ScalarField from_centres(const ScalarField& y) const {
    if (y.grid.kind != GridKind::CellCentres || y.grid.m != source.m || y.grid.n != source.n)
      throw error("TransferOperator: adjoint input must live on the matching cell centres");
    const bool ar = average_rows(), ac = average_cols();
    ScalarField out(source, 0.0);
    const int R = y.rows(), C = y.cols();
    const double w = 1.0 / ((ar ? 2.0 : 1.0) * (ac ? 2.0 : 1.0));
    for (int r = 0; r < R; ++r)
      for (int c = 0; c < C; ++c) {
        const double s = y.at(r, c) * w;
        out.at(r, c) += s;
        if (ar) out.at(r + 1, c) += s;
        if (ac) out.at(r, c + 1) += s;
        if (ar && ac) out.at(r + 1, c + 1) += s;
      }
    return out;
  }
};

inline TransferOperator transfer_for(const GridId& g) {
  if (g.kind != GridKind::Derivative)
    throw error("transfer_for: transfers are defined on derivative grids");
  return TransferOperator{g};
}

inline ScalarField transfer_to_centres(const TransferOperator& w, const ScalarField& x) {
  return w.to_centres(x);
}

inline ScalarField transfer_adjoint(const TransferOperator& w, const ScalarField& y) {
  return w.from_centres(y);
}

}  // namespace tdv

#endif  // TDV_DIFFOPS_HPP
