// Direction-field estimation from image content: Gaussian smoothing,
// structure tensor, eigen-analysis, coherence weights, and assembly of the
// per-cell 2x2 weighting field M = Lambda_b R_theta^T.

#ifndef TDV_ANISOTROPY_HPP
#define TDV_ANISOTROPY_HPP

#include <algorithm>
#include <optional>

#include "tdv/diffops.hpp"
#include "tdv/fields.hpp"

namespace tdv {

// Discrete Gaussian convolution, separable, reflective boundary. The kernel
// is truncated at ceil(3 sigma) and renormalised to sum 1; sigma = 0 is the
// identity.
inline ScalarField gaussian_smooth(const ScalarField& u, double sigma) {
  if (sigma < 0) throw error("gaussian_smooth: sigma must be >= 0");
  if (sigma == 0) return u;
  const int half = int(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * half + 1);
  double sum = 0;
  for (int i = -half; i <= half; ++i) {
    k[i + half] = std::exp(-0.5 * double(i) * double(i) / (sigma * sigma));
    sum += k[i + half];
  }
  for (double& w : k) w /= sum;

  const int M = u.rows(), N = u.cols();
  auto reflect = [](int i, int n) {
    while (i < 0 || i >= n) {
      if (i < 0) i = -i - 1;
      if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
  };

  ScalarField tmp(u.grid), out(u.grid);
  for (int r = 0; r < M; ++r)
    for (int c = 0; c < N; ++c) {
      double s = 0;
      for (int i = -half; i <= half; ++i) s += k[i + half] * u.at(reflect(r + i, M), c);
      tmp.at(r, c) = s;
    }
  for (int r = 0; r < M; ++r)
    for (int c = 0; c < N; ++c) {
      double s = 0;
      for (int i = -half; i <= half; ++i) s += k[i + half] * tmp.at(r, reflect(c + i, N));
      out.at(r, c) = s;
    }
  return out;
}

// Symmetric 2x2 tensor entries on the cell-centre grid.
struct StructureTensorField {
  ScalarField j11, j12, j22;
  double sigma = 0, rho = 0;
};

// J_rho(u) = K_rho * (grad u_sigma (x) grad u_sigma), computed on the cell
// centres via the first-order transfer operators.
inline StructureTensorField structure_tensor(const ScalarField& u, double sigma, double rho) {
  if (u.grid.kind != GridKind::Pixels) throw error("structure_tensor: expected a pixel-grid field");
  if (sigma < 0 || rho < 0) throw error("structure_tensor: sigma and rho must be >= 0");
  ScalarField us = gaussian_smooth(u, sigma);
  TensorFieldStack g = grad1(us);
  ScalarField g1 = transfer_for(g.c[0].grid).to_centres(g.c[0]);
  ScalarField g2 = transfer_for(g.c[1].grid).to_centres(g.c[1]);

  StructureTensorField J;
  J.sigma = sigma;
  J.rho = rho;
  J.j11 = ScalarField(g1.grid);
  J.j12 = ScalarField(g1.grid);
  J.j22 = ScalarField(g1.grid);
  for (std::size_t i = 0; i < g1.v.size(); ++i) {
    J.j11.v[i] = g1.v[i] * g1.v[i];
    J.j12.v[i] = g1.v[i] * g2.v[i];
    J.j22.v[i] = g2.v[i] * g2.v[i];
  }
  J.j11 = gaussian_smooth(J.j11, rho);
  J.j12 = gaussian_smooth(J.j12, rho);
  J.j22 = gaussian_smooth(J.j22, rho);
  return J;
}

struct EigenFields {
  ScalarField lam1, lam2;    // ordered, lam1 >= lam2
  ScalarField e1x, e1y;      // unit eigenvector of lam1
  ScalarField e2x, e2y;      // unit eigenvector of lam2
};

// Closed-form symmetric 2x2 eigendecomposition per cell. Sign convention:
// the first nonzero component of each eigenvector is nonnegative; the
// degenerate lam1 = lam2 case yields e1 = (1,0), e2 = (0,1).
inline EigenFields eig2x2(const StructureTensorField& J) {
  EigenFields E;
  E.lam1 = ScalarField(J.j11.grid);
  E.lam2 = ScalarField(J.j11.grid);
  E.e1x = ScalarField(J.j11.grid);
  E.e1y = ScalarField(J.j11.grid);
  E.e2x = ScalarField(J.j11.grid);
  E.e2y = ScalarField(J.j11.grid);
  for (std::size_t i = 0; i < J.j11.v.size(); ++i) {
    const double a = J.j11.v[i], b = J.j12.v[i], d = J.j22.v[i];
    const double tr = a + d;
    const double disc = std::sqrt(std::max(0.0, (a - d) * (a - d) + 4.0 * b * b));
    const double l1 = 0.5 * (tr + disc);
    const double l2 = 0.5 * (tr - disc);
    double ex, ey;
    // candidate eigenvectors (b, l1-a) and (l1-d, b); pick the larger
    const double n1 = b * b + (l1 - a) * (l1 - a);
    const double n2 = (l1 - d) * (l1 - d) + b * b;
    if (n1 >= n2) {
      ex = b;
      ey = l1 - a;
    } else {
      ex = l1 - d;
      ey = b;
    }
    const double nn = std::sqrt(ex * ex + ey * ey);
    if (nn < 1e-300) {
      ex = 1;
      ey = 0;
    } else {
      ex /= nn;
      ey /= nn;
    }
    if (ex < 0 || (ex == 0 && ey < 0)) {
      ex = -ex;
      ey = -ey;
    }
    double fx = -ey, fy = ex;  // perpendicular
    if (fx < 0 || (fx == 0 && fy < 0)) {
      fx = -fx;
      fy = -fy;
    }
    E.lam1.v[i] = l1;
    E.lam2.v[i] = l2;
    E.e1x.v[i] = ex;
    E.e1y.v[i] = ey;
    E.e2x.v[i] = fx;
    E.e2y.v[i] = fy;
  }
  return E;
}

// w = (lam1 - lam2) / (lam1 + lam2 + eps), in [0, 1).
inline ScalarField coherence_weight(const ScalarField& lam1, const ScalarField& lam2,
                                    double eps = 1e-8) {
  if (eps <= 0) throw error("coherence_weight: eps must be > 0");
  check_same_shape(lam1, lam2, "coherence_weight");
  ScalarField w(lam1.grid);
  for (std::size_t i = 0; i < w.v.size(); ++i)
    w.v[i] = (lam1.v[i] - lam2.v[i]) / (lam1.v[i] + lam2.v[i] + eps);
  return w;
}

// beta = rescale(1 - w) into [0, 1]; a flat weight map falls back to the
// fully isotropic beta = 1.
inline ScalarField beta_from_anisotropy(const ScalarField& w) {
  ScalarField beta(w.grid);
  double lo = w.v.empty() ? 0 : 1e300, hi = -1e300;
  for (double x : w.v) {
    lo = std::min(lo, 1.0 - x);
    hi = std::max(hi, 1.0 - x);
  }
  if (hi - lo < 1e-15) {
    fill(beta, 1.0);
    return beta;
  }
  for (std::size_t i = 0; i < w.v.size(); ++i) beta.v[i] = ((1.0 - w.v[i]) - lo) / (hi - lo);
  return beta;
}

// Unit direction samples on the cell centres.
struct VectorField {
  ScalarField x, y;
};

inline VectorField normalised(const VectorField& v) {
  VectorField out = v;
  for (std::size_t i = 0; i < out.x.v.size(); ++i) {
    const double n = std::sqrt(out.x.v[i] * out.x.v[i] + out.y.v[i] * out.y.v[i]);
    if (n < 1e-12) {
      out.x.v[i] = 0;
      out.y.v[i] = 1;
    } else {
      out.x.v[i] /= n;
      out.y.v[i] /= n;
    }
  }
  return out;
}

namespace detail {

// Conjugate gradient for the SPD system (diag(w) + gamma L^T L) t = diag(w) b,
// L being the forward-difference gradient on the cell-centre lattice.
inline ScalarField solve_screened(const ScalarField& w, const ScalarField& b, double gamma) {
  GridId g = pixel_grid(b.rows(), b.cols(), b.grid.h);  // relabel: centres act as pixels here
  ScalarField bw(g), t(g, 0.0);
  for (std::size_t i = 0; i < b.v.size(); ++i) bw.v[i] = w.v[i] * b.v[i];

  auto apply = [&](const ScalarField& x) {
    ScalarField ax = div1(grad1(x));
    scale(ax, gamma);
    for (std::size_t i = 0; i < ax.v.size(); ++i) ax.v[i] += w.v[i] * x.v[i];
    return ax;
  };

  ScalarField r = bw, p = r;
  double rr = inner_product(r, r);
  const double b2 = std::sqrt(inner_product(bw, bw));
  if (b2 == 0) return t;
  const double tol = 1e-8 * b2;
  const std::size_t max_it = 10 * b.v.size();
  for (std::size_t it = 0; it < max_it; ++it) {
    if (std::sqrt(rr) <= tol) {
      // refresh against the true residual before accepting
      ScalarField rt = bw;
      axpy(-1.0, apply(t), rt);
      rr = inner_product(rt, rt);
      if (std::sqrt(rr) <= tol) break;
      r = rt;
      p = r;
    }
    ScalarField ap = apply(p);
    const double pap = inner_product(p, ap);
    if (pap <= 0) break;  // PSD round-off guard
    const double alpha = rr / pap;
    axpy(alpha, p, t);
    axpy(-alpha, ap, r);
    const double rr_new = inner_product(r, r);
    for (std::size_t i = 0; i < p.v.size(); ++i) p.v[i] = r.v[i] + (rr_new / rr) * p.v[i];
    rr = rr_new;
  }
  if (std::sqrt(rr) > tol)
    throw error("smooth_direction_field: CG did not converge, residual " +
                std::to_string(std::sqrt(rr) / b2));
  t.grid = b.grid;
  return t;
}

}  // namespace detail

// Componentwise solve of the screened-Laplacian system behind the direction
// smoothing problem, renormalised to unit length per cell. A vanishing
// weight map degenerates to the constant continuation of the input mean.
inline VectorField smooth_direction_field(const VectorField& vt, const ScalarField& w,
                                          double gamma) {
  if (gamma < 0) throw error("smooth_direction_field: gamma must be >= 0");
  check_same_shape(vt.x, w, "smooth_direction_field");
  double wmax = 0;
  for (double x : w.v) wmax = std::max(wmax, x);
  if (wmax < 1e-14) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < vt.x.v.size(); ++i) {
      mx += vt.x.v[i];
      my += vt.y.v[i];
    }
    VectorField out{ScalarField(vt.x.grid, mx / double(vt.x.v.size())),
                    ScalarField(vt.y.grid, my / double(vt.y.v.size()))};
    return normalised(out);
  }
  if (gamma == 0) return normalised(vt);
  VectorField out;
  out.x = detail::solve_screened(w, vt.x, gamma);
  out.y = detail::solve_screened(w, vt.y, gamma);
  return normalised(out);
}

// Per-cell weighting M with rows (b1 v, b2 v_perp), so that
// M grad u = (b1 grad_v u, b2 grad_{v_perp} u).
struct DirectionModel {
  ScalarField v1, v2;  // unit direction
  ScalarField b1, b2;  // contraction weights in [0, 1]
};

inline DirectionModel assemble_m(const VectorField& v, const ScalarField& b1,
                                 const ScalarField& b2) {
  check_same_shape(v.x, v.y, "assemble_m");
  check_same_shape(v.x, b1, "assemble_m");
  check_same_shape(v.x, b2, "assemble_m");
  for (std::size_t i = 0; i < v.x.v.size(); ++i) {
    const double n = std::sqrt(v.x.v[i] * v.x.v[i] + v.y.v[i] * v.y.v[i]);
    if (std::abs(n - 1.0) > 1e-9)
      throw error("assemble_m: direction field is not unit length");
    if (b1.v[i] < -1e-12 || b1.v[i] > 1 + 1e-12 || b2.v[i] < -1e-12 || b2.v[i] > 1 + 1e-12)
      throw error("assemble_m: contraction weights must lie in [0,1]");
  }
  return DirectionModel{v.x, v.y, b1, b2};
}

inline DirectionModel constant_direction_model(const GridId& centres, double vx, double vy,
                                               double b1, double b2) {
  const double n = std::sqrt(vx * vx + vy * vy);
  VectorField v{ScalarField(centres, vx / n), ScalarField(centres, vy / n)};
  return assemble_m(v, ScalarField(centres, b1), ScalarField(centres, b2));
}

}  // namespace tdv

#endif  // TDV_ANISOTROPY_HPP
