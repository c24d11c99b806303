// Application pipelines: joint-model denoising with alternating direction
// refinement, single-model denoising, wavelet-based zooming, and surface
// interpolation from scattered heights.

#ifndef TDV_APPS_HPP
#define TDV_APPS_HPP

#include <array>

#include "tdv/metrics.hpp"
#include "tdv/pdhg.hpp"
#include "tdv/synth.hpp"
#include "tdv/wavelet.hpp"

namespace tdv {

enum class BetaPolicy { Identity, Fixed, Varying };

struct DirectionEstimate {
  VectorField v;
  ScalarField w;     // coherence weight
  ScalarField beta;  // rescaled anisotropy
};

// Structure-tensor direction estimate: v is the second eigenvector (the
// local coherence direction), optionally smoothed by the screened system,
// with the coherence weight and its rescale to beta.
inline DirectionEstimate estimate_direction(const ScalarField& u, double sigma, double rho,
                                            double gamma = 0, double eps = 1e-8) {
  StructureTensorField J = structure_tensor(u, sigma, rho);
  EigenFields E = eig2x2(J);
  ScalarField w = coherence_weight(E.lam1, E.lam2, eps);
  VectorField vt{E.e2x, E.e2y};
  VectorField v = gamma > 0 ? smooth_direction_field(vt, w, gamma) : normalised(vt);
  ScalarField beta = beta_from_anisotropy(w);
  return DirectionEstimate{std::move(v), std::move(w), std::move(beta)};
}

struct JointModelSpec {
  std::array<double, 3> a{1, 0, 0};  // alpha_{q,0}, 0 disables an order
  double eta = 1.0;
  BetaPolicy policy = BetaPolicy::Fixed;
  double beta = 0.0;  // Fixed policy: b = (1, beta)
  std::vector<std::pair<double, double>> sigma_rho{{1.8, 2.8}};
  double v_gamma = 0;
  int outer = 1;
  int inner = 500;
  std::optional<VectorField> fixed_v;  // bypass estimation
  double tau = 0, sigma_step = 0;
  bool accelerated = false;
  double gap_tol = 0;
  int check_every = 10;
  std::function<void(int, int, double, double)> trace;  // (outer k, iter, energy, gap)
};

struct DenoiseResult {
  ScalarField u;
  VectorField v;
  ScalarField beta;
  Diagnostics diag;
};

namespace detail {

inline std::optional<DirectionModel> joint_weights(const ScalarField& u,
                                                   const JointModelSpec& spec,
                                                   double sigma, double rho, VectorField* v_out,
                                                   ScalarField* beta_out) {
  const GridId centres = centre_grid(u.grid.m, u.grid.n, u.grid.h);
  if (spec.policy == BetaPolicy::Identity) {
    if (v_out) *v_out = VectorField{ScalarField(centres, 0.0), ScalarField(centres, 1.0)};
    if (beta_out) *beta_out = ScalarField(centres, 1.0);
    return std::nullopt;
  }
  VectorField v;
  ScalarField beta;
  if (spec.fixed_v) {
    v = normalised(*spec.fixed_v);
    beta = ScalarField(centres, spec.beta);
    if (spec.policy == BetaPolicy::Varying) {
      DirectionEstimate est = estimate_direction(u, sigma, rho, spec.v_gamma);
      beta = est.beta;
    }
  } else {
    DirectionEstimate est = estimate_direction(u, sigma, rho, spec.v_gamma);
    v = std::move(est.v);
    beta = spec.policy == BetaPolicy::Varying ? est.beta : ScalarField(centres, spec.beta);
  }
  if (v_out) *v_out = v;
  if (beta_out) *beta_out = beta;
  return assemble_m(v, ScalarField(centres, 1.0), beta);
}

inline ReducedProblem joint_problem(const GridId& pixels, const std::array<double, 3>& a,
                                    const std::optional<DirectionModel>& dm) {
  ReducedProblem P;
  for (int q = 1; q <= 3; ++q) {
    if (a[std::size_t(q - 1)] <= 0) continue;
    P.ops.push_back(ReducedOperator{q, pixels, dm});
    P.alpha0.push_back(a[std::size_t(q - 1)]);
  }
  if (P.ops.empty()) throw error("joint model: at least one order weight must be positive");
  return P;
}

}  // namespace detail

// Alternating joint-model denoiser: estimate (v, beta) from the current
// iterate, rebuild the reduced stacks, rerun the primal-dual solver
// warm-started from the previous outer iterate.
inline DenoiseResult denoise_joint(const ScalarField& noisy, const JointModelSpec& spec) {
  if (noisy.grid.kind != GridKind::Pixels) throw error("denoise_joint: expected a pixel field");
  if (spec.outer < 1 || spec.inner < 1) throw error("denoise_joint: iteration counts must be >= 1");
  DataTerm dt = identity_data(noisy, spec.eta);

  DenoiseResult res;
  ScalarField u_ref = noisy;  // direction estimates start from the data
  const ScalarField* warm_u = nullptr;
  const std::vector<TensorFieldStack>* warm_w = nullptr;
  ScalarField warm_u_store;
  std::vector<TensorFieldStack> warm_w_store;

  for (int k = 0; k < spec.outer; ++k) {
    const auto sr = spec.sigma_rho.empty()
                        ? std::make_pair(1.0, 1.0)
                        : spec.sigma_rho[std::min<std::size_t>(std::size_t(k),
                                                               spec.sigma_rho.size() - 1)];
    std::optional<DirectionModel> dm =
        detail::joint_weights(u_ref, spec, sr.first, sr.second, &res.v, &res.beta);
    ReducedProblem P = detail::joint_problem(noisy.grid, spec.a, dm);

    SolveOptions opt;
    opt.max_iters = spec.inner;
    opt.tau = spec.tau;
    opt.sigma = spec.sigma_step;
    opt.accelerated = spec.accelerated;
    opt.gap_tol = spec.gap_tol;
    opt.check_every = spec.check_every;
    if (spec.trace)
      opt.trace = [&, k](int it, double e, double g) { spec.trace(k, it, e, g); };

    ReducedResult r = solve_reduced(P, dt, opt, warm_u, warm_w);
    res.diag = std::move(r.diag);
    warm_u_store = std::move(r.u);
    warm_w_store = std::move(r.w);
    warm_u = &warm_u_store;
    warm_w = &warm_w_store;
    u_ref = warm_u_store;
  }
  res.u = std::move(warm_u_store);
  return res;
}

struct SingleModelSpec {
  int q = 2;
  std::vector<bool> directional;  // per level, inner first; true = use M
  std::vector<double> alpha;      // alpha_0 .. alpha_{q-1}
  double eta = 1.0;
  BetaPolicy policy = BetaPolicy::Varying;
  double beta = 0.0;
  double sigma = 2.0, rho = 25.0;
  double v_gamma = 0;
  int iters = 1000;
  double tau = 0, sigma_step = 0;
  int check_every = 50;
  std::function<void(int, double, double)> trace;
};

// Full bidiagonal-stack denoiser with per-level identity/M choices and
// finite inner radii.
inline ScalarField denoise_single(const ScalarField& noisy, const SingleModelSpec& spec) {
  if (spec.q < 1 || spec.q > 3) throw error("denoise_single: order must be in 1..3");
  if (spec.directional.size() != std::size_t(spec.q) ||
      spec.alpha.size() != std::size_t(spec.q))
    throw error("denoise_single: need one level choice and one radius per order");

  std::optional<DirectionModel> dm;
  bool any_m = false;
  for (bool b : spec.directional) any_m |= b;
  if (any_m) {
    DirectionEstimate est = estimate_direction(noisy, spec.sigma, spec.rho, spec.v_gamma);
    const GridId centres = centre_grid(noisy.grid.m, noisy.grid.n, noisy.grid.h);
    ScalarField beta =
        spec.policy == BetaPolicy::Varying ? est.beta : ScalarField(centres, spec.beta);
    dm = assemble_m(est.v, ScalarField(centres, 1.0), beta);
  }

  std::vector<LevelWeight> levels;
  std::vector<Radius> alpha;
  for (int j = 0; j < spec.q; ++j) {
    levels.push_back(spec.directional[std::size_t(j)] ? LevelWeight{dm} : LevelWeight{});
    alpha.push_back(Radius::of(spec.alpha[std::size_t(j)]));
  }
  OperatorStack K = build_stack(spec.q, std::move(levels), std::move(alpha), noisy.grid);

  SolveOptions opt;
  opt.max_iters = spec.iters;
  opt.tau = spec.tau;
  opt.sigma = spec.sigma_step;
  opt.check_every = spec.check_every;
  if (spec.trace) opt.trace = spec.trace;
  return solve(K, identity_data(noisy, spec.eta), opt).u;
}

struct ZoomSpec {
  int levels = 2;  // dyadic zoom factor 2^levels
  std::array<double, 3> a{1, 0, 0};
  BetaPolicy policy = BetaPolicy::Varying;
  double beta = 0.0;
  double sigma = 1.0, rho = 1.0;
  double v_gamma = 0;
  int outer = 1;
  int inner = 500;
  double tau = 0, sigma_step = 0;
  int check_every = 50;
};

// Naive dyadic upsampling: inverse transform of the pyramid holding the
// given coarse band and zero details.
inline ScalarField upsample_zero_detail(const ScalarField& coarse, int levels) {
  WaveletPyramid p;
  p.levels = levels;
  p.rows0 = coarse.rows() << levels;
  p.cols0 = coarse.cols() << levels;
  p.h = coarse.grid.h;
  p.coarse = coarse;
  for (int l = levels - 1; l >= 0; --l) {
    const int hr = p.rows0 >> (l + 1), hc = p.cols0 >> (l + 1);
    WaveletPyramid::Band b{ScalarField(pixel_grid(hr, hc, p.h), 0.0),
                           ScalarField(pixel_grid(hr, hc, p.h), 0.0),
                           ScalarField(pixel_grid(hr, hc, p.h), 0.0)};
    p.detail.insert(p.detail.begin(), std::move(b));
  }
  return dwt_inverse(p);
}

// Wavelet zooming: reduced primal-dual iteration constrained to the set of
// images whose coarse coefficients match the data.
inline ScalarField zoom_wavelet(const ScalarField& u0_coarse, const ZoomSpec& spec) {
  if (spec.levels < 1) throw error("zoom_wavelet: levels must be >= 1");
  ScalarField u = upsample_zero_detail(u0_coarse, spec.levels);

  const int R = spec.levels;
  DataTerm dt = projection_indicator(
      u0_coarse, [u0_coarse, R](const ScalarField& x) { return project_ud(x, u0_coarse, R); });

  JointModelSpec js;  // reuse the weight-estimation plumbing
  js.a = spec.a;
  js.policy = spec.policy;
  js.beta = spec.beta;
  js.v_gamma = spec.v_gamma;

  std::vector<TensorFieldStack> warm_w;
  for (int k = 0; k < std::max(1, spec.outer); ++k) {
    VectorField v;
    ScalarField beta;
    std::optional<DirectionModel> dm =
        detail::joint_weights(u, js, spec.sigma, spec.rho, &v, &beta);
    ReducedProblem P = detail::joint_problem(u.grid, spec.a, dm);
    SolveOptions opt;
    opt.max_iters = spec.inner;
    opt.tau = spec.tau;
    opt.sigma = spec.sigma_step;
    opt.check_every = spec.check_every;
    ReducedResult r = solve_reduced(P, dt, opt, &u, warm_w.empty() ? nullptr : &warm_w);
    u = std::move(r.u);
    warm_w = std::move(r.w);
  }
  return u;
}

struct SurfaceSpec {
  double alpha2 = 1.0, alpha3 = 1.0;  // 0 disables the order
  double eta = 100.0;
  double mu = 1.0, zeta = 1.0;
  int outer = 10;
  int inner = 2000;
  int v_inner = 500;
  std::uint64_t seed = 7;
  double grad_eps = 1e-8;
  double tau = 0, sigma_step = 0;
  int check_every = 100;
  std::function<void(int, double)> on_outer;  // (t, energy)
};

struct SurfaceResult {
  ScalarField u;
  VectorField v;
  Diagnostics diag;
};

namespace detail {

// min_v mu TV(v) + zeta || 1 - v . p ||^2 via accelerated PDHG with the
// closed-form 2x2 data prox; p is the normalised transferred gradient of u.
inline VectorField surface_v_step(const ScalarField& u, const VectorField& v0, double mu,
                                  double zeta, int iters, double grad_eps) {
  TensorFieldStack g = grad1(u);
  ScalarField p1 = transfer_for(g.c[0].grid).to_centres(g.c[0]);
  ScalarField p2 = transfer_for(g.c[1].grid).to_centres(g.c[1]);
  for (std::size_t i = 0; i < p1.v.size(); ++i) {
    const double n = std::sqrt(p1.v[i] * p1.v[i] + p2.v[i] * p2.v[i]) + grad_eps;
    p1.v[i] /= n;
    p2.v[i] /= n;
  }

  const GridId lattice = pixel_grid(p1.rows(), p1.cols(), p1.grid.h);
  auto relabel = [&](const ScalarField& f) {
    ScalarField out(lattice);
    out.v = f.v;
    return out;
  };
  ScalarField v1 = relabel(v0.x), v2 = relabel(v0.y);
  ScalarField v1b = v1, v2b = v2;
  TensorFieldStack s1 = grad1(ScalarField(lattice, 0.0));
  TensorFieldStack s2 = s1;

  StepSizes st;
  const double L = std::sqrt(8.0) / lattice.h;
  st.tau = st.sigma = 0.99 / L;
  for (int n = 0; n < iters; ++n) {
    TensorFieldStack g1 = grad1(v1b), g2 = grad1(v2b);
    stack_axpy(st.sigma, g1, s1);
    stack_axpy(st.sigma, g2, s2);
    // joint pointwise ball of radius mu over all four dual entries
    for (std::size_t i = 0; i < s1.c[0].v.size(); ++i) {
      const double nn = std::sqrt(s1.c[0].v[i] * s1.c[0].v[i] + s1.c[1].v[i] * s1.c[1].v[i] +
                                  s2.c[0].v[i] * s2.c[0].v[i] + s2.c[1].v[i] * s2.c[1].v[i]);
      if (nn > mu) {
        const double sc = mu / nn;
        s1.c[0].v[i] *= sc;
        s1.c[1].v[i] *= sc;
        s2.c[0].v[i] *= sc;
        s2.c[1].v[i] *= sc;
      }
    }
    ScalarField r1 = div1(s1), r2 = div1(s2);
    ScalarField h1 = v1, h2 = v2;
    axpy(-st.tau, r1, h1);
    axpy(-st.tau, r2, h2);
    const double it = 1.0 / st.tau;
    for (std::size_t i = 0; i < h1.v.size(); ++i) {
      const double q1 = p1.v[i], q2 = p2.v[i];
      const double a11 = 2 * zeta * q1 * q1 + it, a12 = 2 * zeta * q1 * q2;
      const double a22 = 2 * zeta * q2 * q2 + it;
      const double b1 = 2 * zeta * q1 + it * h1.v[i];
      const double b2 = 2 * zeta * q2 + it * h2.v[i];
      const double det = a11 * a22 - a12 * a12;
      h1.v[i] = (a22 * b1 - a12 * b2) / det;
      h2.v[i] = (a11 * b2 - a12 * b1) / det;
    }
    accelerate(st, zeta);
    v1b = h1;
    axpy(st.omega, h1, v1b);
    axpy(-st.omega, v1, v1b);
    v2b = h2;
    axpy(st.omega, h2, v2b);
    axpy(-st.omega, v2, v2b);
    v1 = std::move(h1);
    v2 = std::move(h2);
  }

  VectorField out{v0.x, v0.y};
  out.x.v = v1.v;
  out.y.v = v2.v;
  return normalised(out);
}

}  // namespace detail

// Alternating u/v minimisation for surface interpolation from scattered
// heights: fully directional weights b = (1, 0) on the highest orders.
inline SurfaceResult interpolate_surface(const ScalarField& values, const ScalarField& mask,
                                         const SurfaceSpec& spec) {
  check_same_shape(values, mask, "interpolate_surface");
  if (spec.alpha2 <= 0 && spec.alpha3 <= 0)
    throw error("interpolate_surface: at least one order weight must be positive");

  Rng rng(spec.seed);
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < values.v.size(); ++i)
    if (mask.v[i] != 0) {
      lo = std::min(lo, values.v[i]);
      hi = std::max(hi, values.v[i]);
    }
  if (!(lo <= hi)) throw error("interpolate_surface: empty sampling mask");

  ScalarField u(values.grid);
  for (std::size_t i = 0; i < u.v.size(); ++i)
    u.v[i] = mask.v[i] != 0 ? values.v[i] : rng.uniform(lo, hi);
  const GridId centres = centre_grid(values.grid.m, values.grid.n, values.grid.h);
  VectorField v{ScalarField(centres), ScalarField(centres)};
  for (std::size_t i = 0; i < v.x.v.size(); ++i) {
    const double a = rng.uniform(0.0, 6.283185307179586);
    v.x.v[i] = std::cos(a);
    v.y.v[i] = std::sin(a);
  }

  DataTerm dt = mask_data(values, mask, spec.eta);
  std::array<double, 3> a{0.0, spec.alpha2, spec.alpha3};

  SurfaceResult res{u, v, {}};
  std::vector<TensorFieldStack> warm_w;
  for (int t = 0; t < spec.outer; ++t) {
    DirectionModel dm = assemble_m(res.v, ScalarField(centres, 1.0), ScalarField(centres, 0.0));
    ReducedProblem P = detail::joint_problem(values.grid, a, dm);
    SolveOptions opt;
    opt.max_iters = spec.inner;
    opt.tau = spec.tau;
    opt.sigma = spec.sigma_step;
    opt.check_every = spec.check_every;
    ReducedResult r = solve_reduced(P, dt, opt, &res.u, warm_w.empty() ? nullptr : &warm_w);
    res.u = std::move(r.u);
    res.diag = std::move(r.diag);
    warm_w = std::move(r.w);
    res.v = detail::surface_v_step(res.u, res.v, spec.mu, spec.zeta, spec.v_inner, spec.grad_eps);
    if (spec.on_outer) spec.on_outer(t, res.diag.final_energy);
  }
  return res;
}

}  // namespace tdv

#endif  // TDV_APPS_HPP
