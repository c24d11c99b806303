// Primal-dual hybrid gradient solver for min_z max_w <Kz,w> - F*(w) + G(z):
// polar-ball and quadratic/indicator data proximal maps, fixed-step and
// accelerated schedules, primal-dual-gap stopping.

#ifndef TDV_PDHG_HPP
#define TDV_PDHG_HPP

#include <functional>
#include <limits>

#include "tdv/tdvop.hpp"

namespace tdv {

enum class Sampling { Identity, Mask, Custom };

// Data term (eta/2)||S u - u_diamond||^2, or the hard constraint S u = S u_diamond
// in indicator mode. S*S is diagonal for Identity and Mask; Custom carries a
// projection for indicator use only.
struct DataTerm {
  Sampling op = Sampling::Identity;
  ScalarField data;
  ScalarField mask;  // binary, Mask mode only
  double eta = 1.0;
  bool indicator = false;
  std::function<ScalarField(const ScalarField&)> project;  // Custom indicator projection
};

inline DataTerm identity_data(ScalarField u, double eta) {
  if (eta <= 0) throw error("identity_data: eta must be > 0");
  DataTerm dt;
  dt.data = std::move(u);
  dt.eta = eta;
  return dt;
}

inline DataTerm mask_data(ScalarField u, ScalarField mask, double eta) {
  if (eta <= 0) throw error("mask_data: eta must be > 0");
  check_same_shape(u, mask, "mask_data");
  double nnz = 0;
  for (double m : mask.v) nnz += (m != 0);
  if (nnz == 0) throw error("mask_data: empty sampling mask");
  DataTerm dt;
  dt.op = Sampling::Mask;
  dt.data = std::move(u);
  dt.mask = std::move(mask);
  dt.eta = eta;
  return dt;
}

inline DataTerm projection_indicator(ScalarField u, std::function<ScalarField(const ScalarField&)> project) {
  DataTerm dt;
  dt.op = Sampling::Custom;
  dt.data = std::move(u);
  dt.indicator = true;
  dt.project = std::move(project);
  return dt;
}

// Pointwise projection onto the Euclidean ball of the given radius, the
// norm taken across stack components.
inline void prox_polar_ball_inplace(Block& w, Radius alpha) {
  if (!alpha.finite) return;
  if (alpha.value <= 0) throw error("prox_polar_ball: radius must be positive");
  const std::size_t npts = w.front().v.size();
  for (std::size_t i = 0; i < npts; ++i) {
    double q = 0;
    for (const auto& f : w) q += f.v[i] * f.v[i];
    const double n = std::sqrt(q);
    if (n > alpha.value) {
      const double s = alpha.value / n;
      for (auto& f : w) f.v[i] *= s;
    }
  }
}

inline TensorFieldStack prox_polar_ball(const TensorFieldStack& w, Radius alpha) {
  TensorFieldStack out = w;
  prox_polar_ball_inplace(out.c, alpha);
  return out;
}

// Closed form z0 = zhat + (I + tau eta S*S)^{-1} tau eta S*(u_diamond - S zhat);
// S*S is diagonal for the supported samplings.
inline ScalarField prox_quadratic_data(const ScalarField& zhat, const DataTerm& dt, double tau) {
  if (dt.indicator) throw error("prox_quadratic_data: data term is in indicator mode");
  if (tau <= 0 || dt.eta <= 0) throw error("prox_quadratic_data: tau and eta must be > 0");
  if (dt.op == Sampling::Custom)
    throw error("prox_quadratic_data: no solver registered for non-diagonal S*S");
  check_same_shape(zhat, dt.data, "prox_quadratic_data");
  ScalarField out = zhat;
  const double te = tau * dt.eta;
  if (dt.op == Sampling::Identity) {
    for (std::size_t i = 0; i < out.v.size(); ++i)
      out.v[i] = (zhat.v[i] + te * dt.data.v[i]) / (1.0 + te);
  } else {
    for (std::size_t i = 0; i < out.v.size(); ++i)
      if (dt.mask.v[i] != 0) out.v[i] = (zhat.v[i] + te * dt.data.v[i]) / (1.0 + te);
  }
  return out;
}

// Orthogonal projection onto {u : S u = S u_diamond}.
inline ScalarField prox_indicator_data(const ScalarField& zhat, const DataTerm& dt) {
  if (!dt.indicator) throw error("prox_indicator_data: data term is not in indicator mode");
  if (dt.op == Sampling::Custom) return dt.project(zhat);
  check_same_shape(zhat, dt.data, "prox_indicator_data");
  ScalarField out = zhat;
  if (dt.op == Sampling::Identity) return dt.data;
  for (std::size_t i = 0; i < out.v.size(); ++i)
    if (dt.mask.v[i] != 0) out.v[i] = dt.data.v[i];
  return out;
}

inline ScalarField prox_data(const ScalarField& zhat, const DataTerm& dt, double tau) {
  return dt.indicator ? prox_indicator_data(zhat, dt) : prox_quadratic_data(zhat, dt, tau);
}

inline double data_energy(const ScalarField& u, const DataTerm& dt) {
  if (dt.indicator) return 0.0;
  double s = 0;
  for (std::size_t i = 0; i < u.v.size(); ++i) {
    if (dt.op == Sampling::Mask && dt.mask.v[i] == 0) continue;
    const double d = u.v[i] - dt.data.v[i];
    s += d * d;
  }
  return 0.5 * dt.eta * s;
}

struct StepSizes {
  double tau = 0, sigma = 0, omega = 1.0;
};

// omega_n = (1 + 2 gamma tau_n)^{-1/2}; tau_{n+1} = omega_n tau_n;
// sigma_{n+1} = sigma_n / omega_n. The tau*sigma product is invariant.
inline void accelerate(StepSizes& s, double gamma) {
  if (gamma < 0) throw error("accelerate: gamma must be >= 0");
  s.omega = 1.0 / std::sqrt(1.0 + 2.0 * gamma * s.tau);
  s.tau *= s.omega;
  s.sigma /= s.omega;
}

struct SolverState {
  PrimalVars z, zbar;
  DualVars w;
  StepSizes steps;
  int n = 0;
  std::vector<double> gap_history;
};

struct SolveOptions {
  int max_iters = 500;
  double gap_tol = 0;       // 0 disables the gap criterion
  int check_every = 10;     // gap/energy sampling interval
  double tau = 0, sigma = 0;  // 0 = choose from the operator norm
  double omega = 1.0;
  bool accelerated = false;
  double gamma = 0;  // 0 = eta/2
  std::function<void(int, double, double)> trace;  // (iter, energy, gap)
};

struct Diagnostics {
  int iterations = 0;
  double final_gap = std::numeric_limits<double>::quiet_NaN();
  double final_energy = 0;
  std::vector<double> energy_trace;
  std::vector<double> gap_trace;
};

namespace detail {

inline void validate_steps(double tau, double sigma, double l_est, bool accelerated,
                           const char* who) {
  if (tau <= 0 || sigma <= 0) throw error(std::string(who) + ": step sizes must be positive");
  const double limit = accelerated ? 1.0 + 1e-12 : 1.0;  // accelerated mode allows <= 1
  if (tau * sigma * l_est * l_est >= limit)
    throw error(std::string(who) + ": tau*sigma*L^2 = " +
                std::to_string(tau * sigma * l_est * l_est) + " violates the step-size bound");
}

// Default steps: dual-heavy sigma = 4 tau with tau sigma L^2 = 0.98; the
// dual (total-variation) block is the slowly converging part of these
// saddle problems. Accelerated runs start symmetric at 1/L.
inline StepSizes default_steps(double l_used, double omega, bool accelerated) {
  StepSizes s;
  if (accelerated) {
    s.tau = s.sigma = 1.0 / l_used;
  } else {
    s.tau = 0.99 / (2.0 * l_used);
    s.sigma = 1.98 / l_used;
  }
  s.omega = omega;
  return s;
}

inline bool gap_supported(const DataTerm& dt) {
  return !dt.indicator && dt.op == Sampling::Identity;
}

}  // namespace detail

// Full-stack energy: sum of finite-radius 2,1-terms plus the data term.
inline double stack_energy(const OperatorStack& K, const PrimalVars& z, const DataTerm& dt) {
  DualVars rows = stack_apply(K, z);
  double e = data_energy(z.z[0][0], dt);
  for (int j = 1; j <= K.q; ++j) {
    const Radius a = K.row_radius(j);
    if (!a.finite) continue;
    TensorFieldStack s(j, rows.w[std::size_t(j - 1)]);
    e += a.value * norm21(s);
  }
  return e;
}

// Fenchel gap for S = I: primal energy at z plus the conjugate data term at
// r0 = (K^T w)_0. Exact for q = 1; for q > 1 the inner dual residual blocks
// are ignored, as in the reference formulation. NaN when unsupported.
inline double pd_gap(const SolverState& st, const OperatorStack& K, const DataTerm& dt) {
  if (!detail::gap_supported(dt)) return std::numeric_limits<double>::quiet_NaN();
  for (int j = 1; j <= K.q; ++j)
    if (!K.row_radius(j).finite) return std::numeric_limits<double>::quiet_NaN();
  const double primal = stack_energy(K, st.z, dt);
  PrimalVars r = stack_apply_adjoint(K, st.w);
  const ScalarField& r0 = r.z[0][0];
  const double dual = inner_product(r0, r0) / (2.0 * dt.eta) - inner_product(r0, dt.data);
  return primal + dual;
}

struct SolveResult {
  ScalarField u;
  Diagnostics diag;
  PrimalVars z;
  DualVars w;
};

// One iteration of the Chambolle-Pock scheme in operator form:
//   w <- prox_{sigma F*}(w + sigma K zbar);  z <- prox_{tau G}(z - tau K^T w);
//   zbar <- z + omega (z - z_prev). Inner primal blocks pass through prox_G.
inline void pdhg_step(SolverState& st, const OperatorStack& K, const DataTerm& dt,
                      bool accelerated = false, double gamma = 0) {
  for (int j = 1; j <= K.q; ++j) {
    Block row = K.level_forward(j, st.zbar.z[std::size_t(j - 1)]);
    if (j < K.q) block_axpy(-1.0, st.zbar.z[std::size_t(j)], row);
    block_axpy(st.steps.sigma, row, st.w.w[std::size_t(j - 1)]);
    prox_polar_ball_inplace(st.w.w[std::size_t(j - 1)], K.row_radius(j));
  }
  PrimalVars g = stack_apply_adjoint(K, st.w);
  PrimalVars znew = st.z;
  for (std::size_t i = 0; i < znew.z.size(); ++i) block_axpy(-st.steps.tau, g.z[i], znew.z[i]);
  znew.z[0][0] = prox_data(znew.z[0][0], dt, st.steps.tau);
  if (accelerated) accelerate(st.steps, gamma);
  st.zbar = znew;
  for (std::size_t i = 0; i < znew.z.size(); ++i) {
    Block& zb = st.zbar.z[i];
    for (std::size_t k = 0; k < zb.size(); ++k) {
      axpy(st.steps.omega, znew.z[i][k], zb[k]);
      axpy(-st.steps.omega, st.z.z[i][k], zb[k]);
    }
  }
  st.z = std::move(znew);
  st.n += 1;
}

// PDHG for the single minimisation model with the bidiagonal stack K.
inline SolveResult solve(const OperatorStack& K, const DataTerm& dt, const SolveOptions& opt,
                         const PrimalVars* warm_z = nullptr, const DualVars* warm_w = nullptr) {
  if (opt.accelerated && !(detail::gap_supported(dt) && K.q == 1))
    throw error("solve: acceleration requires the strongly convex S = I, q = 1 configuration");

  const double l_analytic = operator_norm_bound(K);
  const double l_power = 1.01 * power_iteration_norm(K);
  const double l_used = std::max(l_analytic, l_power);

  SolverState st;
  st.z = warm_z ? *warm_z : K.zero_primal();
  st.w = warm_w ? *warm_w : K.zero_dual();
  st.zbar = st.z;
  st.steps = detail::default_steps(l_used, opt.omega, opt.accelerated);
  if (opt.tau > 0) st.steps.tau = opt.tau;
  if (opt.sigma > 0) st.steps.sigma = opt.sigma;
  detail::validate_steps(st.steps.tau, st.steps.sigma, l_power, opt.accelerated, "solve");
  const double gamma = opt.gamma > 0 ? opt.gamma : 0.5 * dt.eta;

  Diagnostics diag;
  double gap = std::numeric_limits<double>::quiet_NaN();
  while (st.n < opt.max_iters) {
    pdhg_step(st, K, dt, opt.accelerated, gamma);
    const bool sample = (st.n % std::max(1, opt.check_every) == 0) || st.n == opt.max_iters;
    if (sample) {
      const double e = stack_energy(K, st.z, dt);
      if (!std::isfinite(e)) throw error("solve: energy diverged (non-finite)");
      gap = pd_gap(st, K, dt);
      diag.energy_trace.push_back(e);
      diag.gap_trace.push_back(gap);
      st.gap_history.push_back(gap);
      if (opt.trace) opt.trace(st.n, e, gap);
      if (opt.gap_tol > 0 && std::isfinite(gap) && gap <= opt.gap_tol) break;
    }
  }
  diag.iterations = st.n;
  diag.final_energy = stack_energy(K, st.z, dt);
  diag.final_gap = pd_gap(st, K, dt);
  return SolveResult{st.z.z[0][0], std::move(diag), std::move(st.z), std::move(st.w)};
}

// ---- reduced (joint) model: primal is u alone, one dual block per order ----

struct ReducedProblem {
  std::vector<ReducedOperator> ops;
  std::vector<double> alpha0;  // weight per operator, same length as ops
};

struct ReducedState {
  ScalarField u, ubar;
  std::vector<TensorFieldStack> w;
  StepSizes steps;
  int n = 0;
};

inline double reduced_energy(const ReducedProblem& P, const ScalarField& u, const DataTerm& dt) {
  double e = data_energy(u, dt);
  for (std::size_t i = 0; i < P.ops.size(); ++i) e += P.alpha0[i] * norm21(P.ops[i].apply(u));
  return e;
}

inline double reduced_gap(const ReducedProblem& P, const ReducedState& st, const DataTerm& dt) {
  if (!detail::gap_supported(dt)) return std::numeric_limits<double>::quiet_NaN();
  const double primal = reduced_energy(P, st.u, dt);
  ScalarField r(st.u.grid, 0.0);
  for (std::size_t i = 0; i < P.ops.size(); ++i) axpy(1.0, P.ops[i].apply_adjoint(st.w[i]), r);
  return primal + inner_product(r, r) / (2.0 * dt.eta) - inner_product(r, dt.data);
}

struct ReducedResult {
  ScalarField u;
  Diagnostics diag;
  std::vector<TensorFieldStack> w;
};

inline ReducedResult solve_reduced(const ReducedProblem& P, const DataTerm& dt,
                                   const SolveOptions& opt, const ScalarField* warm_u = nullptr,
                                   const std::vector<TensorFieldStack>* warm_w = nullptr) {
  if (P.ops.empty() || P.ops.size() != P.alpha0.size())
    throw error("solve_reduced: operator/weight arity mismatch");
  for (double a : P.alpha0)
    if (a <= 0) throw error("solve_reduced: weights must be positive");
  if (opt.accelerated && !(detail::gap_supported(dt) && P.ops.size() == 1))
    throw error("solve_reduced: acceleration requires the strongly convex S = I, Q = 1 model");

  double l2 = 0;
  for (const auto& op : P.ops) {
    const double b = operator_norm_bound(op);
    l2 += b * b;
  }
  const double l_power = 1.01 * power_iteration_norm(P.ops);
  const double l_used = std::max(std::sqrt(l2), l_power);

  ReducedState st;
  st.u = warm_u ? *warm_u : ScalarField(P.ops.front().pixels, 0.0);
  st.ubar = st.u;
  if (warm_w) {
    st.w = *warm_w;
  } else {
    for (const auto& op : P.ops) st.w.push_back(op.zero_dual());
  }
  st.steps = detail::default_steps(l_used, opt.omega, opt.accelerated);
  if (opt.tau > 0) st.steps.tau = opt.tau;
  if (opt.sigma > 0) st.steps.sigma = opt.sigma;
  detail::validate_steps(st.steps.tau, st.steps.sigma, l_power, opt.accelerated, "solve_reduced");
  const double gamma = opt.gamma > 0 ? opt.gamma : 0.5 * dt.eta;

  Diagnostics diag;
  while (st.n < opt.max_iters) {
    for (std::size_t i = 0; i < P.ops.size(); ++i) {
      TensorFieldStack kz = P.ops[i].apply(st.ubar);
      stack_scale(kz, st.steps.sigma);
      stack_axpy(1.0, st.w[i], kz);
      prox_polar_ball_inplace(kz.c, Radius::of(P.alpha0[i]));
      st.w[i] = std::move(kz);
    }
    ScalarField r(st.u.grid, 0.0);
    for (std::size_t i = 0; i < P.ops.size(); ++i) axpy(1.0, P.ops[i].apply_adjoint(st.w[i]), r);
    ScalarField unew = st.u;
    axpy(-st.steps.tau, r, unew);
    unew = prox_data(unew, dt, st.steps.tau);
    if (opt.accelerated) accelerate(st.steps, gamma);
    st.ubar = unew;
    axpy(st.steps.omega, unew, st.ubar);
    axpy(-st.steps.omega, st.u, st.ubar);
    st.u = std::move(unew);
    st.n += 1;

    const bool sample = (st.n % std::max(1, opt.check_every) == 0) || st.n == opt.max_iters;
    if (sample) {
      const double e = reduced_energy(P, st.u, dt);
      if (!std::isfinite(e)) throw error("solve_reduced: energy diverged (non-finite)");
      const double gap = reduced_gap(P, st, dt);
      diag.energy_trace.push_back(e);
      diag.gap_trace.push_back(gap);
      if (opt.trace) opt.trace(st.n, e, gap);
      if (opt.gap_tol > 0 && std::isfinite(gap) && gap <= opt.gap_tol) break;
    }
  }
  diag.iterations = st.n;
  diag.final_energy = reduced_energy(P, st.u, dt);
  diag.final_gap = reduced_gap(P, st, dt);
  return ReducedResult{std::move(st.u), std::move(diag), std::move(st.w)};
}

}  // namespace tdv

#endif  // TDV_PDHG_HPP
