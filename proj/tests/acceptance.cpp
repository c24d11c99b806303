// Acceptance suite: one criterion per function, one pass/fail line each.
// Run all with no arguments, or a single criterion by number.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tdv/tdv.hpp"

using namespace tdv;

namespace {

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<bool(std::string&)> run;
};

DirectionModel random_model(const GridId& centres, Rng& rng) {
  VectorField v{ScalarField(centres), ScalarField(centres)};
  for (std::size_t i = 0; i < v.x.v.size(); ++i) {
    const double a = rng.uniform(0, 2 * M_PI);
    v.x.v[i] = std::cos(a);
    v.y.v[i] = std::sin(a);
  }
  ScalarField b1(centres), b2(centres);
  for (std::size_t i = 0; i < b1.v.size(); ++i) {
    b1.v[i] = rng.uniform(0, 1);
    b2.v[i] = rng.uniform(0, 1);
  }
  return assemble_m(v, b1, b2);
}

// 1. adjointness of the full weighted stack, 200 random trials per order
bool crit_adjointness(std::string& detail) {
  Rng rng(1001);
  double worst = 0;
  for (int q = 1; q <= 3; ++q)
    for (int trial = 0; trial < 200; ++trial) {
      const int m = rng.uniform_int(4, 32), n = rng.uniform_int(4, 32);
      GridId g = pixel_grid(m, n);
      GridId cg = centre_grid(m, n);
      std::vector<LevelWeight> lw;
      std::vector<Radius> al;
      for (int j = 0; j < q; ++j) {
        lw.push_back(LevelWeight{random_model(cg, rng)});
        al.push_back(Radius::of(1.0));
      }
      OperatorStack K = build_stack(q, lw, al, g);
      PrimalVars z = K.zero_primal();
      for (auto& blk : z.z)
        for (auto& f : blk)
          for (double& x : f.v) x = rng.uniform(-1, 1);
      DualVars w = K.zero_dual();
      for (auto& blk : w.w)
        for (auto& f : blk)
          for (double& x : f.v) x = rng.uniform(-1, 1);
      DualVars kz = stack_apply(K, z);
      PrimalVars ktw = stack_apply_adjoint(K, w);
      double lhs = 0, rhs = 0, kn = 0, wn = 0;
      for (int j = 0; j < q; ++j) {
        lhs += block_dot(kz.w[std::size_t(j)], w.w[std::size_t(j)]);
        rhs += block_dot(z.z[std::size_t(j)], ktw.z[std::size_t(j)]);
        kn += block_dot(kz.w[std::size_t(j)], kz.w[std::size_t(j)]);
        wn += block_dot(w.w[std::size_t(j)], w.w[std::size_t(j)]);
      }
      worst = std::max(worst, std::abs(lhs - rhs) / (std::sqrt(kn) * std::sqrt(wn)));
    }
  detail = "worst normalised defect " + std::to_string(worst);
  return worst <= 1e-11;
}

// 2. operator-norm bounds and the classical identity values
bool crit_norm_bounds(std::string& detail) {
  GridId g = pixel_grid(16, 16, 1.0);
  OperatorStack k1 = build_stack(1, {LevelWeight{}}, {Radius::of(1)}, g);
  OperatorStack k2 =
      build_stack(2, {LevelWeight{}, LevelWeight{}}, {Radius::of(1), Radius::of(1)}, g);
  const double b1 = operator_norm_bound(k1), b2 = operator_norm_bound(k2);
  bool ok = std::abs(b1 * b1 - 8.0) < 1e-12 && std::abs(b2 * b2 - 64.0) < 1e-12;
  ok = ok && power_iteration_norm(k1) <= b1 && power_iteration_norm(k2) <= b2;

  Rng rng(1002);
  for (int trial = 0; trial < 40 && ok; ++trial) {
    const int q = rng.uniform_int(1, 3);
    const int m = rng.uniform_int(5, 14), n = rng.uniform_int(5, 14);
    GridId gr = pixel_grid(m, n);
    GridId cg = centre_grid(m, n);
    std::vector<LevelWeight> lw;
    std::vector<Radius> al;
    for (int j = 0; j < q; ++j) {
      lw.push_back(rng.uniform() < 0.3 ? LevelWeight{} : LevelWeight{random_model(cg, rng)});
      al.push_back(Radius::of(1.0));
    }
    OperatorStack K = build_stack(q, lw, al, gr);
    ok = power_iteration_norm(K) <= operator_norm_bound(K) * (1 + 1e-9);
  }
  detail = "L1^2 = " + std::to_string(b1 * b1) + ", L2^2 = " + std::to_string(b2 * b2);
  return ok;
}

// 3. joint model with identity weights matches an independent ROF loop
bool crit_rof_equivalence(std::string& detail) {
  const int n = 32;
  ScalarField clean = oracle::stripes(n, n, 1.0, 0.6, 9.0);
  ScalarField noisy = add_gaussian_noise(clean, 0.2, 2024);

  JointModelSpec spec;
  spec.a = {1.0, 0, 0};
  spec.eta = 8.0;
  spec.policy = BetaPolicy::Identity;
  spec.inner = 2000;
  DenoiseResult r = denoise_joint(noisy, spec);

  const double tau = 0.99 / (2.0 * std::sqrt(8.0)), sigma = 1.98 / std::sqrt(8.0);
  oracle::RofResult ref = oracle::rof_pdhg(noisy.v, n, n, 1.0, 8.0, 2000, tau, sigma);
  double mad = 0;
  for (std::size_t i = 0; i < ref.u.size(); ++i) mad += std::abs(ref.u[i] - r.u.v[i]);
  mad /= double(ref.u.size());
  detail = "mean absolute difference " + std::to_string(mad);
  return mad <= 1e-6;
}

// 4. accelerated schedule reaches the gap tolerance first on >= 8/10 seeds
bool crit_acceleration(std::string& detail) {
  const int n = 32;
  GridId g = pixel_grid(n, n);
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ScalarField clean = oracle::stripes(n, n, 1.0, 0.4, 7.0);
    ScalarField noisy = add_gaussian_noise(clean, 0.2, seed);
    ReducedProblem P;
    P.ops.push_back(ReducedOperator{1, g, std::nullopt});
    P.alpha0.push_back(1.0);
    DataTerm dt = identity_data(noisy, 8.0);
    SolveOptions fixed;
    fixed.max_iters = 60000;
    fixed.gap_tol = 1e-6 * n * n;
    fixed.check_every = 1;
    SolveOptions acc = fixed;
    acc.accelerated = true;
    const int it_fixed = solve_reduced(P, dt, fixed).diag.iterations;
    const int it_acc = solve_reduced(P, dt, acc).diag.iterations;
    if (it_acc < it_fixed) ++wins;
  }
  detail = std::to_string(wins) + "/10 seeds faster when accelerated";
  return wins >= 8;
}

// 5. paper PSNR windows on the procedural bamboo fixture
bool crit_bamboo_psnr(std::string& detail) {
  ScalarField clean = oracle::bamboo(253, 2018);
  ScalarField noisy = add_gaussian_noise(clean, 0.2, 99);

  JointModelSpec joint;
  joint.a = {1, 0, 1};
  joint.eta = 3.5;
  joint.policy = BetaPolicy::Fixed;
  joint.beta = 0.02;
  joint.sigma_rho = {{1.8, 2.8}, {1.0, 1.0}};
  joint.outer = 2;
  joint.inner = 500;
  const double psnr13 = psnr(denoise_joint(noisy, joint).u, clean);

  JointModelSpec first = joint;
  first.a = {1, 0, 0};
  first.eta = 0.75;
  const double psnr1 = psnr(denoise_joint(noisy, first).u, clean);

  detail = "TDV1+TDV3 PSNR " + std::to_string(psnr13) + " (target 29.20 +/- 1.0), TDV1 PSNR " +
           std::to_string(psnr1) + " (target 27.23 +/- 1.0)";
  return std::abs(psnr13 - 29.20) <= 1.0 && std::abs(psnr1 - 27.23) <= 1.0;
}

// 6. directional selectivity on aligned stripes
bool crit_directional_selectivity(std::string& detail) {
  const int n = 128;
  ScalarField clean = oracle::stripes(n, n, 1.0, 1.0, 12.0);
  ScalarField noisy = add_gaussian_noise(clean, 0.2, 7);
  const GridId cg = centre_grid(n, n);
  VectorField v{ScalarField(cg, 1.0 / std::sqrt(2.0)), ScalarField(cg, 1.0 / std::sqrt(2.0))};

  JointModelSpec dir;
  dir.a = {1, 0, 0};
  dir.eta = 3.0;
  dir.policy = BetaPolicy::Fixed;
  dir.beta = 0.0;
  dir.fixed_v = v;
  dir.inner = 500;
  JointModelSpec iso = dir;
  iso.beta = 1.0;

  const double p_dir = psnr(denoise_joint(noisy, dir).u, clean);
  const double p_iso = psnr(denoise_joint(noisy, iso).u, clean);
  detail = "aligned b=(1,0): " + std::to_string(p_dir) + " dB, isotropic b=(1,1): " +
           std::to_string(p_iso) + " dB";
  return p_dir >= p_iso + 1.0;
}

// 7. wavelet transform, projection and zoom constraint
bool crit_wavelet(std::string& detail) {
  Rng rng(1007);
  double worst_pr = 0;
  for (int size : {32, 64, 128})
    for (int levels = 1; levels <= 3; ++levels) {
      ScalarField u = oracle::random_field(pixel_grid(size, size), rng, 0, 1);
      ScalarField r = dwt_inverse(dwt_forward(u, levels));
      double num = 0, den = 0;
      for (std::size_t i = 0; i < u.v.size(); ++i) {
        num += (u.v[i] - r.v[i]) * (u.v[i] - r.v[i]);
        den += u.v[i] * u.v[i];
      }
      worst_pr = std::max(worst_pr, std::sqrt(num / den));
    }
  if (worst_pr > 1e-9) {
    detail = "reconstruction defect " + std::to_string(worst_pr);
    return false;
  }

  ScalarField u = oracle::random_field(pixel_grid(64, 64), rng, 0, 1);
  ScalarField target = oracle::random_field(pixel_grid(16, 16), rng, 0, 4);
  ScalarField pu = project_ud(u, target, 2);
  ScalarField pu2 = project_ud(pu, target, 2);
  WaveletPyramid chk = dwt_forward(pu, 2);
  double idem = 0, constr = 0;
  for (std::size_t i = 0; i < pu.v.size(); ++i) idem = std::max(idem, std::abs(pu2.v[i] - pu.v[i]));
  for (std::size_t i = 0; i < target.v.size(); ++i)
    constr = std::max(constr, std::abs(chk.coarse.v[i] - target.v[i]));
  if (idem > 1e-9 || constr > 1e-9) {
    detail = "projection idempotence " + std::to_string(idem) + ", constraint " +
             std::to_string(constr);
    return false;
  }

  // zoom keeps the coarse band
  ScalarField low = oracle::random_field(pixel_grid(16, 16), rng, 0, 4);
  ZoomSpec zs;
  zs.levels = 2;
  zs.a = {1, 0, 0};
  zs.policy = BetaPolicy::Identity;
  zs.inner = 300;
  ScalarField z = zoom_wavelet(low, zs);
  WaveletPyramid zp = dwt_forward(z, 2);
  double zdef = 0;
  for (std::size_t i = 0; i < low.v.size(); ++i)
    zdef = std::max(zdef, std::abs(zp.coarse.v[i] - low.v[i]));
  detail = "PR " + std::to_string(worst_pr) + ", zoom coarse defect " + std::to_string(zdef);
  return zdef <= 1e-6;
}

// 8. pyramid interpolation from three contour rings
bool crit_pyramid(std::string& detail) {
  const int n = 64;
  const double height = 1.0, radius = 28.0;
  ScalarField truth = oracle::pyramid(n, height, radius);
  ScalarField mask = oracle::pyramid_ring_mask(n, {9.0, 16.0, 23.0});

  SurfaceSpec spec;
  spec.alpha2 = 1.0;
  spec.alpha3 = 1.0;
  spec.eta = 100.0;
  spec.mu = 1.0;
  spec.zeta = 1.0;
  spec.outer = 10;
  spec.inner = 2000;
  spec.seed = 5;
  SurfaceResult r = interpolate_surface(truth, mask, spec);

  double apex = -1e300;
  for (double x : r.u.v) apex = std::max(apex, x);
  double mae = 0;
  for (std::size_t i = 0; i < truth.v.size(); ++i) mae += std::abs(r.u.v[i] - truth.v[i]);
  mae /= double(truth.v.size());
  detail = "apex " + std::to_string(apex) + " (truth " + std::to_string(height) + "), MAE " +
           std::to_string(mae);
  return std::abs(apex - height) <= 0.05 * height && mae < 0.02 * height;
}

// 9. spiral-sampled smooth topography reconstruction
bool crit_afm(std::string& detail) {
  const int n = 128;
  ScalarField truth = oracle::topography(n, 314159);
  SamplingSpec sp;
  sp.mode = MaskMode::Spiral;
  sp.undersampling = 0.25;
  SamplingMask sm = make_sampling_mask(sp, n, n, 11);

  SurfaceSpec spec;
  spec.alpha2 = 0.1;
  spec.alpha3 = 1.0;
  spec.eta = 10000.0;
  spec.mu = 1.0;
  spec.zeta = 1.0;
  spec.outer = 5;
  spec.inner = 1500;
  spec.seed = 3;
  SurfaceResult r = interpolate_surface(truth, sm.mask, spec);
  const double s = ssim(r.u, truth);
  detail = "SSIM " + std::to_string(s) + " at rho " + std::to_string(sm.path_length_ratio);
  return s >= 0.90;
}

// 10. proximal-map unit checks
bool crit_prox(std::string& detail) {
  Rng rng(1010);
  GridId cg = centre_grid(9, 9);

  // polar ball: feasibility and idempotence
  TensorFieldStack w(1, {oracle::random_field(cg, rng, -3, 3), oracle::random_field(cg, rng, -3, 3)});
  TensorFieldStack p = prox_polar_ball(w, Radius::of(0.8));
  TensorFieldStack pp = prox_polar_ball(p, Radius::of(0.8));
  double feas = 0, idem = 0;
  for (std::size_t i = 0; i < p.c[0].v.size(); ++i) {
    feas = std::max(feas, std::hypot(p.c[0].v[i], p.c[1].v[i]) - 0.8);
    idem = std::max(idem, std::abs(pp.c[0].v[i] - p.c[0].v[i]));
  }
  if (feas > 1e-12 || idem > 1e-14) {
    detail = "ball feasibility/idempotence defect";
    return false;
  }

  // quadratic data prox: gradient-equation residual
  GridId g = pixel_grid(8, 8);
  ScalarField mask(g, 0.0);
  for (int i = 0; i < 8; ++i) mask.at(i, (i * 3) % 8) = 1.0;
  DataTerm dt = mask_data(oracle::random_field(g, rng, 0, 1), mask, 3.0);
  ScalarField zh = oracle::random_field(g, rng);
  ScalarField z0 = prox_quadratic_data(zh, dt, 0.4);
  double qres = 0;
  for (std::size_t i = 0; i < z0.v.size(); ++i) {
    const double s = mask.v[i];
    qres = std::max(qres, std::abs(0.4 * 3.0 * s * (s * z0.v[i] - dt.data.v[i]) +
                                   (z0.v[i] - zh.v[i])));
  }
  if (qres > 1e-10) {
    detail = "quadratic prox residual " + std::to_string(qres);
    return false;
  }

  // 2x2 direction prox: optimality condition 2 zeta p (v.p - 1) + (v - vhat)/tau = 0
  double vres = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const double a = rng.uniform(0, 2 * M_PI);
    const double p1 = std::cos(a), p2 = std::sin(a);
    const double zeta = rng.uniform(0.1, 10.0), tau = rng.uniform(0.01, 2.0);
    const double h1 = rng.uniform(-2, 2), h2 = rng.uniform(-2, 2);
    const double it = 1.0 / tau;
    const double a11 = 2 * zeta * p1 * p1 + it, a12 = 2 * zeta * p1 * p2;
    const double a22 = 2 * zeta * p2 * p2 + it;
    const double b1 = 2 * zeta * p1 + it * h1, b2 = 2 * zeta * p2 + it * h2;
    const double det = a11 * a22 - a12 * a12;
    const double v1 = (a22 * b1 - a12 * b2) / det;
    const double v2 = (a11 * b2 - a12 * b1) / det;
    const double dot = v1 * p1 + v2 * p2;
    vres = std::max(vres, std::abs(2 * zeta * p1 * (dot - 1) + (v1 - h1) * it));
    vres = std::max(vres, std::abs(2 * zeta * p2 * (dot - 1) + (v2 - h2) * it));
  }
  detail = "quadratic residual " + std::to_string(qres) + ", v-prox residual " +
           std::to_string(vres);
  return vres <= 1e-10;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<Criterion> criteria = {
      {1, "weighted-stack adjointness (200 trials per order)", 30, crit_adjointness},
      {2, "operator-norm bounds (8, 64 at h=1; power iteration below)", 10, crit_norm_bounds},
      {3, "ROF equivalence against an independent solver", 20, crit_rof_equivalence},
      {4, "accelerated schedule reaches the gap tolerance first", 60, crit_acceleration},
      {5, "bamboo PSNR windows (29.20 / 27.23 +/- 1.0 dB)", 300, crit_bamboo_psnr},
      {6, "directional selectivity on aligned stripes (>= +1 dB)", 60, crit_directional_selectivity},
      {7, "CDF 9/7 reconstruction, projection, zoom constraint", 30, crit_wavelet},
      {8, "pyramid interpolation from three contour rings", 180, crit_pyramid},
      {9, "spiral-sampled topography reconstruction (SSIM >= 0.90)", 180, crit_afm},
      {10, "proximal-map unit checks", 5, crit_prox},
  };

  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);

  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    std::string detail;
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_seconds) {
      ok = false;
      detail += " [over budget " + std::to_string(c.budget_seconds) + " s]";
    }
    std::printf("[%s] criterion %2d: %s (%.1f s) -- %s\n", ok ? "PASS" : "FAIL", c.id, c.name,
                secs, detail.c_str());
    if (!ok) ++failures;
  }
  return failures;
}
