// Quality metrics: PSNR and SSIM against a reference field.

#ifndef TDV_METRICS_HPP
#define TDV_METRICS_HPP

#include "tdv/anisotropy.hpp"
#include "tdv/fields.hpp"

namespace tdv {

inline double dynamic_range(const ScalarField& ref) {
  double lo = 1e300, hi = -1e300;
  for (double x : ref.v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  return hi - lo;
}

// 10 log10(range^2 / MSE), range = ref max - min; identical inputs give +inf.
inline double psnr(const ScalarField& u, const ScalarField& ref) {
  check_same_shape(u, ref, "psnr");
  double mse = 0;
  for (std::size_t i = 0; i < u.v.size(); ++i) {
    const double d = u.v[i] - ref.v[i];
    mse += d * d;
  }
  mse /= double(u.v.size());
  if (mse == 0) return std::numeric_limits<double>::infinity();
  const double range = dynamic_range(ref);
  return 10.0 * std::log10(range * range / mse);
}

// Mean SSIM with an 11x11 Gaussian window (sigma = 1.5), K1 = 0.01,
// K2 = 0.03. The dynamic range is taken over both inputs so the score is
// symmetric.
inline double ssim(const ScalarField& u, const ScalarField& ref) {
  check_same_shape(u, ref, "ssim");
  double lo = 1e300, hi = -1e300;
  for (double x : ref.v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  for (double x : u.v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  const double L = hi - lo;
  const double c1 = (0.01 * L) * (0.01 * L);
  const double c2 = (0.03 * L) * (0.03 * L);
  const double sigma = 1.5;

  ScalarField uu(u.grid), rr(u.grid), ur(u.grid);
  for (std::size_t i = 0; i < u.v.size(); ++i) {
    uu.v[i] = u.v[i] * u.v[i];
    rr.v[i] = ref.v[i] * ref.v[i];
    ur.v[i] = u.v[i] * ref.v[i];
  }
  ScalarField mu = gaussian_smooth(u, sigma);
  ScalarField mr = gaussian_smooth(ref, sigma);
  ScalarField suu = gaussian_smooth(uu, sigma);
  ScalarField srr = gaussian_smooth(rr, sigma);
  ScalarField sur = gaussian_smooth(ur, sigma);

  double acc = 0;
  for (std::size_t i = 0; i < u.v.size(); ++i) {
    const double m1 = mu.v[i], m2 = mr.v[i];
    const double v1 = suu.v[i] - m1 * m1;
    const double v2 = srr.v[i] - m2 * m2;
    const double cov = sur.v[i] - m1 * m2;
    acc += ((2 * m1 * m2 + c1) * (2 * cov + c2)) /
           ((m1 * m1 + m2 * m2 + c1) * (v1 + v2 + c2));
  }
  return acc / double(u.v.size());
}

}  // namespace tdv

#endif  // TDV_METRICS_HPP
