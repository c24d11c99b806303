#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "tdv/wavelet.hpp"

using namespace tdv;

TEST_CASE("perfect reconstruction") {
  Rng rng(301);
  for (int size : {32, 64, 128})
    for (int levels = 1; levels <= 3; ++levels) {
      ScalarField u = oracle::random_field(pixel_grid(size, size), rng, 0, 1);
      ScalarField r = dwt_inverse(dwt_forward(u, levels));
      double num = 0, den = 0;
      for (std::size_t i = 0; i < u.v.size(); ++i) {
        num += (u.v[i] - r.v[i]) * (u.v[i] - r.v[i]);
        den += u.v[i] * u.v[i];
      }
      CHECK(std::sqrt(num / den) < 1e-9);
    }
}

TEST_CASE("vanishing moments") {
  // constant image: details ~ 0, coarse = 2^R * constant
  ScalarField c = make_field(pixel_grid(32, 32), 0.7);
  WaveletPyramid p = dwt_forward(c, 2);
  for (const auto& b : p.detail)
    for (const auto* f : {&b.lh, &b.hl, &b.hh})
      for (double x : f->v) CHECK(std::abs(x) < 1e-10);
  for (double x : p.coarse.v) CHECK(x == Catch::Approx(0.7 * 4.0).epsilon(1e-12));

  // linear ramp: single-level details ~ 0 in the interior (the symmetric
  // fold at the trailing edge breaks linearity in the last band entries)
  ScalarField ramp(pixel_grid(32, 32));
  for (int r = 0; r < 32; ++r)
    for (int cidx = 0; cidx < 32; ++cidx) ramp.at(r, cidx) = 0.01 * r + 0.02 * cidx;
  WaveletPyramid pr = dwt_forward(ramp, 1);
  for (const auto* f : {&pr.detail[0].lh, &pr.detail[0].hl, &pr.detail[0].hh})
    for (int r = 2; r + 2 < f->rows(); ++r)
      for (int cidx = 2; cidx + 2 < f->cols(); ++cidx) CHECK(std::abs(f->at(r, cidx)) < 1e-10);
}

TEST_CASE("pyramid edge cases") {
  ScalarField z = make_field(pixel_grid(16, 16), 0.0);
  WaveletPyramid p = dwt_forward(z, 2);
  for (double x : dwt_inverse(p).v) CHECK(x == 0.0);

  ScalarField imp = make_field(pixel_grid(16, 16), 0.0);
  imp.at(7, 9) = 1.0;
  ScalarField rt = dwt_inverse(dwt_forward(imp, 3));
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c)
      CHECK(rt.at(r, c) == Catch::Approx(imp.at(r, c)).margin(1e-11));

  CHECK_THROWS_AS(dwt_forward(make_field(pixel_grid(4, 4), 0.0), 3), error);
  CHECK_THROWS_AS(dwt_forward(make_field(pixel_grid(18, 18), 0.0), 2), error);

  WaveletPyramid bad = dwt_forward(z, 2);
  bad.coarse = make_field(pixel_grid(3, 3), 0.0);
  CHECK_THROWS_AS(dwt_inverse(bad), error);
}

TEST_CASE("project_ud") {
  Rng rng(303);
  ScalarField u = oracle::random_field(pixel_grid(64, 64), rng, 0, 1);
  ScalarField target = oracle::random_field(pixel_grid(16, 16), rng, 0, 4);

  ScalarField pu = project_ud(u, target, 2);
  WaveletPyramid chk = dwt_forward(pu, 2);
  for (std::size_t i = 0; i < target.v.size(); ++i)
    CHECK(chk.coarse.v[i] == Catch::Approx(target.v[i]).margin(1e-9));

  // idempotence
  ScalarField pu2 = project_ud(pu, target, 2);
  double rel = 0, den = 0;
  for (std::size_t i = 0; i < pu.v.size(); ++i) {
    rel += (pu2.v[i] - pu.v[i]) * (pu2.v[i] - pu.v[i]);
    den += pu.v[i] * pu.v[i];
  }
  CHECK(std::sqrt(rel / den) < 1e-9);

  // already-feasible input passes through
  ScalarField feas = project_ud(pu, target, 2);
  for (std::size_t i = 0; i < feas.v.size(); ++i)
    CHECK(feas.v[i] == Catch::Approx(pu.v[i]).margin(1e-9));

  // affine-projection consistency: P(a u + b v) = a P(u) + b P(v) + (1-a-b) P(0)
  ScalarField v = oracle::random_field(pixel_grid(64, 64), rng, 0, 1);
  const double a = 0.6, b = -0.9;
  ScalarField mix = scaled(u, a);
  axpy(b, v, mix);
  ScalarField lhs = project_ud(mix, target, 2);
  ScalarField rhs = scaled(project_ud(u, target, 2), a);
  axpy(b, project_ud(v, target, 2), rhs);
  axpy(1.0 - a - b, project_ud(make_field(u.grid, 0.0), target, 2), rhs);
  for (std::size_t i = 0; i < lhs.v.size(); ++i)
    CHECK(lhs.v[i] == Catch::Approx(rhs.v[i]).margin(1e-10));

  CHECK_THROWS_AS(project_ud(u, make_field(pixel_grid(5, 5), 0.0), 2), error);
}
