// Two-dimensional CDF 9/7 wavelet transform via lifting, with symmetric
// (whole-sample) boundary extension, and the coarse-coefficient constraint
// projection used by wavelet zooming.

#ifndef TDV_WAVELET_HPP
#define TDV_WAVELET_HPP

#include "tdv/fields.hpp"

namespace tdv {

namespace cdf97 {

constexpr double kAlpha = -1.58613434205992;
constexpr double kBeta = -0.05298011857296;
constexpr double kGamma = 0.88291107553093;
constexpr double kDelta = 0.44350685204397;
constexpr double kZeta = 1.14960439886024;

// In-place analysis of one even-length signal: first half becomes the
// approximation, second half the detail.
inline void analysis(std::vector<double>& x) {
  const int n = int(x.size());
  const int m = n / 2;
  std::vector<double> s(m), d(m);
  for (int i = 0; i < m; ++i) {
    s[i] = x[2 * i];
    d[i] = x[2 * i + 1];
  }
  auto sref = [&](int i) { return s[i < m ? i : 2 * m - 1 - i]; };
  for (int i = 0; i < m; ++i) d[i] += kAlpha * (s[i] + sref(i + 1));
  auto dref = [&](int i) { return d[i >= 0 ? i : -i - 1]; };
  for (int i = 0; i < m; ++i) s[i] += kBeta * (dref(i - 1) + d[i]);
  for (int i = 0; i < m; ++i) d[i] += kGamma * (s[i] + sref(i + 1));
  for (int i = 0; i < m; ++i) s[i] += kDelta * (dref(i - 1) + d[i]);
  for (int i = 0; i < m; ++i) {
    x[i] = s[i] * kZeta;
    x[m + i] = d[i] / kZeta;
  }
}

inline void synthesis(std::vector<double>& x) {
  const int n = int(x.size());
  const int m = n / 2;
  std::vector<double> s(m), d(m);
  for (int i = 0; i < m; ++i) {
    s[i] = x[i] / kZeta;
    d[i] = x[m + i] * kZeta;
  }
  auto sref = [&](int i) { return s[i < m ? i : 2 * m - 1 - i]; };
  auto dref = [&](int i) { return d[i >= 0 ? i : -i - 1]; };
  for (int i = 0; i < m; ++i) s[i] -= kDelta * (dref(i - 1) + d[i]);
  for (int i = 0; i < m; ++i) d[i] -= kGamma * (s[i] + sref(i + 1));
  for (int i = 0; i < m; ++i) s[i] -= kBeta * (dref(i - 1) + d[i]);
  for (int i = 0; i < m; ++i) d[i] -= kAlpha * (s[i] + sref(i + 1));
  for (int i = 0; i < m; ++i) {
    x[2 * i] = s[i];
    x[2 * i + 1] = d[i];
  }
}

}  // namespace cdf97

struct WaveletPyramid {
  struct Band {
    ScalarField lh, hl, hh;
  };
  int levels = 1;
  int rows0 = 0, cols0 = 0;
  double h = 1.0;
  ScalarField coarse;
  std::vector<Band> detail;  // detail[0] is the finest level
};

namespace detail {

inline void check_dwt_dims(int rows, int cols, int levels) {
  if (levels < 1) throw error("dwt: levels must be >= 1");
  const int f = 1 << levels;
  if (rows < f || cols < f) throw error("dwt: input smaller than 2^levels");
  if (rows % f != 0 || cols % f != 0)
    throw error("dwt: dimensions must be divisible by 2^levels (odd sizes rejected)");
}

inline void dwt2_level(std::vector<double>& a, int rows, int cols, bool forward) {
  std::vector<double> line;
  if (forward) {
    line.resize(std::size_t(cols));
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) line[std::size_t(c)] = a[std::size_t(r) * cols + c];
      cdf97::analysis(line);
      for (int c = 0; c < cols; ++c) a[std::size_t(r) * cols + c] = line[std::size_t(c)];
    }
    line.resize(std::size_t(rows));
    for (int c = 0; c < cols; ++c) {
      for (int r = 0; r < rows; ++r) line[std::size_t(r)] = a[std::size_t(r) * cols + c];
      cdf97::analysis(line);
      for (int r = 0; r < rows; ++r) a[std::size_t(r) * cols + c] = line[std::size_t(r)];
    }
  } else {
    line.resize(std::size_t(rows));
    for (int c = 0; c < cols; ++c) {
      for (int r = 0; r < rows; ++r) line[std::size_t(r)] = a[std::size_t(r) * cols + c];
      cdf97::synthesis(line);
      for (int r = 0; r < rows; ++r) a[std::size_t(r) * cols + c] = line[std::size_t(r)];
    }
    line.resize(std::size_t(cols));
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) line[std::size_t(c)] = a[std::size_t(r) * cols + c];
      cdf97::synthesis(line);
      for (int c = 0; c < cols; ++c) a[std::size_t(r) * cols + c] = line[std::size_t(c)];
    }
  }
}

inline ScalarField take_block(const std::vector<double>& a, int stride, int r0, int c0, int rows,
                              int cols, double h) {
  ScalarField f(pixel_grid(rows, cols, h));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      f.at(r, c) = a[std::size_t(r0 + r) * stride + (c0 + c)];
  return f;
}

inline void put_block(std::vector<double>& a, int stride, int r0, int c0, const ScalarField& f) {
  for (int r = 0; r < f.rows(); ++r)
    for (int c = 0; c < f.cols(); ++c)
      a[std::size_t(r0 + r) * stride + (c0 + c)] = f.at(r, c);
}

}  // namespace detail

inline WaveletPyramid dwt_forward(const ScalarField& u, int levels) {
  detail::check_dwt_dims(u.rows(), u.cols(), levels);
  WaveletPyramid p;
  p.levels = levels;
  p.rows0 = u.rows();
  p.cols0 = u.cols();
  p.h = u.grid.h;
  std::vector<double> a = u.v;
  int rows = u.rows(), cols = u.cols();
  const int stride = u.cols();
  for (int l = 0; l < levels; ++l) {
    // gather the current LL block contiguously, transform, scatter back
    std::vector<double> blk(std::size_t(rows) * cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) blk[std::size_t(r) * cols + c] = a[std::size_t(r) * stride + c];
    detail::dwt2_level(blk, rows, cols, true);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) a[std::size_t(r) * stride + c] = blk[std::size_t(r) * cols + c];
    const int hr = rows / 2, hc = cols / 2;
    WaveletPyramid::Band band;
    band.lh = detail::take_block(a, stride, 0, hc, hr, hc, p.h);
    band.hl = detail::take_block(a, stride, hr, 0, hr, hc, p.h);
    band.hh = detail::take_block(a, stride, hr, hc, hr, hc, p.h);
    p.detail.push_back(std::move(band));
    rows = hr;
    cols = hc;
  }
  p.coarse = detail::take_block(a, stride, 0, 0, rows, cols, p.h);
  return p;
}

inline ScalarField dwt_inverse(const WaveletPyramid& p) {
  if (p.detail.size() != std::size_t(p.levels)) throw error("dwt_inverse: inconsistent pyramid");
  const int f = 1 << p.levels;
  if (p.coarse.rows() != p.rows0 / f || p.coarse.cols() != p.cols0 / f)
    throw error("dwt_inverse: coarse band size mismatch");
  std::vector<double> a(std::size_t(p.rows0) * p.cols0, 0.0);
  const int stride = p.cols0;
  detail::put_block(a, stride, 0, 0, p.coarse);
  for (int l = p.levels - 1; l >= 0; --l) {
    const int rows = p.rows0 >> l, cols = p.cols0 >> l;
    const int hr = rows / 2, hc = cols / 2;
    const auto& band = p.detail[std::size_t(l)];
    if (band.lh.rows() != hr || band.lh.cols() != hc)
      throw error("dwt_inverse: detail band size mismatch");
    detail::put_block(a, stride, 0, hc, band.lh);
    detail::put_block(a, stride, hr, 0, band.hl);
    detail::put_block(a, stride, hr, hc, band.hh);
    std::vector<double> blk(std::size_t(rows) * cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) blk[std::size_t(r) * cols + c] = a[std::size_t(r) * stride + c];
    detail::dwt2_level(blk, rows, cols, false);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) a[std::size_t(r) * stride + c] = blk[std::size_t(r) * cols + c];
  }
  ScalarField out(pixel_grid(p.rows0, p.cols0, p.h));
  out.v = std::move(a);
  return out;
}

// Projection onto U_D = {u : coarse coefficients of u equal u0_coarse}:
// transform, replace the coarse band, transform back. Idempotent.
inline ScalarField project_ud(const ScalarField& u, const ScalarField& u0_coarse, int levels) {
  WaveletPyramid p = dwt_forward(u, levels);
  if (p.coarse.rows() != u0_coarse.rows() || p.coarse.cols() != u0_coarse.cols())
    throw error("project_ud: coarse band size mismatch");
  p.coarse = u0_coarse;
  return dwt_inverse(p);
}

}  // namespace tdv

#endif  // TDV_WAVELET_HPP
