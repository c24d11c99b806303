// Noise synthesis and sampling-mask generation for the reconstruction
// pipelines: dense masks, quantised contour lines, random points, and the
// probe-path spirals used for AFM-style scans.

#ifndef TDV_SYNTH_HPP
#define TDV_SYNTH_HPP

#include <optional>

#include "tdv/fields.hpp"
#include "tdv/rng.hpp"

namespace tdv {

// u + level * range(u) * N(0,1), seeded and deterministic.
inline ScalarField add_gaussian_noise(const ScalarField& u, double level, std::uint64_t seed) {
  if (level < 0) throw error("add_gaussian_noise: level must be >= 0");
  if (level == 0) return u;
  double lo = 1e300, hi = -1e300;
  for (double x : u.v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  const double s = level * (hi - lo);
  Rng rng(seed);
  ScalarField out = u;
  for (double& x : out.v) x += s * rng.normal();
  return out;
}

enum class MaskMode { Full, Random, Contours, Spiral };

struct SamplingSpec {
  MaskMode mode = MaskMode::Random;
  double density = 0.07;        // target fraction of sampled pixels
  double undersampling = 0.1;   // spiral path-length ratio rho = L / (2 |Omega|)
  int contour_levels = 12;      // initial level count before density tuning
};

namespace detail {

inline std::size_t count_nonzero(const ScalarField& m) {
  std::size_t k = 0;
  for (double x : m.v) k += (x != 0);
  return k;
}

// Mark pixels where the quantised reference crosses a level boundary.
inline ScalarField contour_mask(const ScalarField& ref, int nlevels) {
  ScalarField m(ref.grid, 0.0);
  double lo = 1e300, hi = -1e300;
  for (double x : ref.v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (hi <= lo) return m;
  auto level = [&](double x) {
    int q = int(std::floor((x - lo) / (hi - lo) * nlevels));
    return std::min(q, nlevels - 1);
  };
  const int R = ref.rows(), C = ref.cols();
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) {
      const int q = level(ref.at(r, c));
      if ((r + 1 < R && level(ref.at(r + 1, c)) != q) ||
          (c + 1 < C && level(ref.at(r, c + 1)) != q))
        m.at(r, c) = 1.0;
    }
  return m;
}

// Rasterise an Archimedean spiral of the given pitch from the image centre;
// returns the in-domain path length and marks visited pixels.
inline double rasterise_spiral(ScalarField& m, double pitch) {
  const int R = m.rows(), C = m.cols();
  const double cr = 0.5 * (R - 1), cc = 0.5 * (C - 1);
  const double rmax = 0.5 * std::sqrt(double(R) * R + double(C) * C);
  const double b = pitch / (2.0 * 3.14159265358979323846);
  double theta = 0, length = 0;
  double pr = cr, pc = cc;
  while (b * theta <= rmax) {
    const double rad = b * theta;
    const double step = 0.5 / std::max(1.0, rad);  // ~0.5 px arc increments
    theta += step;
    const double nr = cr + b * theta * std::sin(theta);
    const double nc = cc + b * theta * std::cos(theta);
    const bool inside = nr >= 0 && nr <= R - 1 && nc >= 0 && nc <= C - 1;
    if (inside) {
      length += std::hypot(nr - pr, nc - pc);
      m.at(int(std::lround(nr)), int(std::lround(nc))) = 1.0;
    }
    pr = nr;
    pc = nc;
  }
  return length;
}

}  // namespace detail

struct SamplingMask {
  ScalarField mask;
  double achieved_density = 0;
  double path_length_ratio = 0;  // spirals only
};

inline SamplingMask make_sampling_mask(const SamplingSpec& spec, int rows, int cols,
                                       std::uint64_t seed,
                                       const ScalarField* reference = nullptr) {
  if (rows <= 0 || cols <= 0) throw error("make_sampling_mask: invalid shape");
  if (spec.mode != MaskMode::Spiral && (spec.density <= 0 || spec.density > 1))
    throw error("make_sampling_mask: density must lie in (0, 1]");
  const GridId g = pixel_grid(rows, cols);
  const std::size_t total = g.size();
  SamplingMask out{ScalarField(g, 0.0), 0, 0};
  Rng rng(seed);

  switch (spec.mode) {
    case MaskMode::Full:
      fill(out.mask, 1.0);
      break;
    case MaskMode::Random: {
      const std::size_t want = std::max<std::size_t>(1, std::size_t(spec.density * total + 0.5));
      std::size_t placed = 0;
      while (placed < want) {
        const std::size_t i = std::size_t(rng.uniform() * total);
        if (out.mask.v[i] == 0) {
          out.mask.v[i] = 1.0;
          ++placed;
        }
      }
      break;
    }
    case MaskMode::Contours: {
      if (!reference) throw error("make_sampling_mask: contour mode needs a reference field");
      const std::size_t want = std::max<std::size_t>(1, std::size_t(spec.density * total + 0.5));
      // grow/shrink the number of iso-levels, then trim or top up to the target
      int nlevels = std::max(2, spec.contour_levels);
      ScalarField cand = detail::contour_mask(*reference, nlevels);
      for (int it = 0; it < 32 && detail::count_nonzero(cand) < want && nlevels < 4096; ++it) {
        nlevels *= 2;
        cand = detail::contour_mask(*reference, nlevels);
      }
      std::size_t have = detail::count_nonzero(cand);
      while (have > want) {  // drop random marked pixels
        const std::size_t i = std::size_t(rng.uniform() * total);
        if (cand.v[i] != 0) {
          cand.v[i] = 0;
          --have;
        }
      }
      while (have < want) {  // isolated random points
        const std::size_t i = std::size_t(rng.uniform() * total);
        if (cand.v[i] == 0) {
          cand.v[i] = 1.0;
          ++have;
        }
      }
      out.mask = std::move(cand);
      break;
    }
    case MaskMode::Spiral: {
      if (spec.undersampling <= 0) throw error("make_sampling_mask: spiral needs rho > 0");
      const double target = spec.undersampling * 2.0 * double(total);
      double lo = 0.05, hi = double(std::max(rows, cols));
      ScalarField best(g, 0.0);
      double best_len = 0;
      for (int it = 0; it < 40; ++it) {
        const double pitch = 0.5 * (lo + hi);
        ScalarField m(g, 0.0);
        const double len = detail::rasterise_spiral(m, pitch);
        if (std::abs(len - target) < std::abs(best_len - target)) {
          best = m;
          best_len = len;
        }
        if (len > target)
          lo = pitch;  // longer than wanted -> widen the pitch
        else
          hi = pitch;
      }
      out.mask = std::move(best);
      out.path_length_ratio = best_len / (2.0 * double(total));
      break;
    }
  }
  out.achieved_density = double(detail::count_nonzero(out.mask)) / double(total);
  if (out.achieved_density == 0) throw error("make_sampling_mask: produced an empty mask");
  return out;
}

}  // namespace tdv

#endif  // TDV_SYNTH_HPP
