// Staggered-grid geometry and dense field containers.
//
// Three lattice families are used throughout: the MxN pixel grid, the
// (M-1)x(N-1) cell-centre grid carrying directions and weights, and the
// derivative grids of order j (one per multi-index iota in {1,2}^j, all
// stored as MxN arrays offset by half steps).

#ifndef TDV_FIELDS_HPP
#define TDV_FIELDS_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tdv {

class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class GridKind : std::uint8_t { Pixels, CellCentres, Derivative };

// Identifies one staggered lattice. `m`, `n` are always the pixel-grid
// dimensions the lattice derives from; cell centres are (m-1)x(n-1) and
// every derivative grid is m x n. The multi-index iota is packed into
// `index` with iota_1 as the most significant bit (iota_s = 1 -> bit 0),
// so components of a stack enumerate iota in lexicographic order.
struct GridId {
  GridKind kind = GridKind::Pixels;
  int order = 0;
  unsigned index = 0;
  int m = 0;
  int n = 0;
  double h = 1.0;

  int rows() const { return kind == GridKind::CellCentres ? m - 1 : m; }
  int cols() const { return kind == GridKind::CellCentres ? n - 1 : n; }
  std::size_t size() const { return std::size_t(rows()) * std::size_t(cols()); }

  // Number of partial derivatives taken along each axis.
  int count_axis1() const { return order - count_axis2(); }
  int count_axis2() const { return std::popcount(index); }

  // iota_s for s = 1..order.
  int iota(int s) const { return int((index >> unsigned(order - s)) & 1u) + 1; }

  bool same_shape(const GridId& o) const {
    return rows() == o.rows() && cols() == o.cols();
  }
  bool operator==(const GridId& o) const {
    return kind == o.kind && order == o.order && index == o.index && m == o.m &&
           n == o.n && h == o.h;
  }
};

inline GridId pixel_grid(int m, int n, double h = 1.0) {
  if (m <= 0 || n <= 0) throw error("pixel_grid: dimensions must be positive");
  if (h <= 0) throw error("pixel_grid: spacing must be positive");
  return {GridKind::Pixels, 0, 0, m, n, h};
}

inline GridId centre_grid(int m, int n, double h = 1.0) {
  if (m <= 1 || n <= 1) throw error("centre_grid: needs at least 2x2 pixels");
  if (h <= 0) throw error("centre_grid: spacing must be positive");
  return {GridKind::CellCentres, 0, 0, m, n, h};
}

inline GridId derivative_grid(int m, int n, int order, unsigned index, double h = 1.0) {
  if (m <= 0 || n <= 0) throw error("derivative_grid: dimensions must be positive");
  if (order < 1) throw error("derivative_grid: order must be >= 1");
  if (index >= (1u << unsigned(order))) throw error("derivative_grid: index out of range");
  return {GridKind::Derivative, order, index, m, n, h};
}

// Dense row-major scalar samples on one grid.
struct ScalarField {
  GridId grid;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(const GridId& g, double fill = 0.0)
      : grid(g), v(g.size(), fill) {}

  int rows() const { return grid.rows(); }
  int cols() const { return grid.cols(); }
  std::size_t size() const { return v.size(); }

  double& at(int r, int c) { return v[std::size_t(r) * cols() + c]; }
  double at(int r, int c) const { return v[std::size_t(r) * cols() + c]; }
};

inline ScalarField make_field(const GridId& grid, double fill) {
  if (grid.rows() <= 0 || grid.cols() <= 0)
    throw error("make_field: invalid grid dimensions");
  return ScalarField(grid, fill);
}

inline void check_same_shape(const ScalarField& a, const ScalarField& b, const char* who) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw error(std::string(who) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                std::to_string(b.cols()));
}

inline double inner_product(const ScalarField& a, const ScalarField& b) {
  check_same_shape(a, b, "inner_product");
  double s = 0;
  for (std::size_t i = 0; i < a.v.size(); ++i) s += a.v[i] * b.v[i];
  return s;
}

// Ordered stack of 2^order components representing a discrete j-tensor
// field; component k holds the multi-index with packed value k.
struct TensorFieldStack {
  int order = 1;
  std::vector<ScalarField> c;

  TensorFieldStack() = default;
  TensorFieldStack(int order_, std::vector<ScalarField> comps)
      : order(order_), c(std::move(comps)) {
    validate();
  }

  void validate() const {
    if (order < 1) throw error("TensorFieldStack: order must be >= 1");
    if (c.size() != (std::size_t(1) << unsigned(order)))
      throw error("TensorFieldStack: expected " +
                  std::to_string(std::size_t(1) << unsigned(order)) + " components, got " +
                  std::to_string(c.size()));
    for (const auto& f : c) check_same_shape(f, c.front(), "TensorFieldStack");
  }

  int rows() const { return c.front().rows(); }
  int cols() const { return c.front().cols(); }
};

inline double inner_product(const TensorFieldStack& a, const TensorFieldStack& b) {
  if (a.order != b.order || a.c.size() != b.c.size())
    throw error("inner_product: stack arity mismatch");
  double s = 0;
  for (std::size_t k = 0; k < a.c.size(); ++k) s += inner_product(a.c[k], b.c[k]);
  return s;
}

// Pointwise Euclidean norm across components, summed over the grid.
inline double norm21(const TensorFieldStack& s) {
  if (s.c.empty()) throw error("norm21: empty stack");
  double total = 0;
  const std::size_t npts = s.c.front().v.size();
  for (std::size_t i = 0; i < npts; ++i) {
    double q = 0;
    for (const auto& f : s.c) q += f.v[i] * f.v[i];
    total += std::sqrt(q);
  }
  return total;
}

// ---- elementwise helpers shared by the operators and the solver ----

inline void fill(ScalarField& f, double value) {
  std::fill(f.v.begin(), f.v.end(), value);
}

inline void axpy(double a, const ScalarField& x, ScalarField& y) {
  check_same_shape(x, y, "axpy");
  for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] += a * x.v[i];
}

inline void scale(ScalarField& f, double a) {
  for (double& x : f.v) x *= a;
}

inline ScalarField scaled(const ScalarField& f, double a) {
  ScalarField out = f;
  scale(out, a);
  return out;
}

inline void stack_axpy(double a, const TensorFieldStack& x, TensorFieldStack& y) {
  if (x.c.size() != y.c.size()) throw error("stack_axpy: arity mismatch");
  for (std::size_t k = 0; k < y.c.size(); ++k) axpy(a, x.c[k], y.c[k]);
}

inline void stack_scale(TensorFieldStack& s, double a) {
  for (auto& f : s.c) scale(f, a);
}

inline bool all_finite(const ScalarField& f) {
  for (double x : f.v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline bool all_finite(const TensorFieldStack& s) {
  for (const auto& f : s.c)
    if (!all_finite(f)) return false;
  return true;
}

}  // namespace tdv

#endif  // TDV_FIELDS_HPP
