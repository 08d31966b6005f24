#pragma once

#include <array>
#include <span>
#include <vector>

namespace vlpic {

/// Largest spline degree supported by the fixed-size evaluation buffers.
inline constexpr int kMaxDegree = 7;

using BasisBuffer = std::array<double, kMaxDegree + 1>;

/// Position of a point on a uniform periodic grid.
struct CellLocation {
  long cell;    // unwrapped cell index, floor(x / dx)
  double local; // offset inside the cell, in [0, 1)
};

CellLocation locate(double x, double dx);

/// Wraps an index into [0, n).
inline int wrap_index(long i, int n) {
  long r = i % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

/// Values of the degree+1 uniform B-splines of `degree` that are nonzero in a
/// cell, at local coordinate `t` in [0,1). Entry m belongs to the spline whose
/// support starts at cell (c - degree + m). With `deriv` > 0 the entries are
/// the deriv-th derivatives in units of the grid (multiply by dx^-deriv).
/// Derivatives of order > degree are identically zero.
void bspline_values(int degree, int deriv, double t, std::span<double> out);

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached rule with `n` points (1 <= n <= 32).
const GaussRule& gauss_legendre(int n);

} // namespace vlpic
