#include "vlpic/bspline.hpp"

#include <cassert>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vlpic {

CellLocation locate(double x, double dx) {
  const double u = x / dx;
  double c = std::floor(u);
  double t = u - c;
  // u slightly below an integer can round t up to exactly 1.
  if (t >= 1.0) {
    c += 1.0;
    t = 0.0;
  }
  return {static_cast<long>(c), t};
}

void bspline_values(int degree, int deriv, double t, std::span<double> out) {
  assert(degree >= 0 && degree <= kMaxDegree);
  assert(out.size() >= static_cast<std::size_t>(degree + 1));
  for (int m = 0; m <= degree; ++m) out[m] = 0.0;
  if (deriv > degree) return;

  // Cox-de Boor on uniform knots, raising the degree up to degree - deriv:
  // b_p[m] = ((t+p-m) b_{p-1}[m-1] + (m+1-t) b_{p-1}[m]) / p.
  BasisBuffer b{};
  b[0] = 1.0;
  const int base = degree - deriv;
  for (int p = 1; p <= base; ++p) {
    BasisBuffer next{};
    for (int m = 0; m <= p; ++m) {
      const double left = m >= 1 ? (t + p - m) * b[m - 1] : 0.0;
      const double right = m <= p - 1 ? (m + 1 - t) * b[m] : 0.0;
      next[m] = (left + right) / p;
    }
    b = next;
  }
  // d/dx N^q_j = (N^{q-1}_j - N^{q-1}_{j+1}) / dx, applied deriv times.
  for (int q = base + 1; q <= degree; ++q) {
    BasisBuffer next{};
    for (int m = 0; m <= q; ++m) {
      const double lo = m >= 1 ? b[m - 1] : 0.0;
      const double hi = m <= q - 1 ? b[m] : 0.0;
      next[m] = lo - hi;
    }
    b = next;
  }
  for (int m = 0; m <= degree; ++m) out[m] = b[m];
}

namespace {

GaussRule make_rule(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0;
    double p1 = 0.0;
    for (int j = 0; j < n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

} // namespace

const GaussRule& gauss_legendre(int n) {
  static const std::vector<GaussRule> rules = [] {
    std::vector<GaussRule> r;
    r.reserve(33);
    r.emplace_back();
    for (int i = 1; i <= 32; ++i) r.push_back(make_rule(i));
    return r;
  }();
  if (n < 1 || n > 32) throw std::out_of_range("gauss_legendre: unsupported point count");
  return rules[n];
}

} // namespace vlpic
