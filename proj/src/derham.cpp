#include "vlpic/derham.hpp"

#include "vlpic/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vlpic {

namespace {

void check_axis(int cells, int degree, double length, const std::string& suffix) {
  if (degree < 1 || degree > kMaxDegree)
    throw ConfigError("degree" + suffix + " must be in [1, " + std::to_string(kMaxDegree) +
                      "], got " + std::to_string(degree));
  if (cells < degree + 1)
    throw ConfigError("cells" + suffix + " must be >= degree + 1 = " +
                      std::to_string(degree + 1) + ", got " + std::to_string(cells));
  if (!(length > 0.0) || !std::isfinite(length))
    throw ConfigError("length" + suffix + " must be positive, got " + std::to_string(length));
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

SpMat kron(const SpMat& a, const SpMat& b) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (int ka = 0; ka < a.outerSize(); ++ka)
    for (SpMat::InnerIterator ia(a, ka); ia; ++ia)
      for (int kb = 0; kb < b.outerSize(); ++kb)
        for (SpMat::InnerIterator ib(b, kb); ib; ++ib)
          triplets.emplace_back(static_cast<int>(ia.row() * b.rows() + ib.row()),
                                static_cast<int>(ia.col() * b.cols() + ib.col()),
                                ia.value() * ib.value());
  SpMat out(a.rows() * b.rows(), a.cols() * b.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

SpMat identity(int n) {
  SpMat id(n, n);
  id.setIdentity();
  return id;
}

Mat block_diag(const Mat& a, const Mat& b) {
  Mat out = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

SpMat vstack(const SpMat& top, const SpMat& bottom) {
  std::vector<Eigen::Triplet<double>> t;
  for (int k = 0; k < top.outerSize(); ++k)
    for (SpMat::InnerIterator it(top, k); it; ++it)
      t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int k = 0; k < bottom.outerSize(); ++k)
    for (SpMat::InnerIterator it(bottom, k); it; ++it)
      t.emplace_back(static_cast<int>(it.row() + top.rows()), static_cast<int>(it.col()),
                     it.value());
  SpMat out(top.rows() + bottom.rows(), top.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

SpMat hstack(const SpMat& left, const SpMat& right) {
  std::vector<Eigen::Triplet<double>> t;
  for (int k = 0; k < left.outerSize(); ++k)
    for (SpMat::InnerIterator it(left, k); it; ++it)
      t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int k = 0; k < right.outerSize(); ++k)
    for (SpMat::InnerIterator it(right, k); it; ++it)
      t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col() + left.cols()),
                     it.value());
  SpMat out(left.rows(), left.cols() + right.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

Eigen::LLT<Mat> factor_spd(const Mat& m, const char* name) {
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(std::string("mass matrix ") + name + " is not positive definite");
  return llt;
}

/// Sorted breakpoints in (0, 1) where x0 + tau * (x1 - x0) crosses a knot.
void knot_crossings(double x0, double x1, double dx, std::vector<double>& taus) {
  const double delta = x1 - x0;
  if (delta == 0.0) return;
  const double lo = std::min(x0, x1);
  const double hi = std::max(x0, x1);
  const long first = static_cast<long>(std::floor(lo / dx)) + 1;
  const long last = static_cast<long>(std::ceil(hi / dx)) - 1;
  for (long m = first; m <= last; ++m) {
    const double tau = (m * dx - x0) / delta;
    if (tau > 0.0 && tau < 1.0) taus.push_back(tau);
  }
}

/// Cell of a point known to lie between the cells of two segment endpoints.
CellLocation locate_clamped(double x, double dx, long cmin, long cmax) {
  CellLocation loc = locate(x, dx);
  if (loc.cell < cmin) {
    loc.cell = cmin;
    loc.local = std::clamp(x / dx - static_cast<double>(cmin), 0.0, 1.0);
  } else if (loc.cell > cmax) {
    loc.cell = cmax;
    loc.local = std::clamp(x / dx - static_cast<double>(cmax), 0.0, 1.0);
  }
  return loc;
}

} // namespace

// ---------------------------------------------------------------------------
// 1D

SplineSpace1D::SplineSpace1D(int cells, int degree, double length)
    : cells_(cells), degree_(degree), length_(length), dx_(0.0) {
  check_axis(cells, degree, length, "");
  dx_ = length / cells;
}

double SplineSpace1D::wrap(double x) const {
  double r = std::fmod(x, length_);
  if (r < 0.0) r += length_;
  if (r >= length_) r = 0.0;
  return r;
}

LocalBasis local_basis(int degree, int deriv, double x, double dx) {
  const CellLocation loc = locate(x, dx);
  LocalBasis b;
  b.first = loc.cell - degree;
  b.count = degree + 1;
  bspline_values(degree, deriv, loc.local, b.values);
  if (deriv > 0) {
    const double scale = std::pow(dx, -deriv);
    for (int m = 0; m < b.count; ++m) b.values[m] *= scale;
  }
  return b;
}

double Patch1D::dot(std::span<const double> coeffs) const {
  const int n = static_cast<int>(coeffs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    acc += values[i] * coeffs[wrap_index(first + static_cast<long>(i), n)];
  return acc;
}

void Patch1D::scatter(double scale, std::span<double> target) const {
  const int n = static_cast<int>(target.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    target[wrap_index(first + static_cast<long>(i), n)] += scale * values[i];
}

Mat mass_matrix_1d(int degree, int cells, double dx, int quad_points) {
  const GaussRule& rule = gauss_legendre(quad_points);
  Mat m = Mat::Zero(cells, cells);
  BasisBuffer vals{};
  for (int c = 0; c < cells; ++c) {
    for (int q = 0; q < quad_points; ++q) {
      const double t = 0.5 * (rule.nodes[q] + 1.0);
      const double w = 0.5 * rule.weights[q] * dx;
      bspline_values(degree, 0, t, vals);
      for (int a = 0; a <= degree; ++a) {
        const int ia = wrap_index(c - degree + a, cells);
        for (int b = 0; b <= degree; ++b) {
          const int ib = wrap_index(c - degree + b, cells);
          m(ia, ib) += w * vals[a] * vals[b];
        }
      }
    }
  }
  return m;
}

SpMat difference_matrix(int cells, double dx) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(2 * static_cast<std::size_t>(cells));
  for (int i = 0; i < cells; ++i) {
    t.emplace_back(i, i, 1.0 / dx);
    t.emplace_back(i, wrap_index(i - 1, cells), -1.0 / dx);
  }
  SpMat d(cells, cells);
  d.setFromTriplets(t.begin(), t.end());
  return d;
}

DeRhamComplex1D::DeRhamComplex1D(int cells, int degree, double length)
    : space_(cells, degree, length) {
  const double dx = space_.dx();
  M0_ = mass_matrix_1d(degree, cells, dx, degree + 1);
  M1_ = mass_matrix_1d(degree - 1, cells, dx, degree + 1);
  G_ = difference_matrix(cells, dx);
  K_ = Mat(G_.transpose() * (M1_ * G_));
  background_ = M0_.colwise().sum().transpose();
  M0_llt_ = factor_spd(M0_, "M0");
  M1_llt_ = factor_spd(M1_, "M1");
}

DeRhamComplex1D build_complex_1d(int cells, int degree, double length) {
  return DeRhamComplex1D(cells, degree, length);
}

LocalBasis DeRhamComplex1D::basis0(double x, int deriv) const {
  return local_basis(degree0(), deriv, x, dx());
}

LocalBasis DeRhamComplex1D::basis1(double x, int deriv) const {
  return local_basis(degree1(), deriv, x, dx());
}

namespace {
double contract(const LocalBasis& b, std::span<const double> coeffs) {
  const int n = static_cast<int>(coeffs.size());
  double acc = 0.0;
  for (int m = 0; m < b.count; ++m) acc += b.values[m] * coeffs[wrap_index(b.first + m, n)];
  return acc;
}
} // namespace

double DeRhamComplex1D::eval_0form(std::span<const double> coeffs, double x) const {
  return contract(basis0(x), coeffs);
}

double DeRhamComplex1D::eval_0form_derivative(std::span<const double> coeffs, double x) const {
  return contract(basis0(x, 1), coeffs);
}

double DeRhamComplex1D::eval_0form_second_derivative(std::span<const double> coeffs,
                                                     double x) const {
  if (degree0() < 2)
    throw UnsupportedError("second derivative of a 0-form needs degree >= 2, have " +
                           std::to_string(degree0()));
  return contract(basis0(x, 2), coeffs);
}

double DeRhamComplex1D::eval_1form(std::span<const double> coeffs, double x) const {
  return contract(basis1(x), coeffs);
}

double DeRhamComplex1D::eval_1form_derivative(std::span<const double> coeffs, double x) const {
  if (degree1() < 1)
    throw UnsupportedError("derivative of a piecewise-constant 1-form is not supported");
  return contract(basis1(x, 1), coeffs);
}

Vec DeRhamComplex1D::basis0_dense(double x) const {
  Vec out = Vec::Zero(n0());
  const LocalBasis b = basis0(x);
  for (int m = 0; m < b.count; ++m) out[wrap_index(b.first + m, n0())] += b.values[m];
  return out;
}

Vec DeRhamComplex1D::basis1_dense(double x) const {
  Vec out = Vec::Zero(n1());
  const LocalBasis b = basis1(x);
  for (int m = 0; m < b.count; ++m) out[wrap_index(b.first + m, n1())] += b.values[m];
  return out;
}

Vec DeRhamComplex1D::l2_project_0form(const std::function<double(double)>& f) const {
  const int k = degree0();
  const int nq = k + 2;
  const GaussRule& rule = gauss_legendre(nq);
  const double h = dx();
  Vec rhs = Vec::Zero(n0());
  BasisBuffer vals{};
  for (int c = 0; c < space_.cells(); ++c) {
    for (int q = 0; q < nq; ++q) {
      const double t = 0.5 * (rule.nodes[q] + 1.0);
      const double w = 0.5 * rule.weights[q] * h;
      const double fx = f((c + t) * h);
      bspline_values(k, 0, t, vals);
      for (int m = 0; m <= k; ++m) rhs[wrap_index(c - k + m, n0())] += w * fx * vals[m];
    }
  }
  return M0_llt_.solve(rhs);
}

void segment_average(int degree, double dx, double x0, double x1, Patch1D& out,
                     double degeneracy_eps) {
  const int p = degree;
  const double h = dx;
  if (std::abs(x1 - x0) < degeneracy_eps * h) {
    const LocalBasis b = local_basis(p, 0, x0, h);
    out.first = b.first;
    out.values.assign(b.values.begin(), b.values.begin() + b.count);
    return;
  }
  const long c0 = locate(x0, h).cell;
  const long c1 = locate(x1, h).cell;
  const long cmin = std::min(c0, c1);
  const long cmax = std::max(c0, c1);
  out.first = cmin - p;
  out.values.assign(static_cast<std::size_t>(cmax - cmin + p + 1), 0.0);

  // Integrand is a polynomial of degree p on each piece.
  const GaussRule& rule = gauss_legendre(std::max(1, (p + 2) / 2));
  thread_local std::vector<double> taus;
  taus.clear();
  taus.push_back(0.0);
  knot_crossings(x0, x1, h, taus);
  taus.push_back(1.0);
  std::sort(taus.begin(), taus.end());

  const double delta = x1 - x0;
  BasisBuffer vals{};
  for (std::size_t s = 0; s + 1 < taus.size(); ++s) {
    const double ta = taus[s];
    const double tb = taus[s + 1];
    const double len = tb - ta;
    if (len <= 0.0) continue;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double tau = ta + 0.5 * len * (rule.nodes[q] + 1.0);
      const double w = 0.5 * len * rule.weights[q];
      const CellLocation loc = locate_clamped(x0 + tau * delta, h, cmin, cmax);
      bspline_values(p, 0, loc.local, vals);
      const long offset = loc.cell - cmin;
      for (int m = 0; m <= p; ++m) out.values[static_cast<std::size_t>(offset + m)] += w * vals[m];
    }
  }
}

void DeRhamComplex1D::line_average_1form(double x0, double x1, Patch1D& out,
                                         double degeneracy_eps) const {
  segment_average(degree1(), dx(), x0, x1, out, degeneracy_eps);
}

Vec DeRhamComplex1D::line_average_1form_dense(double x0, double x1, double degeneracy_eps) const {
  Patch1D patch;
  line_average_1form(x0, x1, patch, degeneracy_eps);
  Vec out = Vec::Zero(n1());
  patch.scatter(1.0, std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

// ---------------------------------------------------------------------------
// 2D

void Patch2D::reset(long f1, long f2, int len1, int len2) {
  first1 = f1;
  first2 = f2;
  n1 = len1;
  n2 = len2;
  values.assign(static_cast<std::size_t>(len1) * len2, 0.0);
}

double Patch2D::dot(std::span<const double> coeffs, int cells1, int cells2) const {
  double acc = 0.0;
  for (int a = 0; a < n1; ++a) {
    const int i1 = wrap_index(first1 + a, cells1);
    for (int b = 0; b < n2; ++b) {
      const int i2 = wrap_index(first2 + b, cells2);
      acc += values[static_cast<std::size_t>(a) * n2 + b] * coeffs[i1 * cells2 + i2];
    }
  }
  return acc;
}

void Patch2D::scatter(double scale, std::span<double> target, int cells1, int cells2) const {
  for (int a = 0; a < n1; ++a) {
    const int i1 = wrap_index(first1 + a, cells1);
    for (int b = 0; b < n2; ++b) {
      const int i2 = wrap_index(first2 + b, cells2);
      target[i1 * cells2 + i2] += scale * values[static_cast<std::size_t>(a) * n2 + b];
    }
  }
}

DeRhamComplex2D::DeRhamComplex2D(int cells1, int cells2, int degree1, int degree2,
                                 double length1, double length2)
    : axis1_((check_axis(cells1, degree1, length1, "[0]"), cells1), degree1, length1),
      axis2_((check_axis(cells2, degree2, length2, "[1]"), cells2), degree2, length2),
      k1_(degree1), k2_(degree2) {
  const double h1 = axis1_.dx();
  const double h2 = axis2_.dx();
  const int nq1 = k1_ + 1;
  const int nq2 = k2_ + 1;
  const Mat m1_hi = mass_matrix_1d(k1_, cells1, h1, nq1);
  const Mat m1_lo = mass_matrix_1d(k1_ - 1, cells1, h1, nq1);
  const Mat m2_hi = mass_matrix_1d(k2_, cells2, h2, nq2);
  const Mat m2_lo = mass_matrix_1d(k2_ - 1, cells2, h2, nq2);

  M0_ = kron(m1_hi, m2_hi);
  M1_ = block_diag(kron(m1_lo, m2_hi), kron(m1_hi, m2_lo));
  M2_ = kron(m1_lo, m2_lo);
  M1star_ = block_diag(kron(m1_hi, m2_lo), kron(m1_lo, m2_hi));

  const SpMat d1 = kron(difference_matrix(cells1, h1), identity(cells2));
  const SpMat d2 = kron(identity(cells1), difference_matrix(cells2, h2));
  G_ = vstack(d1, d2);
  C_ = hstack(SpMat(-d2), d1);
  Gstar_ = vstack(d2, d1);

  Kstar_ = Mat(Gstar_.transpose() * (M1star_ * Gstar_));
  CtM2C_ = Mat(C_.transpose() * (M2_ * C_));
  background_ = M0_.colwise().sum().transpose();

  M0_llt_ = factor_spd(M0_, "M0");
  M1_llt_ = factor_spd(M1_, "M1");
  M2_llt_ = factor_spd(M2_, "M2");
  factor_spd(M1star_, "M1star");
}

DeRhamComplex2D build_complex_2d(int cells1, int cells2, int degree1, int degree2,
                                 double length1, double length2) {
  return DeRhamComplex2D(cells1, cells2, degree1, degree2, length1, length2);
}

ComponentDegrees DeRhamComplex2D::degrees_v1(int comp) const {
  return comp == 0 ? ComponentDegrees{k1_ - 1, k2_} : ComponentDegrees{k1_, k2_ - 1};
}

ComponentDegrees DeRhamComplex2D::degrees_v1star(int comp) const {
  return comp == 0 ? ComponentDegrees{k1_, k2_ - 1} : ComponentDegrees{k1_ - 1, k2_};
}

TensorBasis DeRhamComplex2D::tensor_basis(ComponentDegrees deg, Vec2 x, int d1, int d2) const {
  return {local_basis(deg.p1, d1, x[0], axis1_.dx()), local_basis(deg.p2, d2, x[1], axis2_.dx())};
}

double DeRhamComplex2D::eval_scalar(ComponentDegrees deg, std::span<const double> coeffs, Vec2 x,
                                    int d1, int d2) const {
  const TensorBasis tb = tensor_basis(deg, x, d1, d2);
  const int m1 = cells1();
  const int m2 = cells2();
  double acc = 0.0;
  for (int a = 0; a < tb.axis1.count; ++a) {
    const int i1 = wrap_index(tb.axis1.first + a, m1);
    double row = 0.0;
    for (int b = 0; b < tb.axis2.count; ++b)
      row += tb.axis2.values[b] * coeffs[i1 * m2 + wrap_index(tb.axis2.first + b, m2)];
    acc += tb.axis1.values[a] * row;
  }
  return acc;
}

double DeRhamComplex2D::eval_0form(std::span<const double> coeffs, Vec2 x, int d1, int d2) const {
  return eval_scalar(degrees_v0(), coeffs, x, d1, d2);
}

Vec2 DeRhamComplex2D::eval_1form(std::span<const double> coeffs, Vec2 x) const {
  const auto n = static_cast<std::size_t>(n_scalar());
  return {eval_scalar(degrees_v1(0), coeffs.subspan(0, n), x),
          eval_scalar(degrees_v1(1), coeffs.subspan(n, n), x)};
}

double DeRhamComplex2D::eval_2form(std::span<const double> coeffs, Vec2 x, int d1, int d2) const {
  return eval_scalar(degrees_v2(), coeffs, x, d1, d2);
}

Vec2 DeRhamComplex2D::eval_1star(std::span<const double> coeffs, Vec2 x, int d1, int d2) const {
  const auto n = static_cast<std::size_t>(n_scalar());
  return {v1star_sign(0) * eval_scalar(degrees_v1star(0), coeffs.subspan(0, n), x, d1, d2),
          v1star_sign(1) * eval_scalar(degrees_v1star(1), coeffs.subspan(n, n), x, d1, d2)};
}

void DeRhamComplex2D::scatter_scalar(ComponentDegrees deg, Vec2 x, double scale,
                                     std::span<double> target) const {
  const TensorBasis tb = tensor_basis(deg, x);
  const int m1 = cells1();
  const int m2 = cells2();
  for (int a = 0; a < tb.axis1.count; ++a) {
    const int i1 = wrap_index(tb.axis1.first + a, m1);
    const double va = scale * tb.axis1.values[a];
    for (int b = 0; b < tb.axis2.count; ++b)
      target[i1 * m2 + wrap_index(tb.axis2.first + b, m2)] += va * tb.axis2.values[b];
  }
}

Vec DeRhamComplex2D::l2_project_scalar(ComponentDegrees deg, const Eigen::LLT<Mat>& mass,
                                       const std::function<double(double, double)>& f) const {
  const int nq1 = deg.p1 + 2;
  const int nq2 = deg.p2 + 2;
  const GaussRule& r1 = gauss_legendre(nq1);
  const GaussRule& r2 = gauss_legendre(nq2);
  const double h1 = axis1_.dx();
  const double h2 = axis2_.dx();
  Vec rhs = Vec::Zero(n_scalar());
  std::span<double> target(rhs.data(), static_cast<std::size_t>(rhs.size()));
  for (int c1 = 0; c1 < cells1(); ++c1)
    for (int c2 = 0; c2 < cells2(); ++c2)
      for (int q1 = 0; q1 < nq1; ++q1)
        for (int q2 = 0; q2 < nq2; ++q2) {
          const Vec2 x{(c1 + 0.5 * (r1.nodes[q1] + 1.0)) * h1,
                       (c2 + 0.5 * (r2.nodes[q2] + 1.0)) * h2};
          const double w = 0.25 * r1.weights[q1] * r2.weights[q2] * h1 * h2;
          scatter_scalar(deg, x, w * f(x[0], x[1]), target);
        }
  return mass.solve(rhs);
}

Vec DeRhamComplex2D::l2_project_0form(const std::function<double(double, double)>& f) const {
  return l2_project_scalar(degrees_v0(), M0_llt_, f);
}

Vec DeRhamComplex2D::l2_project_2form(const std::function<double(double, double)>& f) const {
  return l2_project_scalar(degrees_v2(), M2_llt_, f);
}

void DeRhamComplex2D::line_average_1form(Vec2 x0, Vec2 x1, std::array<Patch2D, 2>& out,
                                         double degeneracy_eps) const {
  const double h1 = axis1_.dx();
  const double h2 = axis2_.dx();
  const long c01 = locate(x0[0], h1).cell;
  const long c11 = locate(x1[0], h1).cell;
  const long c02 = locate(x0[1], h2).cell;
  const long c12 = locate(x1[1], h2).cell;
  const long cmin1 = std::min(c01, c11), cmax1 = std::max(c01, c11);
  const long cmin2 = std::min(c02, c12), cmax2 = std::max(c02, c12);

  for (int comp = 0; comp < 2; ++comp) {
    const ComponentDegrees deg = degrees_v1(comp);
    out[comp].reset(cmin1 - deg.p1, cmin2 - deg.p2, static_cast<int>(cmax1 - cmin1) + deg.p1 + 1,
                    static_cast<int>(cmax2 - cmin2) + deg.p2 + 1);
  }

  thread_local std::vector<double> taus;
  taus.clear();
  taus.push_back(0.0);
  const bool degenerate =
      std::abs(x1[0] - x0[0]) < degeneracy_eps * h1 && std::abs(x1[1] - x0[1]) < degeneracy_eps * h2;
  if (!degenerate) {
    knot_crossings(x0[0], x1[0], h1, taus);
    knot_crossings(x0[1], x1[1], h2, taus);
  }
  taus.push_back(1.0);
  std::sort(taus.begin(), taus.end());

  // Each component has total polynomial degree k1 + k2 - 1 along the segment.
  const GaussRule& rule =
      degenerate ? gauss_legendre(1) : gauss_legendre(std::max(1, (k1_ + k2_ + 1) / 2));
  const Vec2 delta{x1[0] - x0[0], x1[1] - x0[1]};
  BasisBuffer v1{}, v2{};
  for (std::size_t s = 0; s + 1 < taus.size(); ++s) {
    const double ta = taus[s];
    const double tb = taus[s + 1];
    const double len = tb - ta;
    if (len <= 0.0) continue;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double tau = degenerate ? 0.0 : ta + 0.5 * len * (rule.nodes[q] + 1.0);
      const double w = 0.5 * len * rule.weights[q];
      const CellLocation l1 = locate_clamped(x0[0] + tau * delta[0], h1, cmin1, cmax1);
      const CellLocation l2 = locate_clamped(x0[1] + tau * delta[1], h2, cmin2, cmax2);
      for (int comp = 0; comp < 2; ++comp) {
        const ComponentDegrees deg = degrees_v1(comp);
        bspline_values(deg.p1, 0, l1.local, v1);
        bspline_values(deg.p2, 0, l2.local, v2);
        Patch2D& patch = out[comp];
        const long o1 = l1.cell - cmin1;
        const long o2 = l2.cell - cmin2;
        for (int a = 0; a <= deg.p1; ++a) {
          const double wa = w * v1[a];
          double* row = patch.values.data() + (o1 + a) * patch.n2 + o2;
          for (int b = 0; b <= deg.p2; ++b) row[b] += wa * v2[b];
        }
      }
    }
  }
}

} // namespace vlpic
