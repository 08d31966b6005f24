#pragma once

#include "vlpic/bspline.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace vlpic {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

/// Uniform periodic grid carrying B-splines of one degree on [0, L).
class SplineSpace1D {
public:
  SplineSpace1D(int cells, int degree, double length);

  int cells() const { return cells_; }
  int degree() const { return degree_; }
  double length() const { return length_; }
  double dx() const { return dx_; }
  /// Number of basis functions; equals the cell count for periodic splines.
  int dim() const { return cells_; }

  double wrap(double x) const;

private:
  int cells_;
  int degree_;
  double length_;
  double dx_;
};

/// The degree+1 splines of one degree that are active at a point.
/// Entry m belongs to global index wrap(first + m).
struct LocalBasis {
  long first = 0;
  int count = 0;
  BasisBuffer values{};
};

LocalBasis local_basis(int degree, int deriv, double x, double dx);

/// Dense patch of 1D basis weights; entry i belongs to index wrap(first + i).
struct Patch1D {
  long first = 0;
  std::vector<double> values;

  double dot(std::span<const double> coeffs) const;
  void scatter(double scale, std::span<double> target) const;
};

/// Averages of the periodic degree-`degree` splines along x0 -> x1:
/// (x1 - x0)^-1 times their integrals, exact up to rounding. Falls back to
/// point values at x0 when |x1 - x0| < degeneracy_eps * dx.
void segment_average(int degree, double dx, double x0, double x1, Patch1D& out,
                     double degeneracy_eps = 1e-10);

/// Mass matrix of periodic degree-`degree` splines, assembled with
/// `quad_points` Gauss points per cell.
Mat mass_matrix_1d(int degree, int cells, double dx, int quad_points);

/// Cyclic difference matrix (c_i - c_{i-1}) / dx: maps degree-k spline
/// coefficients to the coefficients of their derivative in degree k-1.
SpMat difference_matrix(int cells, double dx);

/// V0 (degree k) -> V1 (degree k-1) periodic complex on [0, L).
class DeRhamComplex1D {
public:
  DeRhamComplex1D(int cells, int degree, double length);

  const SplineSpace1D& space() const { return space_; }
  int n0() const { return space_.dim(); }
  int n1() const { return space_.dim(); }
  int degree0() const { return space_.degree(); }
  int degree1() const { return space_.degree() - 1; }
  double dx() const { return space_.dx(); }
  double length() const { return space_.length(); }

  const Mat& M0() const { return M0_; }
  const Mat& M1() const { return M1_; }
  const SpMat& G() const { return G_; }
  /// G^T M1 G, the stiffness matrix of V0.
  const Mat& K() const { return K_; }
  /// b_j = integral of the j-th 0-form basis function.
  const Vec& background() const { return background_; }

  const Eigen::LLT<Mat>& M0_llt() const { return M0_llt_; }
  const Eigen::LLT<Mat>& M1_llt() const { return M1_llt_; }

  LocalBasis basis0(double x, int deriv = 0) const;
  LocalBasis basis1(double x, int deriv = 0) const;

  double eval_0form(std::span<const double> coeffs, double x) const;
  double eval_0form_derivative(std::span<const double> coeffs, double x) const;
  /// Throws UnsupportedError when the 0-form degree is below 2.
  double eval_0form_second_derivative(std::span<const double> coeffs, double x) const;
  double eval_1form(std::span<const double> coeffs, double x) const;
  double eval_1form_derivative(std::span<const double> coeffs, double x) const;

  /// Dense vector of all 0-form / 1-form basis values at x.
  Vec basis0_dense(double x) const;
  Vec basis1_dense(double x) const;

  /// L2 projection onto V0 (k+2 Gauss points per cell for the load vector).
  Vec l2_project_0form(const std::function<double(double)>& f) const;

  /// Averages of the 1-form basis along the straight path x0 -> x1:
  /// v_i = (x1-x0)^-1 * integral of Lambda1_i. Positions may be unwrapped;
  /// |x1 - x0| must stay below the domain length.
  void line_average_1form(double x0, double x1, Patch1D& out,
                          double degeneracy_eps = 1e-10) const;
  Vec line_average_1form_dense(double x0, double x1, double degeneracy_eps = 1e-10) const;

private:
  SplineSpace1D space_;
  Mat M0_;
  Mat M1_;
  SpMat G_;
  Mat K_;
  Vec background_;
  Eigen::LLT<Mat> M0_llt_;
  Eigen::LLT<Mat> M1_llt_;
};

DeRhamComplex1D build_complex_1d(int cells, int degree, double length);

/// Tensor-product values of two 1D local bases; entry (m1, m2) is stored at
/// m1 * n2 + m2 and belongs to basis index wrap(first1+m1) * M2 + wrap(first2+m2).
struct TensorBasis {
  LocalBasis axis1;
  LocalBasis axis2;
};

/// Dense rectangular patch of 2D basis weights, row-major over (axis1, axis2).
struct Patch2D {
  long first1 = 0;
  long first2 = 0;
  int n1 = 0;
  int n2 = 0;
  std::vector<double> values;

  void reset(long f1, long f2, int len1, int len2);
  double dot(std::span<const double> coeffs, int cells1, int cells2) const;
  void scatter(double scale, std::span<double> target, int cells1, int cells2) const;
};

/// Per-axis spline degrees of one scalar component of a 2D space.
struct ComponentDegrees {
  int p1;
  int p2;
};

/// V0 -> V1 -> V2 tensor-product B-spline complex on a periodic rectangle,
/// plus the rotated space V1* carrying (B_x, B_y) = (d2 A_z, -d1 A_z).
/// Basis index is i = i1 * M2 + i2; vector-valued spaces stack components.
class DeRhamComplex2D {
public:
  DeRhamComplex2D(int cells1, int cells2, int degree1, int degree2, double length1,
                  double length2);

  const SplineSpace1D& axis1() const { return axis1_; }
  const SplineSpace1D& axis2() const { return axis2_; }
  int cells1() const { return axis1_.cells(); }
  int cells2() const { return axis2_.cells(); }
  /// Size of every scalar tensor-product space (M1 * M2).
  int n_scalar() const { return cells1() * cells2(); }
  int n0() const { return n_scalar(); }
  int n1() const { return 2 * n_scalar(); }
  int n2() const { return n_scalar(); }
  int n1star() const { return 2 * n_scalar(); }
  Vec2 lengths() const { return {axis1_.length(), axis2_.length()}; }
  Vec2 dx() const { return {axis1_.dx(), axis2_.dx()}; }

  ComponentDegrees degrees_v0() const { return {k1_, k2_}; }
  ComponentDegrees degrees_v1(int comp) const;
  ComponentDegrees degrees_v2() const { return {k1_ - 1, k2_ - 1}; }
  ComponentDegrees degrees_v1star(int comp) const;
  /// Sign attached to component `comp` of the V1* basis ((+Lambda*_2, -Lambda*_1)).
  static double v1star_sign(int comp) { return comp == 0 ? 1.0 : -1.0; }

  const Mat& M0() const { return M0_; }
  const Mat& M1() const { return M1_; }
  const Mat& M2() const { return M2_; }
  const Mat& M1star() const { return M1star_; }
  const SpMat& G() const { return G_; }
  const SpMat& C() const { return C_; }
  const SpMat& Gstar() const { return Gstar_; }
  /// Gstar^T M1star Gstar.
  const Mat& Kstar() const { return Kstar_; }
  /// C^T M2 C.
  const Mat& curl_curl() const { return CtM2C_; }
  const Vec& background() const { return background_; }

  const Eigen::LLT<Mat>& M0_llt() const { return M0_llt_; }
  const Eigen::LLT<Mat>& M1_llt() const { return M1_llt_; }

  TensorBasis tensor_basis(ComponentDegrees deg, Vec2 x, int d1 = 0, int d2 = 0) const;

  /// Evaluates a scalar tensor-product field of the given degrees.
  double eval_scalar(ComponentDegrees deg, std::span<const double> coeffs, Vec2 x, int d1 = 0,
                     int d2 = 0) const;

  double eval_0form(std::span<const double> coeffs, Vec2 x, int d1 = 0, int d2 = 0) const;
  Vec2 eval_1form(std::span<const double> coeffs, Vec2 x) const;
  double eval_2form(std::span<const double> coeffs, Vec2 x, int d1 = 0, int d2 = 0) const;
  /// Evaluates a V1* field as the physical vector (B_x, B_y).
  Vec2 eval_1star(std::span<const double> coeffs, Vec2 x, int d1 = 0, int d2 = 0) const;

  /// Scatters scale * basis(x) of a scalar component into `target`.
  void scatter_scalar(ComponentDegrees deg, Vec2 x, double scale, std::span<double> target) const;

  Vec l2_project_0form(const std::function<double(double, double)>& f) const;
  Vec l2_project_2form(const std::function<double(double, double)>& f) const;

  /// Line averages of both V1 components along x0 -> x1 (unwrapped positions).
  void line_average_1form(Vec2 x0, Vec2 x1, std::array<Patch2D, 2>& out,
                          double degeneracy_eps = 1e-10) const;

private:
  Vec l2_project_scalar(ComponentDegrees deg, const Eigen::LLT<Mat>& mass,
                        const std::function<double(double, double)>& f) const;

  SplineSpace1D axis1_;
  SplineSpace1D axis2_;
  int k1_;
  int k2_;
  Mat M0_, M1_, M2_, M1star_;
  SpMat G_, C_, Gstar_;
  Mat Kstar_, CtM2C_;
  Vec background_;
  Eigen::LLT<Mat> M0_llt_, M1_llt_, M2_llt_;
};

DeRhamComplex2D build_complex_2d(int cells1, int cells2, int degree1, int degree2,
                                 double length1, double length2);

} // namespace vlpic
