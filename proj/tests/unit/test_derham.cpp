#include "oracles.hpp"
#include "vlpic/derham.hpp"
#include "vlpic/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace vlpic;

namespace {

constexpr double kPi = std::numbers::pi;

Vec random_vec(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

std::span<const double> sp(const Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

} // namespace

TEST_CASE("difference matrix of the lowest-degree complex") {
  const DeRhamComplex1D cx(4, 1, 4.0);
  const Mat g = Mat(cx.G());
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double expect = j == i ? 1.0 : (j == (i + 3) % 4 ? -1.0 : 0.0);
      CHECK(g(i, j) == expect);
    }
}

TEST_CASE("gradient annihilates constants") {
  for (int k = 1; k <= 5; ++k) {
    const DeRhamComplex1D cx(12, k, 3.7);
    CHECK((cx.G() * Vec::Ones(12)).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((Vec(Mat(cx.G()).transpose() * Vec::Ones(12))).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("rows of M0 sum to the cell width") {
  const DeRhamComplex1D cx(8, 3, 2.0 * kPi);
  const Vec rows = cx.M0() * Vec::Ones(8);
  for (int i = 0; i < 8; ++i) CHECK(std::abs(rows[i] - 2.0 * kPi / 8.0) <= 1e-13);
  for (int i = 0; i < 8; ++i) CHECK(std::abs(cx.background()[i] - 2.0 * kPi / 8.0) <= 1e-13);
}

TEST_CASE("mass matrices agree with oversampled and independent quadrature") {
  for (int k = 1; k <= 4; ++k) {
    const int cells = 9;
    const double dx = 0.3;
    const Mat m = mass_matrix_1d(k, cells, dx, k + 1);
    const Mat m4 = mass_matrix_1d(k, cells, dx, 4 * (k + 1));
    CHECK((m - m4).lpNorm<Eigen::Infinity>() <= 1e-13);
    for (int i = 0; i < cells; ++i)
      for (int j = 0; j < cells; ++j) {
        const double ref = oracle::integrate_piecewise(
            [&](double x) {
              return oracle::periodic_spline(k, i, cells, dx, x) *
                     oracle::periodic_spline(k, j, cells, dx, x);
            },
            0.0, cells * dx, dx, 12);
        CHECK(std::abs(m(i, j) - ref) <= 1e-13);
      }
  }
}

TEST_CASE("complex evaluation matches the recursion oracle") {
  std::mt19937_64 rng(11);
  const int cells = 10, k = 3;
  const double length = 5.0;
  const DeRhamComplex1D cx(cells, k, length);
  const Vec c = random_vec(cells, rng);
  std::uniform_real_distribution<double> u(-length, 2.0 * length);
  for (int trial = 0; trial < 50; ++trial) {
    const double x = u(rng);
    double ref = 0.0, dref = 0.0;
    for (int i = 0; i < cells; ++i) {
      ref += c[i] * oracle::periodic_spline(k, i, cells, cx.dx(), x);
      dref += c[i] * oracle::periodic_spline_derivative(k, i, cells, cx.dx(), x);
    }
    CHECK(std::abs(cx.eval_0form(sp(c), x) - ref) <= 1e-13);
    CHECK(std::abs(cx.eval_0form_derivative(sp(c), x) - dref) <= 1e-12);
  }
}

TEST_CASE("constant coefficients give one with zero derivative") {
  const DeRhamComplex1D cx(16, 3, 1.0);
  const Vec ones = Vec::Ones(16);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double x = u(rng);
    CHECK(std::abs(cx.eval_0form(sp(ones), x) - 1.0) <= 1e-14);
    CHECK(std::abs(cx.eval_1form(sp(ones), x) - 1.0) <= 1e-14);
    CHECK(std::abs(cx.eval_0form_derivative(sp(ones), x)) <= 1e-12);
  }
}

TEST_CASE("derivative of a 0-form equals the 1-form of its gradient") {
  std::mt19937_64 rng(13);
  for (int k = 2; k <= 5; ++k) {
    const DeRhamComplex1D cx(20, k, 3.0);
    const Vec c = random_vec(20, rng);
    const Vec gc = cx.G() * c;
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
      const double x = u(rng);
      CHECK(std::abs(cx.eval_0form_derivative(sp(c), x) - cx.eval_1form(sp(gc), x)) <= 1e-12);
      CHECK(std::abs(cx.eval_0form_second_derivative(sp(c), x) -
                     cx.eval_1form_derivative(sp(gc), x)) <= 1e-10);
    }
  }
  const DeRhamComplex1D linear(8, 1, 1.0);
  CHECK_THROWS_AS(linear.eval_0form_second_derivative(sp(Vec::Ones(8)), 0.3), UnsupportedError);
}

TEST_CASE("L2 projection examples") {
  const DeRhamComplex1D cx(64, 3, 2.0 * kPi);
  CHECK(cx.l2_project_0form([](double) { return 0.0; }).lpNorm<Eigen::Infinity>() == 0.0);
  const Vec five = cx.l2_project_0form([](double) { return 5.0; });
  CHECK((five - 5.0 * Vec::Ones(64)).lpNorm<Eigen::Infinity>() <= 1e-13);
  const Vec c = cx.l2_project_0form([](double x) { return std::cos(x); });
  CHECK(std::abs(cx.eval_0form(sp(c), 0.0) - 1.0) <= 1e-6);

  const double k = 1.0 / std::sqrt(2.0);
  const DeRhamComplex1D fine(128, 3, 2.0 * kPi / k);
  const Vec ck = fine.l2_project_0form([&](double x) { return std::cos(k * x); });
  double err = 0.0;
  for (int s = 0; s <= 4000; ++s) {
    const double x = fine.length() * s / 4000.0;
    err = std::max(err, std::abs(fine.eval_0form(sp(ck), x) - std::cos(k * x)));
  }
  CHECK(err <= 1e-8);
}

TEST_CASE("degenerate line average reduces to point values") {
  const DeRhamComplex1D cx(10, 3, 2.0);
  const Vec v = cx.line_average_1form_dense(0.37, 0.37);
  CHECK((v - cx.basis1_dense(0.37)).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("line average satisfies the discrete fundamental theorem") {
  std::mt19937_64 rng(17);
  for (int k = 1; k <= 5; ++k) {
    const DeRhamComplex1D cx(16, k, 4.0);
    const Mat gt = Mat(cx.G()).transpose();
    std::uniform_real_distribution<double> pos(-4.0, 8.0), step(-1.5, 1.5);
    for (int trial = 0; trial < 200; ++trial) {
      const double x0 = pos(rng);
      const double x1 = x0 + step(rng);
      const Vec v = cx.line_average_1form_dense(x0, x1);
      const Vec lhs = gt * v * (x1 - x0);
      const Vec rhs = cx.basis0_dense(x1) - cx.basis0_dense(x0);
      CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() <= 1e-13);
    }
  }
}

TEST_CASE("line average across three knots matches brute-force quadrature") {
  const int cells = 12, k = 3;
  const DeRhamComplex1D cx(cells, k, 3.0);
  const double dx = cx.dx();
  const double x0 = 0.31, x1 = x0 + 3.2 * dx;
  const Vec v = cx.line_average_1form_dense(x0, x1);
  for (int i = 0; i < cells; ++i) {
    const double ref = oracle::integrate_piecewise(
                           [&](double x) { return oracle::periodic_spline(k - 1, i, cells, dx, x); },
                           x0, x1, dx, 64) /
                       (x1 - x0);
    CHECK(std::abs(v[i] - ref) <= 1e-14);
  }
}

TEST_CASE("segment averages reproduce difference quotients") {
  std::mt19937_64 rng(19);
  const DeRhamComplex1D cx(14, 4, 2.5);
  const Vec c = random_vec(14, rng);
  const Vec gc = cx.G() * c;
  std::uniform_real_distribution<double> pos(0.0, 2.5), step(-0.7, 0.7);
  Patch1D patch;
  for (int trial = 0; trial < 100; ++trial) {
    const double x0 = pos(rng), x1 = x0 + step(rng);
    segment_average(3, cx.dx(), x0, x1, patch);
    const double q = patch.dot(sp(gc));
    const double ref = (cx.eval_0form(sp(c), x1) - cx.eval_0form(sp(c), x0)) / (x1 - x0);
    CHECK(std::abs(q - ref) <= 1e-11);
  }
}

TEST_CASE("invalid 1D complexes are rejected") {
  CHECK_THROWS_AS(DeRhamComplex1D(3, 3, 1.0), ConfigError);
  CHECK_THROWS_AS(DeRhamComplex1D(8, 0, 1.0), ConfigError);
  CHECK_THROWS_AS(DeRhamComplex1D(8, 2, -1.0), ConfigError);
}

TEST_CASE("2D complex: curl of gradient vanishes") {
  const DeRhamComplex2D cx(4, 4, 2, 2, 1.0, 1.0);
  const Mat cg = Mat(cx.C()) * Mat(cx.G());
  CHECK(cg.lpNorm<Eigen::Infinity>() <= 1e-14);
  const Vec ones = Vec::Ones(cx.n0());
  CHECK((cx.Gstar() * ones).lpNorm<Eigen::Infinity>() <= 1e-14);
  CHECK((cx.G() * ones).lpNorm<Eigen::Infinity>() <= 1e-14);
  const Vec ct1 = Mat(cx.C()).transpose() * Vec::Ones(cx.n2());
  CHECK(ct1.lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("2D complex: M2 rows sum to the cell area") {
  const DeRhamComplex2D cx(6, 5, 3, 2, 2.0, 1.5);
  const Vec rows = cx.M2() * Vec::Ones(cx.n2());
  const double area = cx.dx()[0] * cx.dx()[1];
  for (int i = 0; i < cx.n2(); ++i) CHECK(std::abs(rows[i] - area) <= 1e-13);
}

TEST_CASE("2D partition of unity at random points") {
  const DeRhamComplex2D cx(7, 6, 3, 3, 2.0, 3.0);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u1(0.0, 2.0), u2(0.0, 3.0);
  const Vec ones = Vec::Ones(cx.n0());
  for (int trial = 0; trial < 100; ++trial) {
    const Vec2 x{u1(rng), u2(rng)};
    CHECK(std::abs(cx.eval_0form(sp(ones), x) - 1.0) <= 1e-14);
    CHECK(std::abs(cx.eval_2form(sp(ones), x) - 1.0) <= 1e-14);
  }
}

TEST_CASE("2D derivative exactness for G, C and Gstar") {
  const DeRhamComplex2D cx(7, 6, 3, 4, 2.0, 3.0);
  std::mt19937_64 rng(29);
  const Vec a = random_vec(cx.n0(), rng);
  const Vec e = random_vec(cx.n1(), rng);
  const Vec ga = cx.G() * a;
  const Vec ce = cx.C() * e;
  const Vec gsa = cx.Gstar() * a;
  const auto n = static_cast<std::size_t>(cx.n_scalar());
  std::uniform_real_distribution<double> u1(0.0, 2.0), u2(0.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec2 x{u1(rng), u2(rng)};
    const double d1 = cx.eval_0form(sp(a), x, 1, 0);
    const double d2 = cx.eval_0form(sp(a), x, 0, 1);
    const Vec2 grad = cx.eval_1form(sp(ga), x);
    CHECK(std::abs(grad[0] - d1) <= 1e-11);
    CHECK(std::abs(grad[1] - d2) <= 1e-11);
    const Vec2 b = cx.eval_1star(sp(gsa), x);
    CHECK(std::abs(b[0] - d2) <= 1e-11);
    CHECK(std::abs(b[1] + d1) <= 1e-11);
    const double curl = cx.eval_scalar(cx.degrees_v1(1), sp(e).subspan(n, n), x, 1, 0) -
                        cx.eval_scalar(cx.degrees_v1(0), sp(e).subspan(0, n), x, 0, 1);
    CHECK(std::abs(cx.eval_2form(sp(ce), x) - curl) <= 1e-11);
  }
}

TEST_CASE("2D line average satisfies the discrete fundamental theorem") {
  const DeRhamComplex2D cx(8, 7, 3, 2, 2.0, 1.75);
  const Mat gt = Mat(cx.G()).transpose();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> pos(-1.0, 3.0), step(-0.6, 0.6);
  std::array<Patch2D, 2> patch;
  const auto n = static_cast<std::size_t>(cx.n_scalar());
  auto dense0 = [&](const Vec2& x) {
    Vec v = Vec::Zero(cx.n0());
    cx.scatter_scalar(cx.degrees_v0(), x, 1.0, {v.data(), n});
    return v;
  };
  for (int trial = 0; trial < 200; ++trial) {
    const Vec2 x0{pos(rng), pos(rng)};
    const Vec2 x1{x0[0] + step(rng), x0[1] + (trial % 5 == 0 ? 0.0 : step(rng))};
    cx.line_average_1form(x0, x1, patch);
    Vec flux = Vec::Zero(cx.n1());
    std::span<double> fs{flux.data(), 2 * n};
    patch[0].scatter(x1[0] - x0[0], fs.subspan(0, n), cx.cells1(), cx.cells2());
    patch[1].scatter(x1[1] - x0[1], fs.subspan(n, n), cx.cells1(), cx.cells2());
    const Vec lhs = gt * flux;
    const Vec rhs = dense0(x1) - dense0(x0);
    CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() <= 1e-13);
  }
}
