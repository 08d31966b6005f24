#include "vlpic/solver2d.hpp"

#include "vlpic/errors.hpp"
#include "vlpic/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace vlpic {

namespace {

double max_abs(const Vec& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

Vec2 position(const ParticleEnsemble& ens, std::size_t a) { return {ens.X[2 * a], ens.X[2 * a + 1]}; }
Vec2 momentum(const ParticleEnsemble& ens, std::size_t a) { return {ens.P[2 * a], ens.P[2 * a + 1]}; }

double max_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

} // namespace

State2D make_state_2d(std::shared_ptr<const DeRhamComplex2D> complex, double hbar) {
  State2D st;
  st.ensemble.dim = 2;
  st.fields.e_xy = Vec::Zero(complex->n1());
  st.fields.b_z = Vec::Zero(complex->n2());
  st.fields.e_z = Vec::Zero(complex->n0());
  st.fields.a_z = Vec::Zero(complex->n0());
  st.complex = std::move(complex);
  st.hbar = hbar;
  return st;
}

double gamma_2d(const Vec2& p, double az_sq) {
  return std::sqrt(1.0 + p[0] * p[0] + p[1] * p[1] + az_sq);
}

namespace {

// (c[i1, i2] - c[i1 - 1, i2]) / h along axis 0, likewise along axis 1.
Vec axis_difference(const Vec& c, int m1, int m2, int axis, double h) {
  Vec d(c.size());
  for (int i1 = 0; i1 < m1; ++i1)
    for (int i2 = 0; i2 < m2; ++i2) {
      const int prev = axis == 0 ? wrap_index(i1 - 1, m1) * m2 + i2
                                 : i1 * m2 + wrap_index(i2 - 1, m2);
      d[i1 * m2 + i2] = (c[i1 * m2 + i2] - c[prev]) / h;
    }
  return d;
}

} // namespace

MagneticField2D::MagneticField2D(const DeRhamComplex2D& complex, const Vec& a_z, const Vec& b_z)
    : complex_(&complex), a_z_(a_z), bstar_(complex.Gstar() * a_z), b_z_(b_z) {
  const int m1 = complex.cells1();
  const int m2 = complex.cells2();
  const Vec2 h = complex.dx();
  const Eigen::Index n = complex.n_scalar();
  const std::array<Vec, 4> coeffs{a_z_, DeRhamComplex2D::v1star_sign(0) * bstar_.head(n),
                                  DeRhamComplex2D::v1star_sign(1) * bstar_.tail(n), b_z_};
  const std::array<ComponentDegrees, 4> degs{complex.degrees_v0(), complex.degrees_v1star(0),
                                             complex.degrees_v1star(1), complex.degrees_v2()};
  for (int f = 0; f < 4; ++f) {
    comps_[f].deg = degs[f];
    for (int axis = 0; axis < 2; ++axis)
      comps_[f].diff[axis] = axis_difference(coeffs[f], m1, m2, axis, h[axis]);
  }
}

double MagneticField2D::component_quotient(const Component& c, const Vec2& from, const Vec2& to,
                                           int axis, double eps) const {
  const int m1 = complex_->cells1();
  const int m2 = complex_->cells2();
  const Vec2 h = complex_->dx();
  const int other = 1 - axis;
  const int p_axis = axis == 0 ? c.deg.p1 : c.deg.p2;
  const int p_other = axis == 0 ? c.deg.p2 : c.deg.p1;
  thread_local Patch1D avg;
  segment_average(p_axis - 1, h[axis], from[axis], to[axis], avg, eps);
  const LocalBasis pt = local_basis(p_other, 0, from[other], h[other]);
  const Vec& d = c.diff[axis];
  double acc = 0.0;
  for (std::size_t a = 0; a < avg.values.size(); ++a) {
    const int ia = wrap_index(avg.first + static_cast<long>(a), axis == 0 ? m1 : m2);
    double row = 0.0;
    for (int b = 0; b < pt.count; ++b) {
      const int ib = wrap_index(pt.first + b, axis == 0 ? m2 : m1);
      row += pt.values[b] * d[axis == 0 ? ia * m2 + ib : ib * m2 + ia];
    }
    acc += avg.values[a] * row;
  }
  return acc;
}

MagneticField2D::Sample MagneticField2D::quotient(const Vec2& from, const Vec2& to, int axis,
                                                  double eps) const {
  if (std::abs(to[axis] - from[axis]) < eps * complex_->dx()[axis]) {
    const Vec2 mid{0.5 * (from[0] + to[0]), 0.5 * (from[1] + to[1])};
    return derivative(mid, axis);
  }
  return {component_quotient(comps_[0], from, to, axis, eps),
          {component_quotient(comps_[1], from, to, axis, eps),
           component_quotient(comps_[2], from, to, axis, eps),
           component_quotient(comps_[3], from, to, axis, eps)}};
}

MagneticField2D::Sample MagneticField2D::at(const Vec2& x) const {
  const Vec2 bxy = complex_->eval_1star(as_span(bstar_), x);
  return {complex_->eval_0form(as_span(a_z_), x),
          {bxy[0], bxy[1], complex_->eval_2form(as_span(b_z_), x)}};
}

MagneticField2D::Sample MagneticField2D::derivative(const Vec2& x, int axis) const {
  const int d1 = axis == 0 ? 1 : 0;
  const int d2 = axis == 0 ? 0 : 1;
  const Vec2 bxy = complex_->eval_1star(as_span(bstar_), x, d1, d2);
  return {complex_->eval_0form(as_span(a_z_), x, d1, d2),
          {bxy[0], bxy[1], complex_->eval_2form(as_span(b_z_), x, d1, d2)}};
}

double particle_energy_2d(const Vec2& x, const Vec2& p, const MagneticField2D& field,
                          const Vec3& spin, double hbar) {
  const auto f = field.at(x);
  return gamma_2d(p, f.a_z * f.a_z) - 1.0 +
         hbar * (spin[0] * f.b[0] + spin[1] * f.b[1] + spin[2] * f.b[2]);
}

Vec2 dg_kinetic_x_2d(const Vec2& x_n, const Vec2& x_np1, const Vec2& p_n,
                     const MagneticField2D& field, const Vec3& spin, double hbar,
                     double degeneracy_eps) {
  const Vec2 corner{x_n[0], x_np1[1]};
  const auto f0 = field.at(x_n);
  const auto f1 = field.at(x_np1);
  const auto q1 = field.quotient(corner, x_np1, 0, degeneracy_eps);
  const auto q2 = field.quotient(x_n, corner, 1, degeneracy_eps);

  const double g1 = gamma_2d(p_n, f1.a_z * f1.a_z);
  const double g0 = gamma_2d(p_n, f0.a_z * f0.a_z);
  const double c = (f1.a_z + f0.a_z) / (g1 + g0);
  auto zeeman = [&](const MagneticField2D::Sample& q) {
    return hbar * (spin[0] * q.b[0] + spin[1] * q.b[1] + spin[2] * q.b[2]);
  };
  return {c * q1.a_z + zeeman(q1), c * q2.a_z + zeeman(q2)};
}

Solver2D::Solver2D(std::shared_ptr<const DeRhamComplex2D> complex, SolverParams params)
    : complex_(std::move(complex)), params_(params) {
  validate(params_);
  const ComponentDegrees deg = complex_->degrees_v0();
  if (deg.p1 < 2 || deg.p2 < 2)
    throw ConfigError("grid.degree must be >= 2 for the 2D model");
}

const Eigen::LLT<Mat>& Solver2D::wave_operator(double dt) {
  auto it = wave_llt_.find(dt);
  if (it == wave_llt_.end()) {
    const Mat lhs = complex_->M0() + 0.25 * dt * dt * complex_->Kstar();
    it = wave_llt_.emplace(dt, Eigen::LLT<Mat>(lhs)).first;
  }
  return it->second;
}

const Eigen::LLT<Mat>& Solver2D::maxwell_operator(double dt) {
  auto it = maxwell_llt_.find(dt);
  if (it == maxwell_llt_.end()) {
    const Mat lhs = complex_->M1() + 0.25 * dt * dt * complex_->curl_curl();
    it = maxwell_llt_.emplace(dt, Eigen::LLT<Mat>(lhs)).first;
  }
  return it->second;
}

StepStats Solver2D::subsystem1(State2D& state, double dt) {
  if (dt == 0.0) return {};
  const DeRhamComplex2D& cx = *complex_;
  ParticleEnsemble& ens = state.ensemble;
  const std::size_t np = ens.size();
  const double hbar = state.hbar;
  const double eps = params_.degeneracy_eps;
  const int m1 = cx.cells1();
  const int m2 = cx.cells2();
  const auto ns = static_cast<std::size_t>(cx.n_scalar());
  const MagneticField2D field(cx, state.fields.a_z, state.fields.b_z);

  const std::vector<double> x0 = ens.X;
  const std::vector<double> p0 = ens.P;
  std::vector<double> x1 = x0;
  std::vector<double> p1 = p0;
  const Vec& e0 = state.fields.e_xy;

  std::vector<std::array<Patch2D, 2>> path(np);
  BlockDeposit current(np, static_cast<std::size_t>(cx.n1()));
  Vec j = Vec::Zero(cx.n1());

  auto field_update = [&]() -> Vec {
    current.clear();
    run_blocks(np, params_.workers, [&](std::size_t b, std::size_t begin, std::size_t end) {
      std::span<double> buf = current.buffer(b);
      for (std::size_t a = begin; a < end; ++a) {
        const Vec2 xa{x0[2 * a], x0[2 * a + 1]};
        const Vec2 xb{x1[2 * a], x1[2 * a + 1]};
        cx.line_average_1form(xa, xb, path[a], eps);
        for (int c = 0; c < 2; ++c)
          path[a][c].scatter(ens.W[a] * (xb[c] - xa[c]), buf.subspan(c * ns, ns), m1, m2);
      }
    });
    current.reduce(as_span(j));
    return e0 - cx.M1_llt().solve(j);
  };

  const std::size_t nblocks = block_count(np);
  std::vector<double> res_x(nblocks), res_p(nblocks), p_mag(nblocks);
  const Vec2 lengths = cx.lengths();
  Vec e1 = e0;
  double residual = 0.0;
  for (int iter = 1; iter <= params_.max_iter; ++iter) {
    const Vec e_next = field_update();
    const Vec e_mid = 0.5 * (e0 + e_next);
    const std::span<const double> e_mid_x = as_span(e_mid).subspan(0, ns);
    const std::span<const double> e_mid_y = as_span(e_mid).subspan(ns, ns);
    std::fill(res_x.begin(), res_x.end(), 0.0);
    std::fill(res_p.begin(), res_p.end(), 0.0);
    std::fill(p_mag.begin(), p_mag.end(), 0.0);
    run_blocks(np, params_.workers, [&](std::size_t b, std::size_t begin, std::size_t end) {
      for (std::size_t a = begin; a < end; ++a) {
        const Vec2 xa{x0[2 * a], x0[2 * a + 1]};
        const Vec2 xb{x1[2 * a], x1[2 * a + 1]};
        const Vec2 pa{p0[2 * a], p0[2 * a + 1]};
        const Vec2 e_avg{path[a][0].dot(e_mid_x, m1, m2), path[a][1].dot(e_mid_y, m1, m2)};
        const Vec2 grad_x = dg_kinetic_x_2d(xa, xb, pa, field, ens.spin(a), hbar, eps);
        const Vec2 pb{pa[0] + dt * (e_avg[0] - grad_x[0]), pa[1] + dt * (e_avg[1] - grad_x[1])};
        const double az = field.at(xb).a_z;
        const double denom = gamma_2d(pa, az * az) + gamma_2d(pb, az * az);
        for (int c = 0; c < 2; ++c) {
          const double x_next = xa[c] + dt * (pa[c] + pb[c]) / denom;
          res_x[b] = std::max(res_x[b], std::abs(x_next - x1[2 * a + c]) / lengths[c]);
          res_p[b] = std::max(res_p[b], std::abs(pb[c] - p1[2 * a + c]));
          p_mag[b] = std::max(p_mag[b], std::abs(pb[c]));
          x1[2 * a + c] = x_next;
          p1[2 * a + c] = pb[c];
        }
      }
    });
    const double re = max_abs(e_next - e1) / std::max(1.0, max_abs(e_next));
    residual = std::max({max_of(res_x), max_of(res_p) / std::max(1.0, max_of(p_mag)), re});
    e1 = e_next;
    if (residual <= params_.tol) {
      state.fields.e_xy = field_update();
      for (std::size_t a = 0; a < np; ++a) {
        ens.X[2 * a] = cx.axis1().wrap(x1[2 * a]);
        ens.X[2 * a + 1] = cx.axis2().wrap(x1[2 * a + 1]);
      }
      ens.P = p1;
      return {iter, residual};
    }
  }
  throw NonconvergenceError("2D subsystem I", params_.max_iter, residual);
}

void Solver2D::subsystem2(State2D& state, double dt) const {
  if (dt == 0.0) return;
  ParticleEnsemble& ens = state.ensemble;
  const MagneticField2D field(*complex_, state.fields.a_z, state.fields.b_z);
  const bool spins = state.hbar != 0.0;
  run_blocks(ens.size(), params_.workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t a = begin; a < end; ++a) {
      const auto f = field.at(position(ens, a));
      const Vec2 p = momentum(ens, a);
      // gamma is frozen: |p| and A_z(x) do not change in this subsystem.
      const double angle = dt * f.b[2] / gamma_2d(p, f.a_z * f.a_z);
      const double c = std::cos(angle);
      const double s = std::sin(angle);
      ens.P[2 * a] = c * p[0] + s * p[1];
      ens.P[2 * a + 1] = -s * p[0] + c * p[1];
      if (spins) ens.set_spin(a, rodrigues_rotate(f.b, dt, ens.spin(a)));
    }
  });
}

StepStats Solver2D::subsystem3(State2D& state, double dt) {
  if (dt == 0.0) return {};
  const DeRhamComplex2D& cx = *complex_;
  const ParticleEnsemble& ens = state.ensemble;
  const std::size_t np = ens.size();
  const int m1 = cx.cells1();
  const int m2 = cx.cells2();
  const auto ns = static_cast<std::size_t>(cx.n_scalar());
  FieldState2D& f = state.fields;

  std::vector<TensorBasis> basis(np);
  std::vector<double> a0(np), g0(np);
  BlockDeposit spin_dep(np, 2 * ns);
  spin_dep.clear();
  run_blocks(np, params_.workers, [&](std::size_t b, std::size_t begin, std::size_t end) {
    std::span<double> buf = spin_dep.buffer(b);
    for (std::size_t a = begin; a < end; ++a) {
      const Vec2 x = position(ens, a);
      basis[a] = cx.tensor_basis(cx.degrees_v0(), x);
      a0[a] = cx.eval_0form(as_span(f.a_z), x);
      g0[a] = gamma_2d(momentum(ens, a), a0[a] * a0[a]);
      if (state.hbar != 0.0) {
        const Vec3 s = ens.spin(a);
        for (int c = 0; c < 2; ++c)
          cx.scatter_scalar(cx.degrees_v1star(c), x,
                            ens.W[a] * DeRhamComplex2D::v1star_sign(c) * s[c],
                            buf.subspan(c * ns, ns));
      }
    }
  });

  Vec zeeman = Vec::Zero(cx.n0());
  if (state.hbar != 0.0) {
    Vec spin_sums(2 * ns);
    spin_dep.reduce(as_span(spin_sums));
    zeeman = state.hbar * (cx.Gstar().transpose() * spin_sums);
  }

  const Eigen::LLT<Mat>& lhs = wave_operator(dt);
  const Mat& K = cx.Kstar();
  // Right-hand side of the increment e_z^{n+1} - e_z^n.
  const Vec rhs = -0.5 * dt * dt * (K * f.e_z) + dt * (K * f.a_z) + dt * zeeman;

  Vec e1 = f.e_z;
  Vec nl(cx.n0());
  BlockDeposit nl_dep(np, ns);
  double residual = 0.0;
  for (int iter = 1; iter <= params_.max_iter; ++iter) {
    const Vec a1 = f.a_z - 0.5 * dt * (f.e_z + e1);
    nl_dep.clear();
    run_blocks(np, params_.workers, [&](std::size_t b, std::size_t begin, std::size_t end) {
      std::span<double> buf = nl_dep.buffer(b);
      for (std::size_t a = begin; a < end; ++a) {
        const TensorBasis& tb = basis[a];
        double az = 0.0;
        for (int r = 0; r < tb.axis1.count; ++r) {
          const int i1 = wrap_index(tb.axis1.first + r, m1);
          for (int q = 0; q < tb.axis2.count; ++q)
            az += tb.axis1.values[r] * tb.axis2.values[q] *
                  a1[i1 * m2 + wrap_index(tb.axis2.first + q, m2)];
        }
        const double g1 = gamma_2d(momentum(ens, a), az * az);
        const double scale = ens.W[a] * (az + a0[a]) / (g0[a] + g1);
        for (int r = 0; r < tb.axis1.count; ++r) {
          const int i1 = wrap_index(tb.axis1.first + r, m1);
          for (int q = 0; q < tb.axis2.count; ++q)
            buf[i1 * m2 + wrap_index(tb.axis2.first + q, m2)] +=
                scale * tb.axis1.values[r] * tb.axis2.values[q];
        }
      }
    });
    nl_dep.reduce(as_span(nl));
    const Vec next = f.e_z + lhs.solve(rhs + dt * nl);
    residual = max_abs(next - e1) / std::max(1.0, max_abs(next));
    e1 = next;
    if (residual <= params_.tol) {
      f.a_z = f.a_z - 0.5 * dt * (f.e_z + e1);
      f.e_z = e1;
      return {iter, residual};
    }
  }
  throw NonconvergenceError("2D subsystem III", params_.max_iter, residual);
}

void Solver2D::subsystem4(State2D& state, double dt) {
  if (dt == 0.0) return;
  const DeRhamComplex2D& cx = *complex_;
  const ParticleEnsemble& ens = state.ensemble;
  FieldState2D& f = state.fields;

  // M2 b_z + hbar Lambda2^T W S_z: the b_z-gradient, constant during the step.
  Vec grad_b = cx.M2() * f.b_z;
  if (state.hbar != 0.0) {
    BlockDeposit dep(ens.size(), static_cast<std::size_t>(cx.n2()));
    dep.clear();
    run_blocks(ens.size(), params_.workers,
               [&](std::size_t b, std::size_t begin, std::size_t end) {
                 std::span<double> buf = dep.buffer(b);
                 for (std::size_t a = begin; a < end; ++a)
                   cx.scatter_scalar(cx.degrees_v2(), position(ens, a),
                                     ens.W[a] * ens.S[3 * a + 2], buf);
               });
    Vec sz(cx.n2());
    dep.reduce(as_span(sz));
    grad_b += state.hbar * sz;
  }
  const Mat& CC = cx.curl_curl();
  const Vec rhs = -0.5 * dt * dt * (CC * f.e_xy) + dt * (cx.C().transpose() * grad_b);
  const Vec de = maxwell_operator(dt).solve(rhs);
  const Vec e1 = f.e_xy + de;
  f.b_z = f.b_z - 0.5 * dt * (cx.C() * (f.e_xy + e1));
  f.e_xy = e1;
}

void Solver2D::step(State2D& state, double dt) {
  subsystem1(state, dt);
  subsystem2(state, dt);
  subsystem3(state, dt);
  subsystem4(state, dt);
  state.time += dt;
}

void step2d_subsystem1(State2D& state, const SolverParams& params) {
  Solver2D(state.complex, params).subsystem1(state, params.dt);
}

void step2d_subsystem2(State2D& state, const SolverParams& params) {
  Solver2D(state.complex, params).subsystem2(state, params.dt);
}

void step2d_subsystem3(State2D& state, const SolverParams& params) {
  Solver2D(state.complex, params).subsystem3(state, params.dt);
}

void step2d_subsystem4(State2D& state, const SolverParams& params) {
  Solver2D(state.complex, params).subsystem4(state, params.dt);
}

void lie_trotter_step_2d(State2D& state, const SolverParams& params) {
  Solver2D solver(state.complex, params);
  solver.subsystem1(state, params.dt);
  solver.subsystem2(state, params.dt);
  solver.subsystem3(state, params.dt);
  solver.subsystem4(state, params.dt);
}

Vec deposit_density_2d(const DeRhamComplex2D& complex, const ParticleEnsemble& ensemble) {
  Vec rho = Vec::Zero(complex.n0());
  for (std::size_t a = 0; a < ensemble.size(); ++a)
    complex.scatter_scalar(complex.degrees_v0(), position(ensemble, a), ensemble.W[a],
                           as_span(rho));
  return rho;
}

void solve_initial_poisson_2d(State2D& state) {
  const DeRhamComplex2D& cx = *state.complex;
  const Vec rho = deposit_density_2d(cx, state.ensemble);
  const Vec rhs = cx.background() - rho;
  if (std::abs(rhs.sum()) > 1e-10 * std::max(1.0, cx.background().sum()))
    throw ConfigError("total particle charge " + std::to_string(rho.sum()) +
                      " does not match the neutralizing background " +
                      std::to_string(cx.background().sum()));
  const Mat K = Mat(cx.G().transpose() * (cx.M1() * cx.G()));
  state.fields.e_xy = cx.G() * solve_zero_mean(K, rhs);
}

} // namespace vlpic
