#include "vlpic/solver1d.hpp"

#include "vlpic/errors.hpp"
#include "vlpic/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace vlpic {

void validate(const SolverParams& params) {
  if (!(params.dt > 0.0)) throw ConfigError("time.dt must be positive");
  if (!(params.tol > 0.0)) throw ConfigError("solver.tol must be positive");
  if (params.max_iter < 1) throw ConfigError("solver.max_iter must be >= 1");
  if (!(params.degeneracy_eps > 0.0)) throw ConfigError("solver.degeneracy_eps must be positive");
  if (params.workers < 1) throw ConfigError("workers must be >= 1");
}

State1D make_state_1d(std::shared_ptr<const DeRhamComplex1D> complex, double hbar) {
  State1D st;
  const int n = complex->n0();
  st.fields.e_x = Vec::Zero(complex->n1());
  st.fields.e_y = Vec::Zero(n);
  st.fields.e_z = Vec::Zero(n);
  st.fields.a_y = Vec::Zero(n);
  st.fields.a_z = Vec::Zero(n);
  st.complex = std::move(complex);
  st.hbar = hbar;
  return st;
}

double gamma_1d(double p, double aperp_sq) { return std::sqrt(1.0 + p * p + aperp_sq); }

double dg_kinetic_p(double p_n, double p_np1, double aperp_sq) {
  return (p_n + p_np1) / (gamma_1d(p_n, aperp_sq) + gamma_1d(p_np1, aperp_sq));
}

TransverseField1D::TransverseField1D(const DeRhamComplex1D& complex, const Vec& a_y,
                                     const Vec& a_z)
    : complex_(&complex), a_y_(a_y), a_z_(a_z), ga_y_(complex.G() * a_y),
      ga_z_(complex.G() * a_z), gga_y_(complex.G() * ga_y_), gga_z_(complex.G() * ga_z_) {}

TransverseField1D::Sample TransverseField1D::at(double x) const {
  const LocalBasis b0 = complex_->basis0(x);
  const LocalBasis b1 = complex_->basis1(x);
  const int n = complex_->n0();
  Sample s{0.0, 0.0, 0.0, 0.0};
  for (int m = 0; m < b0.count; ++m) {
    const int i = wrap_index(b0.first + m, n);
    s.a_y += b0.values[m] * a_y_[i];
    s.a_z += b0.values[m] * a_z_[i];
  }
  for (int m = 0; m < b1.count; ++m) {
    const int i = wrap_index(b1.first + m, n);
    s.da_y += b1.values[m] * ga_y_[i];
    s.da_z += b1.values[m] * ga_z_[i];
  }
  return s;
}

std::array<double, 2> TransverseField1D::second_derivative(double x) const {
  return {complex_->eval_1form_derivative(as_span(ga_y_), x),
          complex_->eval_1form_derivative(as_span(ga_z_), x)};
}

std::array<double, 4> TransverseField1D::quotients(double x0, double x1, bool with_spin,
                                                  double eps) const {
  std::array<double, 4> q{0.0, 0.0, 0.0, 0.0};
  const double h = complex_->dx();
  if (std::abs(x1 - x0) < eps * h) {
    const double xm = 0.5 * (x0 + x1);
    const auto fm = at(xm);
    q[0] = fm.da_y;
    q[1] = fm.da_z;
    if (with_spin) {
      const auto d2 = second_derivative(xm);
      q[2] = d2[0];
      q[3] = d2[1];
    }
    return q;
  }
  const int n = complex_->n0();
  thread_local Patch1D patch;
  segment_average(complex_->degree1(), h, x0, x1, patch, eps);
  for (std::size_t m = 0; m < patch.values.size(); ++m) {
    const int i = wrap_index(patch.first + static_cast<long>(m), n);
    q[0] += patch.values[m] * ga_y_[i];
    q[1] += patch.values[m] * ga_z_[i];
  }
  if (with_spin) {
    segment_average(complex_->degree1() - 1, h, x0, x1, patch, eps);
    for (std::size_t m = 0; m < patch.values.size(); ++m) {
      const int i = wrap_index(patch.first + static_cast<long>(m), n);
      q[2] += patch.values[m] * gga_y_[i];
      q[3] += patch.values[m] * gga_z_[i];
    }
  }
  return q;
}

double particle_energy_1d(double x, double p, const TransverseField1D& field, const Vec3& spin,
                          double hbar) {
  const auto f = field.at(x);
  return gamma_1d(p, f.a_y * f.a_y + f.a_z * f.a_z) - 1.0 +
         hbar * (spin[1] * f.da_z - spin[2] * f.da_y);
}

double dg_kinetic_x(double x_n, double x_np1, double p_n, const TransverseField1D& field,
                    const Vec3& spin, double hbar, double degeneracy_eps) {
  const auto f0 = field.at(x_n);
  const auto f1 = field.at(x_np1);
  const auto q = field.quotients(x_n, x_np1, hbar != 0.0, degeneracy_eps);
  const double q_ay = q[0], q_az = q[1], q_day = q[2], q_daz = q[3];
  const double g1 = gamma_1d(p_n, f1.a_y * f1.a_y + f1.a_z * f1.a_z);
  const double g0 = gamma_1d(p_n, f0.a_y * f0.a_y + f0.a_z * f0.a_z);
  const double kinetic = ((f1.a_y + f0.a_y) * q_ay + (f1.a_z + f0.a_z) * q_az) / (g1 + g0);
  return kinetic + hbar * (spin[1] * q_daz - spin[2] * q_day);
}

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double max_abs(const Vec& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

} // namespace

Vec3 rodrigues_rotate(const Vec3& r, double dt, const Vec3& s) {
  const double norm = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
  const double theta = dt * norm;
  // sin(theta)/|r| and (1 - cos(theta))/|r|^2 in cancellation-free form.
  const double c1 = dt * sinc(theta);
  const double half = sinc(0.5 * theta);
  const double c2 = 0.5 * dt * dt * half * half;
  const Vec3 rs = cross(r, s);
  const Vec3 rrs = cross(r, rs);
  return {s[0] + c1 * rs[0] + c2 * rrs[0], s[1] + c1 * rs[1] + c2 * rrs[1],
          s[2] + c1 * rs[2] + c2 * rrs[2]};
}

Solver1D::Solver1D(std::shared_ptr<const DeRhamComplex1D> complex, SolverParams params)
    : complex_(std::move(complex)), params_(params) {
  validate(params_);
}

const Eigen::LLT<Mat>& Solver1D::wave_operator(double dt) {
  auto it = wave_llt_.find(dt);
  if (it == wave_llt_.end()) {
    const Mat lhs = complex_->M0() + 0.25 * dt * dt * complex_->K();
    it = wave_llt_.emplace(dt, Eigen::LLT<Mat>(lhs)).first;
  }
  return it->second;
}

StepStats Solver1D::subsystem1(State1D& state, double dt) {
  if (dt == 0.0) return {};
  const DeRhamComplex1D& cx = *complex_;
  ParticleEnsemble& ens = state.ensemble;
  const std::size_t np = ens.size();
  const double hbar = state.hbar;
  const double eps = params_.degeneracy_eps;
  const TransverseField1D field(cx, state.fields.a_y, state.fields.a_z);

  const std::vector<double>& x0 = ens.X;
  const std::vector<double>& p0 = ens.P;
  std::vector<double> x1 = x0;
  std::vector<double> p1 = p0;
  const Vec& e0 = state.fields.e_x;
  Vec e1 = e0;

  std::vector<Patch1D> path(np);
  BlockDeposit current(np, static_cast<std::size_t>(cx.n1()));
  Vec j = Vec::Zero(cx.n1());

  // Current w (x1 - x0) times the path-averaged 1-form basis; G^T of it is
  // exactly Lambda0(x1) - Lambda0(x0), which keeps the Poisson residual fixed.
  auto field_update = [&]() -> Vec {
    current.clear();
    run_blocks(np, params_.workers, [&](std::size_t b, std::size_t begin, std::size_t end) {
      std::span<double> buf = current.buffer(b);
      for (std::size_t a = begin; a < end; ++a) {
        cx.line_average_1form(x0[a], x1[a], path[a], eps);
        path[a].scatter(ens.W[a] * (x1[a] - x0[a]), buf);
      }
    });
    current.reduce(as_span(j));
    return e0 - cx.M1_llt().solve(j);
  };

  const std::size_t nblocks = block_count(np);
  std::vector<double> res_x(nblocks), res_p(nblocks), p_mag(nblocks);
  double residual = 0.0;
  for (int iter = 1; iter <= params_.max_iter; ++iter) {
    const Vec e_next = field_update();
    const Vec e_mid = 0.5 * (e0 + e_next);
    std::fill(res_x.begin(), res_x.end(), 0.0);
    std::fill(res_p.begin(), res_p.end(), 0.0);
    std::fill(p_mag.begin(), p_mag.end(), 0.0);
    run_blocks(np, params_.workers, [&](std::size_t b, std::size_t begin, std::size_t end) {
      for (std::size_t a = begin; a < end; ++a) {
        const Vec3 spin = ens.spin(a);
        const double e_avg = path[a].dot(as_span(e_mid));
        const double grad_x = dg_kinetic_x(x0[a], x1[a], p0[a], field, spin, hbar, eps);
        const double p_next = p0[a] + dt * (e_avg - grad_x);
        const auto f1 = field.at(x1[a]);
        const double x_next =
            x0[a] + dt * dg_kinetic_p(p0[a], p_next, f1.a_y * f1.a_y + f1.a_z * f1.a_z);
        res_x[b] = std::max(res_x[b], std::abs(x_next - x1[a]));
        res_p[b] = std::max(res_p[b], std::abs(p_next - p1[a]));
        p_mag[b] = std::max(p_mag[b], std::abs(p_next));
        x1[a] = x_next;
        p1[a] = p_next;
      }
    });
    const double rx = np ? *std::max_element(res_x.begin(), res_x.end()) : 0.0;
    const double rp = np ? *std::max_element(res_p.begin(), res_p.end()) : 0.0;
    const double pm = np ? *std::max_element(p_mag.begin(), p_mag.end()) : 0.0;
    const double re = max_abs(e_next - e1) / std::max(1.0, max_abs(e_next));
    residual = std::max({rx / cx.length(), rp / std::max(1.0, pm), re});
    e1 = e_next;
    if (residual <= params_.tol) {
      state.fields.e_x = field_update();
      for (std::size_t a = 0; a < np; ++a) {
        ens.X[a] = cx.space().wrap(x1[a]);
        ens.P[a] = p1[a];
      }
      return {iter, residual};
    }
  }
  throw NonconvergenceError("subsystem I", params_.max_iter, residual);
}

StepStats Solver1D::subsystem2(State1D& state, double dt) {
  if (dt == 0.0) return {};
  const DeRhamComplex1D& cx = *complex_;
  const ParticleEnsemble& ens = state.ensemble;
  const std::size_t np = ens.size();
  const int n = cx.n0();
  FieldState1D& f = state.fields;

  std::vector<LocalBasis> basis(np);
  std::vector<double> a0y(np), a0z(np), g0(np);
  BlockDeposit spin_dep(np, 2 * static_cast<std::size_t>(n));
  spin_dep.clear();
  run_blocks(np, params_.workers, [&](std::size_t b, std::size_t begin, std::size_t end) {
    std::span<double> buf = spin_dep.buffer(b);
    for (std::size_t a = begin; a < end; ++a) {
      const double x = ens.X[a];
      basis[a] = cx.basis0(x);
      double ay = 0.0, az = 0.0;
      for (int m = 0; m < basis[a].count; ++m) {
        const int i = wrap_index(basis[a].first + m, n);
        ay += basis[a].values[m] * f.a_y[i];
        az += basis[a].values[m] * f.a_z[i];
      }
      a0y[a] = ay;
      a0z[a] = az;
      g0[a] = gamma_1d(ens.P[a], ay * ay + az * az);
      if (state.hbar != 0.0) {
        const LocalBasis b1 = cx.basis1(x);
        const Vec3 s = ens.spin(a);
        for (int m = 0; m < b1.count; ++m) {
          const int i = wrap_index(b1.first + m, n);
          buf[i] += ens.W[a] * s[2] * b1.values[m];
          buf[n + i] += ens.W[a] * s[1] * b1.values[m];
        }
      }
    }
  });

  // Zeeman parts of the a-gradients: -hbar G^T Lambda1^T W S_z and +hbar G^T Lambda1^T W S_y.
  Vec zeeman_y = Vec::Zero(n), zeeman_z = Vec::Zero(n);
  if (state.hbar != 0.0) {
    Vec spin_sums(2 * n);
    spin_dep.reduce(as_span(spin_sums));
    zeeman_y = -state.hbar * (cx.G().transpose() * spin_sums.head(n));
    zeeman_z = state.hbar * (cx.G().transpose() * spin_sums.tail(n));
  }

  const Eigen::LLT<Mat>& lhs = wave_operator(dt);
  const Mat& K = cx.K();
  const double q = 0.25 * dt * dt;
  // Right-hand sides of the increment e^{n+1} - e^n.
  const Vec rhs_y = -2.0 * q * (K * f.e_y) + dt * (K * f.a_y) + dt * zeeman_y;
  const Vec rhs_z = -2.0 * q * (K * f.e_z) + dt * (K * f.a_z) + dt * zeeman_z;

  Vec e1y = f.e_y, e1z = f.e_z;
  Vec nl(2 * n);
  BlockDeposit nl_dep(np, 2 * static_cast<std::size_t>(n));
  double residual = 0.0;
  for (int iter = 1; iter <= params_.max_iter; ++iter) {
    const Vec a1y = f.a_y - 0.5 * dt * (f.e_y + e1y);
    const Vec a1z = f.a_z - 0.5 * dt * (f.e_z + e1z);
    nl_dep.clear();
    run_blocks(np, params_.workers, [&](std::size_t b, std::size_t begin, std::size_t end) {
      std::span<double> buf = nl_dep.buffer(b);
      for (std::size_t a = begin; a < end; ++a) {
        const LocalBasis& lb = basis[a];
        double ay = 0.0, az = 0.0;
        for (int m = 0; m < lb.count; ++m) {
          const int i = wrap_index(lb.first + m, n);
          ay += lb.values[m] * a1y[i];
          az += lb.values[m] * a1z[i];
        }
        const double g1 = gamma_1d(ens.P[a], ay * ay + az * az);
        const double c = ens.W[a] / (g0[a] + g1);
        const double cy = c * (ay + a0y[a]);
        const double cz = c * (az + a0z[a]);
        for (int m = 0; m < lb.count; ++m) {
          const int i = wrap_index(lb.first + m, n);
          buf[i] += cy * lb.values[m];
          buf[n + i] += cz * lb.values[m];
        }
      }
    });
    nl_dep.reduce(as_span(nl));
    const Vec ny = f.e_y + lhs.solve(rhs_y + dt * nl.head(n));
    const Vec nz = f.e_z + lhs.solve(rhs_z + dt * nl.tail(n));
    const double scale = std::max({1.0, max_abs(ny), max_abs(nz)});
    residual = std::max(max_abs(ny - e1y), max_abs(nz - e1z)) / scale;
    e1y = ny;
    e1z = nz;
    if (residual <= params_.tol) {
      f.a_y = f.a_y - 0.5 * dt * (f.e_y + e1y);
      f.a_z = f.a_z - 0.5 * dt * (f.e_z + e1z);
      f.e_y = e1y;
      f.e_z = e1z;
      return {iter, residual};
    }
  }
  throw NonconvergenceError("subsystem II", params_.max_iter, residual);
}

void Solver1D::subsystem3(State1D& state, double dt) const {
  if (dt == 0.0) return;
  const DeRhamComplex1D& cx = *complex_;
  ParticleEnsemble& ens = state.ensemble;
  const Vec ga_y = cx.G() * state.fields.a_y;
  const Vec ga_z = cx.G() * state.fields.a_z;
  run_blocks(ens.size(), params_.workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t a = begin; a < end; ++a) {
      const double y = cx.eval_1form(as_span(ga_y), ens.X[a]);
      const double z = cx.eval_1form(as_span(ga_z), ens.X[a]);
      ens.set_spin(a, rodrigues_rotate({0.0, z, -y}, dt, ens.spin(a)));
    }
  });
}

void Solver1D::lie_trotter(State1D& state, double dt) {
  subsystem1(state, dt);
  subsystem2(state, dt);
  subsystem3(state, dt);
}

void Solver1D::strang(State1D& state, double dt) {
  subsystem1(state, 0.5 * dt);
  subsystem2(state, 0.5 * dt);
  subsystem3(state, dt);
  subsystem2(state, 0.5 * dt);
  subsystem1(state, 0.5 * dt);
}

void Solver1D::step(State1D& state, double dt) {
  if (params_.splitting == Splitting::strang)
    strang(state, dt);
  else
    lie_trotter(state, dt);
  state.time += dt;
}

void step_subsystem1(State1D& state, const SolverParams& params) {
  Solver1D(state.complex, params).subsystem1(state, params.dt);
}

void step_subsystem2(State1D& state, const SolverParams& params) {
  Solver1D(state.complex, params).subsystem2(state, params.dt);
}

void step_subsystem3(State1D& state, const SolverParams& params) {
  Solver1D(state.complex, params).subsystem3(state, params.dt);
}

void lie_trotter_step(State1D& state, const SolverParams& params) {
  Solver1D(state.complex, params).lie_trotter(state, params.dt);
}

void strang_step(State1D& state, const SolverParams& params) {
  Solver1D(state.complex, params).strang(state, params.dt);
}

Vec deposit_density_1d(const DeRhamComplex1D& complex, const ParticleEnsemble& ensemble) {
  Vec rho = Vec::Zero(complex.n0());
  for (std::size_t a = 0; a < ensemble.size(); ++a) {
    const LocalBasis b = complex.basis0(ensemble.X[a]);
    for (int m = 0; m < b.count; ++m)
      rho[wrap_index(b.first + m, complex.n0())] += ensemble.W[a] * b.values[m];
  }
  return rho;
}

Vec solve_zero_mean(const Mat& K, const Vec& rhs) {
  const Eigen::Index n = K.rows();
  const double shift = K.diagonal().mean() / static_cast<double>(n);
  const Mat reg = K + Mat::Constant(n, n, shift);
  const Eigen::LLT<Mat> llt(reg);
  Vec phi = llt.solve(rhs);
  phi += llt.solve(rhs - reg * phi);
  return phi;
}

void solve_initial_poisson(State1D& state) {
  const DeRhamComplex1D& cx = *state.complex;
  const Vec rho = deposit_density_1d(cx, state.ensemble);
  const Vec rhs = cx.background() - rho;
  const double imbalance = rhs.sum();
  if (std::abs(imbalance) > 1e-10 * std::max(1.0, cx.background().sum()))
    throw ConfigError("total particle charge " + std::to_string(rho.sum()) +
                      " does not match the neutralizing background " +
                      std::to_string(cx.background().sum()));
  const Vec phi = solve_zero_mean(cx.K(), rhs);
  state.fields.e_x = cx.G() * phi;
}

} // namespace vlpic
