#include "vlpic/diagnostics.hpp"

#include "vlpic/errors.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace vlpic {

double hamiltonian_1d(const State1D& state) {
  const DeRhamComplex1D& cx = *state.complex;
  const FieldState1D& f = state.fields;
  const ParticleEnsemble& ens = state.ensemble;
  const TransverseField1D field(cx, f.a_y, f.a_z);
  double particles = 0.0;
  for (std::size_t a = 0; a < ens.size(); ++a)
    particles += ens.W[a] * particle_energy_1d(ens.X[a], ens.P[a], field, ens.spin(a), state.hbar);
  const Mat& K = cx.K();
  return particles + 0.5 * f.e_x.dot(cx.M1() * f.e_x) + 0.5 * f.e_y.dot(cx.M0() * f.e_y) +
         0.5 * f.e_z.dot(cx.M0() * f.e_z) + 0.5 * f.a_y.dot(K * f.a_y) +
         0.5 * f.a_z.dot(K * f.a_z);
}

double hamiltonian_2d(const State2D& state) {
  const DeRhamComplex2D& cx = *state.complex;
  const FieldState2D& f = state.fields;
  const ParticleEnsemble& ens = state.ensemble;
  const MagneticField2D field(cx, f.a_z, f.b_z);
  double particles = 0.0;
  for (std::size_t a = 0; a < ens.size(); ++a) {
    const Vec2 x{ens.X[2 * a], ens.X[2 * a + 1]};
    const Vec2 p{ens.P[2 * a], ens.P[2 * a + 1]};
    particles += ens.W[a] * particle_energy_2d(x, p, field, ens.spin(a), state.hbar);
  }
  return particles + 0.5 * f.b_z.dot(cx.M2() * f.b_z) + 0.5 * f.e_xy.dot(cx.M1() * f.e_xy) +
         0.5 * f.e_z.dot(cx.M0() * f.e_z) + 0.5 * f.a_z.dot(cx.Kstar() * f.a_z);
}

namespace {

PoissonResidual finish(Vec r) {
  PoissonResidual out;
  out.inf_norm = r.size() ? r.lpNorm<Eigen::Infinity>() : 0.0;
  out.r = std::move(r);
  return out;
}

} // namespace

PoissonResidual poisson_residual_1d(const State1D& state) {
  const DeRhamComplex1D& cx = *state.complex;
  return finish(cx.G().transpose() * (cx.M1() * state.fields.e_x) +
                deposit_density_1d(cx, state.ensemble) - cx.background());
}

PoissonResidual poisson_residual_2d(const State2D& state) {
  const DeRhamComplex2D& cx = *state.complex;
  return finish(cx.G().transpose() * (cx.M1() * state.fields.e_xy) +
                deposit_density_2d(cx, state.ensemble) - cx.background());
}

namespace {

double mode_amplitude(const std::vector<double>& samples, int m) {
  const int n = static_cast<int>(samples.size());
  std::complex<double> c{0.0, 0.0};
  for (int j = 0; j < n; ++j) {
    const long phase = (static_cast<long>(m) * j) % n;
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(phase) / n;
    c += samples[j] * std::complex<double>(std::cos(angle), std::sin(angle));
  }
  return (m == 0 ? 1.0 : 2.0) * std::abs(c) / n;
}

void check_mode(int m, int cells) {
  if (m < 0 || m > cells / 2)
    throw ConfigError("mode index " + std::to_string(m) + " outside [0, " +
                      std::to_string(cells / 2) + "]");
}

} // namespace

double fourier_mode_amplitude(const DeRhamComplex1D& complex, std::span<const double> coeffs,
                              int form_degree, int m) {
  const int cells = complex.space().cells();
  check_mode(m, cells);
  if (form_degree != 0 && form_degree != 1)
    throw ConfigError("form degree must be 0 or 1");
  std::vector<double> samples(cells);
  for (int j = 0; j < cells; ++j) {
    const double x = j * complex.dx();
    samples[j] = form_degree == 0 ? complex.eval_0form(coeffs, x) : complex.eval_1form(coeffs, x);
  }
  return mode_amplitude(samples, m);
}

double fourier_mode_amplitude_2d(const DeRhamComplex2D& complex,
                                 const std::function<double(const Vec2&)>& sample, int m) {
  const int m1 = complex.cells1();
  const int m2 = complex.cells2();
  check_mode(m, m1);
  const Vec2 h = complex.dx();
  std::vector<double> rows(m1, 0.0);
  for (int i = 0; i < m1; ++i) {
    for (int l = 0; l < m2; ++l) rows[i] += sample({i * h[0], l * h[1]});
    rows[i] /= m2;
  }
  return mode_amplitude(rows, m);
}

Vec3 spin_moments(const ParticleEnsemble& ensemble) {
  Vec3 out{0.0, 0.0, 0.0};
  for (std::size_t a = 0; a < ensemble.size(); ++a)
    for (int c = 0; c < 3; ++c) out[c] += ensemble.W[a] * ensemble.S[3 * a + c];
  return out;
}

double relative_energy_error(double h, double h0) {
  const double diff = std::abs(h - h0);
  return std::abs(h0) < 1e-14 ? diff : diff / std::abs(h0);
}

} // namespace vlpic
