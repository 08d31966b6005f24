#pragma once

#include "vlpic/solver1d.hpp"
#include "vlpic/solver2d.hpp"

#include <string>
#include <utility>
#include <vector>

namespace vlpic {

/// Discrete Hamiltonian of the 1D model: kinetic, electric, magnetic and
/// Zeeman energies.
double hamiltonian_1d(const State1D& state);

/// Discrete Hamiltonian of the 2D model.
double hamiltonian_2d(const State2D& state);

struct PoissonResidual {
  Vec r;
  double inf_norm = 0.0;
};

/// r = G^T M1 e_x + Lambda0(X)^T W 1 - b.
PoissonResidual poisson_residual_1d(const State1D& state);
/// r = G^T M1 e_xy + Lambda0(X)^T W 1 - b.
PoissonResidual poisson_residual_2d(const State2D& state);

/// Amplitude of Fourier mode m of a 1D spline field of the given form degree
/// (0 or 1), from its values at the M grid points: (2/M)|c_m| for m >= 1 and
/// (1/M)|c_0| for m = 0. Requires 0 <= m <= M/2.
double fourier_mode_amplitude(const DeRhamComplex1D& complex, std::span<const double> coeffs,
                              int form_degree, int m);

/// Amplitude of mode m along axis 1 of a 2D field sampled on the grid, after
/// averaging over axis 2. `sample` returns the field value at a point.
double fourier_mode_amplitude_2d(const DeRhamComplex2D& complex,
                                 const std::function<double(const Vec2&)>& sample, int m);

/// (sum w s_x, sum w s_y, sum w s_z).
Vec3 spin_moments(const ParticleEnsemble& ensemble);

/// |H - H0| / |H0|, or |H - H0| when |H0| < 1e-14.
double relative_energy_error(double h, double h0);

struct DiagnosticsRecord {
  long step = 0;
  double time = 0.0;
  double H = 0.0;
  double rel_energy_err = 0.0;
  double poisson_res_inf = 0.0;
  std::vector<std::pair<std::string, double>> mode_amp;
  Vec3 spin_moments{0.0, 0.0, 0.0};
};

} // namespace vlpic
