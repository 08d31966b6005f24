#pragma once

#include "vlpic/derham.hpp"
#include "vlpic/particles.hpp"

#include <map>
#include <memory>

namespace vlpic {

enum class Splitting { lie, strang };

struct SolverParams {
  double dt = 0.02;
  /// Max-norm tolerance on fixed-point updates, each block scaled by its size.
  double tol = 1e-13;
  int max_iter = 100;
  /// |x1 - x0| < degeneracy_eps * dx switches difference quotients to
  /// midpoint derivatives.
  double degeneracy_eps = 1e-10;
  Splitting splitting = Splitting::lie;
  int workers = 1;
};

void validate(const SolverParams& params);

struct FieldState1D {
  Vec e_x; // V1
  Vec e_y; // V0
  Vec e_z;
  Vec a_y;
  Vec a_z;
};

struct State1D {
  ParticleEnsemble ensemble;
  FieldState1D fields;
  std::shared_ptr<const DeRhamComplex1D> complex;
  double hbar = 0.0;
  double time = 0.0;
};

/// Zero fields and an empty ensemble on `complex`.
State1D make_state_1d(std::shared_ptr<const DeRhamComplex1D> complex, double hbar);

inline std::span<const double> as_span(const Vec& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}
inline std::span<double> as_span(Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

double gamma_1d(double p, double aperp_sq);

/// Gonzalez discrete gradient of sqrt(1 + p^2 + A^2) in p at fixed A^2:
/// (p_n + p_np1) / (gamma(p_n) + gamma(p_np1)).
double dg_kinetic_p(double p_n, double p_np1, double aperp_sq);

/// Transverse potential A_perp = (A_y, A_z) frozen during Subsystem I, with
/// dA/dx represented in V1 through G so that it matches the Hamiltonian.
class TransverseField1D {
public:
  TransverseField1D(const DeRhamComplex1D& complex, const Vec& a_y, const Vec& a_z);

  struct Sample {
    double a_y, a_z;   // A_perp
    double da_y, da_z; // d/dx A_perp
  };

  Sample at(double x) const;
  /// Second derivatives d^2/dx^2 (A_y, A_z).
  std::array<double, 2> second_derivative(double x) const;
  /// Difference quotients (f(x1) - f(x0)) / (x1 - x0) of A_y, A_z, dA_y, dA_z,
  /// computed as segment averages of the derivative (no cancellation).
  /// Midpoint derivatives when |x1 - x0| < eps * dx.
  std::array<double, 4> quotients(double x0, double x1, bool with_spin, double eps) const;
  const DeRhamComplex1D& complex() const { return *complex_; }

private:
  const DeRhamComplex1D* complex_;
  Vec a_y_, a_z_, ga_y_, ga_z_, gga_y_, gga_z_;
};

/// Energy of one particle per unit weight at fixed fields:
/// gamma - 1 + hbar (s_y dA_z/dx - s_z dA_y/dx).
double particle_energy_1d(double x, double p, const TransverseField1D& field, const Vec3& spin,
                          double hbar);

/// Discrete gradient of particle_energy_1d in x per unit weight, taken at the
/// old momentum p_n (the x-increment leg of the coordinate-increment path).
double dg_kinetic_x(double x_n, double x_np1, double p_n, const TransverseField1D& field,
                    const Vec3& spin, double hbar, double degeneracy_eps = 1e-10);

/// exp(dt * hat(r)) s with hat(r) s = r x s, evaluated with sinc forms that
/// stay accurate as |r| -> 0.
Vec3 rodrigues_rotate(const Vec3& r, double dt, const Vec3& s);

struct StepStats {
  int iterations = 0;
  double residual = 0.0;
};

/// Time stepper for the 1D model. Holds factorizations per time step size;
/// the complex is shared read-only.
class Solver1D {
public:
  Solver1D(std::shared_ptr<const DeRhamComplex1D> complex, SolverParams params);

  const SolverParams& params() const { return params_; }

  /// (X, P, e_x) by discrete gradient; S and transverse fields untouched.
  StepStats subsystem1(State1D& state, double dt);
  /// (e_y, e_z, a_y, a_z) by discrete gradient; particles and e_x untouched.
  StepStats subsystem2(State1D& state, double dt);
  /// Exact spin rotation about (0, dA_z/dx, -dA_y/dx).
  void subsystem3(State1D& state, double dt) const;

  void lie_trotter(State1D& state, double dt);
  void strang(State1D& state, double dt);
  /// One composite step with the configured splitting; advances state.time.
  void step(State1D& state, double dt);

private:
  const Eigen::LLT<Mat>& wave_operator(double dt);

  std::shared_ptr<const DeRhamComplex1D> complex_;
  SolverParams params_;
  std::map<double, Eigen::LLT<Mat>> wave_llt_;
};

/// Functional forms; each builds a throwaway Solver1D.
void step_subsystem1(State1D& state, const SolverParams& params);
void step_subsystem2(State1D& state, const SolverParams& params);
void step_subsystem3(State1D& state, const SolverParams& params);
void lie_trotter_step(State1D& state, const SolverParams& params);
void strang_step(State1D& state, const SolverParams& params);

/// Zero-mean solution of K phi = rhs for a symmetric positive-semidefinite K
/// whose null space is span{1}; rhs must sum to zero.
Vec solve_zero_mean(const Mat& K, const Vec& rhs);

/// Sets e_x so that G^T M1 e_x + rho_h - b = 0 with rho_h = Lambda0(X)^T W 1.
void solve_initial_poisson(State1D& state);

/// Lambda0(X)^T W 1: deposited particle density in V0 dual coefficients.
Vec deposit_density_1d(const DeRhamComplex1D& complex, const ParticleEnsemble& ensemble);

} // namespace vlpic
