#pragma once

#include "vlpic/solver1d.hpp"

namespace vlpic {

struct FieldState2D {
  Vec e_xy; // V1, components stacked
  Vec b_z;  // V2
  Vec e_z;  // V0
  Vec a_z;  // V0
};

struct State2D {
  ParticleEnsemble ensemble;
  FieldState2D fields;
  std::shared_ptr<const DeRhamComplex2D> complex;
  double hbar = 0.0;
  double time = 0.0;
};

/// Zero fields and an empty 2D ensemble on `complex`.
State2D make_state_2d(std::shared_ptr<const DeRhamComplex2D> complex, double hbar);

double gamma_2d(const Vec2& p, double az_sq);

/// A_z, B_z and the in-plane field (B_x, B_y) = (d2 A_z, -d1 A_z), frozen
/// during a substep. (B_x, B_y) is evaluated in V1* from Gstar a_z, exactly as
/// it enters the Hamiltonian.
class MagneticField2D {
public:
  MagneticField2D(const DeRhamComplex2D& complex, const Vec& a_z, const Vec& b_z);

  struct Sample {
    double a_z;
    Vec3 b; // (B_x, B_y, B_z)
  };

  Sample at(const Vec2& x) const;
  /// Derivatives along axis `axis` (0 or 1) of A_z and of the three B components.
  Sample derivative(const Vec2& x, int axis) const;
  /// Difference quotients (f(to) - f(from)) / (to - from)[axis] for a path
  /// along `axis`, as segment averages of the axis derivative. Midpoint
  /// derivative when the step is below eps * dx.
  Sample quotient(const Vec2& from, const Vec2& to, int axis, double eps) const;
  const DeRhamComplex2D& complex() const { return *complex_; }

private:
  struct Component {
    ComponentDegrees deg;
    std::array<Vec, 2> diff; // axis differences of the signed coefficients
  };
  double component_quotient(const Component& c, const Vec2& from, const Vec2& to, int axis,
                            double eps) const;

  const DeRhamComplex2D* complex_;
  Vec a_z_, bstar_, b_z_;
  std::array<Component, 4> comps_; // A_z, B_x, B_y, B_z
};

/// Energy of one particle per unit weight at fixed fields:
/// gamma - 1 + hbar s.B.
double particle_energy_2d(const Vec2& x, const Vec2& p, const MagneticField2D& field,
                          const Vec3& spin, double hbar);

/// Coordinate-increment discrete gradient of particle_energy_2d in x per unit
/// weight at the old momentum. The path moves x2 first (at the old x1) and then
/// x1 (at the new x2); each leg falls back to a midpoint derivative when its
/// increment is below degeneracy_eps times the cell width.
Vec2 dg_kinetic_x_2d(const Vec2& x_n, const Vec2& x_np1, const Vec2& p_n,
                     const MagneticField2D& field, const Vec3& spin, double hbar,
                     double degeneracy_eps = 1e-10);

/// Time stepper for the 2D model. Both spline degrees must be at least 2.
class Solver2D {
public:
  Solver2D(std::shared_ptr<const DeRhamComplex2D> complex, SolverParams params);

  const SolverParams& params() const { return params_; }

  /// (X, P, e_xy) by discrete gradient.
  StepStats subsystem1(State2D& state, double dt);
  /// Exact rotation of P about B_z / gamma and of S about B.
  void subsystem2(State2D& state, double dt) const;
  /// (e_z, a_z) by discrete gradient.
  StepStats subsystem3(State2D& state, double dt);
  /// (e_xy, b_z) by the implicit midpoint rule.
  void subsystem4(State2D& state, double dt);

  /// I, II, III, IV in order; advances state.time.
  void step(State2D& state, double dt);

private:
  const Eigen::LLT<Mat>& wave_operator(double dt);
  const Eigen::LLT<Mat>& maxwell_operator(double dt);

  std::shared_ptr<const DeRhamComplex2D> complex_;
  SolverParams params_;
  std::map<double, Eigen::LLT<Mat>> wave_llt_;
  std::map<double, Eigen::LLT<Mat>> maxwell_llt_;
};

void step2d_subsystem1(State2D& state, const SolverParams& params);
void step2d_subsystem2(State2D& state, const SolverParams& params);
void step2d_subsystem3(State2D& state, const SolverParams& params);
void step2d_subsystem4(State2D& state, const SolverParams& params);
void lie_trotter_step_2d(State2D& state, const SolverParams& params);

/// Lambda0(X)^T W 1 in V0 dual coefficients.
Vec deposit_density_2d(const DeRhamComplex2D& complex, const ParticleEnsemble& ensemble);

/// Sets e_xy = G phi with G^T M1 G phi = b - rho_h (zero-mean phi).
void solve_initial_poisson_2d(State2D& state);

} // namespace vlpic
