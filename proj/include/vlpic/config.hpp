#pragma once

#include "vlpic/derham.hpp"
#include "vlpic/solver1d.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vlpic {

enum class Model { one_d, two_d };

/// One Fourier amplitude column: field name (ex, ey, ez, ay, az, bz) and mode.
struct ModeRequest {
  std::string field;
  int mode = 0;

  std::string column() const { return field + "_m" + std::to_string(mode); }
};

/// Every physical and numerical parameter of a run. Defaults are the
/// parametric-instability setup without spin.
struct SimConfig {
  Model model = Model::one_d;

  std::array<int, 2> cells{128, 128};
  std::array<int, 2> degree{3, 3};
  /// Domain length per axis; 2 pi / k0 unless given explicitly.
  std::array<double, 2> lengths{0.0, 0.0};

  double dt = 0.02;
  double t_end = 80.0;
  Splitting splitting = Splitting::lie;
  bool retry_halving = true;

  std::size_t np = 4000;
  double temperature = 3.0 / 511.0;
  std::uint64_t seed = 1;
  Vec3 spin_direction{0.0, 0.0, 1.0};

  double hbar = 0.0;
  double e0 = 1.7320508075688772;
  double k = 0.7071067811865476;

  double tol = 1e-13;
  int max_iter = 100;
  double degeneracy_eps = 1e-10;

  long csv_stride = 1;
  /// 0 disables periodic checkpoints; final.bin is always written.
  long checkpoint_stride = 0;
  std::vector<ModeRequest> modes;

  long steps() const;
  SolverParams solver_params(int workers = 1) const;
};

/// Parses sectioned `key = value` text. Values may be arithmetic expressions
/// over numbers, `pi` and `sqrt(...)`. Throws ConfigError with the line number
/// on unknown keys, malformed values and constraint violations.
SimConfig parse_config(const std::string& text);

SimConfig load_config(const std::string& path);

/// Evaluates an arithmetic expression: + - * / parentheses, pi, sqrt(x).
double eval_expression(const std::string& expr);

/// Human-readable summary of every parameter, one `key = value` per line.
std::string describe(const SimConfig& config);

} // namespace vlpic
