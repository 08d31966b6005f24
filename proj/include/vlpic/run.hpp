#pragma once

#include "vlpic/checkpoint.hpp"
#include "vlpic/config.hpp"
#include "vlpic/diagnostics.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

namespace vlpic {

/// A configured run of either model: state, stepper and diagnostics.
class Simulation {
public:
  /// Builds the complex, samples particles, projects the initial fields and
  /// solves the initial Poisson problem.
  Simulation(const SimConfig& config, int workers = 1);
  /// Restores a run from a checkpoint written by a run with the same config.
  Simulation(const SimConfig& config, const Checkpoint& checkpoint, int workers = 1);

  const SimConfig& config() const { return config_; }
  long step_index() const { return step_; }
  double h0() const { return h0_; }

  /// Advances one step of config().dt. On nonconvergence with retry enabled,
  /// redoes the step once as two half steps before giving up.
  void advance();

  DiagnosticsRecord diagnostics() const;
  double hamiltonian() const;
  Checkpoint checkpoint() const;

  /// Non-null for the matching model.
  const State1D* state1d() const { return s1_ ? &*s1_ : nullptr; }
  const State2D* state2d() const { return s2_ ? &*s2_ : nullptr; }
  State1D* state1d() { return s1_ ? &*s1_ : nullptr; }
  State2D* state2d() { return s2_ ? &*s2_ : nullptr; }

private:
  void make_solver(int workers);

  SimConfig config_;
  std::optional<State1D> s1_;
  std::optional<State2D> s2_;
  std::unique_ptr<Solver1D> solver1_;
  std::unique_ptr<Solver2D> solver2_;
  long step_ = 0;
  double h0_ = 0.0;
};

/// Builds the initial 1D state of a config (fields, particles, Poisson solve).
State1D setup_run_1d(const SimConfig& config);
/// Builds the initial 2D state of a config.
State2D setup_run_2d(const SimConfig& config);

struct RunOptions {
  std::string out_dir;
  int workers = 1;
  std::optional<std::string> resume;
  bool quiet = false;
};

/// CSV header line (without newline) for a config.
std::string csv_header(const SimConfig& config);
/// One CSV row (without newline); reals printed with %.17g.
std::string csv_row(const DiagnosticsRecord& record);

/// Runs to t_end writing diagnostics.csv, periodic checkpoints and final.bin
/// into options.out_dir. Progress goes to `log` unless options.quiet.
/// Throws ConfigError, NonconvergenceError or IoError.
void run(const SimConfig& config, const RunOptions& options, std::ostream& log);

} // namespace vlpic
