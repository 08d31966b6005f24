#include "vlpic/run.hpp"

#include "vlpic/errors.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>

namespace vlpic {

namespace {

std::shared_ptr<const DeRhamComplex1D> complex_1d(const SimConfig& c) {
  return std::make_shared<const DeRhamComplex1D>(c.cells[0], c.degree[0], c.lengths[0]);
}

std::shared_ptr<const DeRhamComplex2D> complex_2d(const SimConfig& c) {
  return std::make_shared<const DeRhamComplex2D>(c.cells[0], c.cells[1], c.degree[0],
                                                 c.degree[1], c.lengths[0], c.lengths[1]);
}

} // namespace

State1D setup_run_1d(const SimConfig& c) {
  State1D st = make_state_1d(complex_1d(c), c.hbar);
  const DeRhamComplex1D& cx = *st.complex;
  st.ensemble = sample_maxwellian_1d(c.np, c.temperature, c.lengths[0], c.seed);
  init_spin_delta(st.ensemble, c.spin_direction);
  const double e0 = c.e0;
  const double k = c.k;
  st.fields.e_y = cx.l2_project_0form([&](double x) { return e0 * std::cos(k * x); });
  st.fields.e_z = cx.l2_project_0form([&](double x) { return e0 * std::sin(k * x); });
  st.fields.a_y = cx.l2_project_0form([&](double x) { return -e0 * std::sin(k * x); });
  st.fields.a_z = cx.l2_project_0form([&](double x) { return e0 * std::cos(k * x); });
  solve_initial_poisson(st);
  return st;
}

State2D setup_run_2d(const SimConfig& c) {
  State2D st = make_state_2d(complex_2d(c), c.hbar);
  const DeRhamComplex2D& cx = *st.complex;
  st.ensemble = sample_maxwellian_2d(c.np, c.temperature, c.lengths[0], c.lengths[1], c.seed);
  init_spin_delta(st.ensemble, c.spin_direction);
  const double e0 = c.e0;
  const double k = c.k;
  st.fields.e_z = cx.l2_project_0form([&](double x1, double) { return e0 * std::sin(k * x1); });
  st.fields.a_z = cx.l2_project_0form([&](double x1, double) { return e0 * std::cos(k * x1); });
  solve_initial_poisson_2d(st);
  return st;
}

Simulation::Simulation(const SimConfig& config, int workers) : config_(config) {
  if (config_.model == Model::one_d)
    s1_ = setup_run_1d(config_);
  else
    s2_ = setup_run_2d(config_);
  make_solver(workers);
  h0_ = hamiltonian();
}

Simulation::Simulation(const SimConfig& config, const Checkpoint& ckpt, int workers)
    : config_(config) {
  const bool two_d = config_.model == Model::two_d;
  if (ckpt.model != config_.model) throw ConfigError("checkpoint model does not match config");
  const int axes = two_d ? 2 : 1;
  for (int a = 0; a < axes; ++a) {
    if (ckpt.cells[a] != static_cast<std::uint32_t>(config_.cells[a]) ||
        ckpt.degree[a] != static_cast<std::uint32_t>(config_.degree[a]))
      throw ConfigError("checkpoint grid does not match grid.cells / grid.degree");
  }
  if (ckpt.ensemble.size() != config_.np)
    throw ConfigError("checkpoint particle count does not match particles.np");
  const long total = config_.steps();
  if (static_cast<long>(ckpt.step) > total)
    throw ConfigError("checkpoint step lies beyond time.t_end");

  if (two_d) {
    State2D st = make_state_2d(complex_2d(config_), config_.hbar);
    st.fields = {ckpt.coeffs[0], ckpt.coeffs[1], ckpt.coeffs[2], ckpt.coeffs[3]};
    st.ensemble = ckpt.ensemble;
    st.time = ckpt.time;
    s2_ = std::move(st);
  } else {
    State1D st = make_state_1d(complex_1d(config_), config_.hbar);
    st.fields = {ckpt.coeffs[0], ckpt.coeffs[1], ckpt.coeffs[2], ckpt.coeffs[3], ckpt.coeffs[4]};
    st.ensemble = ckpt.ensemble;
    st.time = ckpt.time;
    s1_ = std::move(st);
  }
  make_solver(workers);
  step_ = static_cast<long>(ckpt.step);
  h0_ = ckpt.h0;
}

void Simulation::make_solver(int workers) {
  const SolverParams params = config_.solver_params(workers);
  if (s1_)
    solver1_ = std::make_unique<Solver1D>(s1_->complex, params);
  else
    solver2_ = std::make_unique<Solver2D>(s2_->complex, params);
}

void Simulation::advance() {
  const double dt = config_.dt;
  auto attempt = [&](auto& state, auto& solver) {
    auto backup = state;
    try {
      solver.step(state, dt);
    } catch (const NonconvergenceError&) {
      if (!config_.retry_halving) throw;
      state = std::move(backup);
      solver.step(state, 0.5 * dt);
      solver.step(state, 0.5 * dt);
    }
    state.time = static_cast<double>(step_ + 1) * dt;
  };
  if (s1_)
    attempt(*s1_, *solver1_);
  else
    attempt(*s2_, *solver2_);
  ++step_;
}

double Simulation::hamiltonian() const {
  return s1_ ? hamiltonian_1d(*s1_) : hamiltonian_2d(*s2_);
}

DiagnosticsRecord Simulation::diagnostics() const {
  DiagnosticsRecord rec;
  rec.step = step_;
  rec.H = hamiltonian();
  rec.rel_energy_err = relative_energy_error(rec.H, h0_);
  if (s1_) {
    const State1D& st = *s1_;
    const DeRhamComplex1D& cx = *st.complex;
    rec.time = st.time;
    rec.poisson_res_inf = poisson_residual_1d(st).inf_norm;
    for (const ModeRequest& m : config_.modes) {
      const FieldState1D& f = st.fields;
      const Vec& v = m.field == "ex"   ? f.e_x
                     : m.field == "ey" ? f.e_y
                     : m.field == "ez" ? f.e_z
                     : m.field == "ay" ? f.a_y
                                       : f.a_z;
      rec.mode_amp.emplace_back(m.column(),
                                fourier_mode_amplitude(cx, as_span(v), m.field == "ex" ? 1 : 0,
                                                       m.mode));
    }
    rec.spin_moments = spin_moments(st.ensemble);
  } else {
    const State2D& st = *s2_;
    const DeRhamComplex2D& cx = *st.complex;
    rec.time = st.time;
    rec.poisson_res_inf = poisson_residual_2d(st).inf_norm;
    const auto ns = static_cast<std::size_t>(cx.n_scalar());
    const FieldState2D& f = st.fields;
    for (const ModeRequest& m : config_.modes) {
      std::function<double(const Vec2&)> sample;
      if (m.field == "ex" || m.field == "ey") {
        const int comp = m.field == "ex" ? 0 : 1;
        const auto coeffs = as_span(f.e_xy).subspan(comp * ns, ns);
        sample = [&cx, coeffs, comp](const Vec2& x) {
          return cx.eval_scalar(cx.degrees_v1(comp), coeffs, x);
        };
      } else if (m.field == "bz") {
        sample = [&](const Vec2& x) { return cx.eval_2form(as_span(f.b_z), x); };
      } else {
        const Vec& v = m.field == "ez" ? f.e_z : f.a_z;
        sample = [&cx, &v](const Vec2& x) { return cx.eval_0form(as_span(v), x); };
      }
      rec.mode_amp.emplace_back(m.column(), fourier_mode_amplitude_2d(cx, sample, m.mode));
    }
    rec.spin_moments = spin_moments(st.ensemble);
  }
  return rec;
}

Checkpoint Simulation::checkpoint() const {
  Checkpoint ck;
  ck.model = config_.model;
  const int axes = s2_ ? 2 : 1;
  for (int a = 0; a < axes; ++a) {
    ck.cells[a] = static_cast<std::uint32_t>(config_.cells[a]);
    ck.degree[a] = static_cast<std::uint32_t>(config_.degree[a]);
  }
  if (s1_) {
    const FieldState1D& f = s1_->fields;
    ck.coeffs = {f.e_x, f.e_y, f.e_z, f.a_y, f.a_z};
    ck.ensemble = s1_->ensemble;
    ck.time = s1_->time;
  } else {
    const FieldState2D& f = s2_->fields;
    ck.coeffs = {f.e_xy, f.b_z, f.e_z, f.a_z};
    ck.ensemble = s2_->ensemble;
    ck.time = s2_->time;
  }
  ck.step = static_cast<std::uint64_t>(step_);
  ck.h0 = h0_;
  return ck;
}

std::string csv_header(const SimConfig& config) {
  std::string h = "step,time,H,rel_energy_err,poisson_res_inf";
  for (const ModeRequest& m : config.modes) h += "," + m.column();
  return h + ",Sx,Sy,Sz";
}

std::string csv_row(const DiagnosticsRecord& r) {
  char buf[64];
  std::string row = std::to_string(r.step);
  auto add = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    row += buf;
  };
  add(r.time);
  add(r.H);
  add(r.rel_energy_err);
  add(r.poisson_res_inf);
  for (const auto& m : r.mode_amp) add(m.second);
  for (double s : r.spin_moments) add(s);
  return row;
}

namespace {

class CsvFile {
public:
  explicit CsvFile(const std::string& path) : path_(path), f_(std::fopen(path.c_str(), "w")) {
    if (!f_) throw IoError("cannot open " + path + " for writing");
  }
  ~CsvFile() {
    if (f_) std::fclose(f_);
  }
  CsvFile(const CsvFile&) = delete;
  CsvFile& operator=(const CsvFile&) = delete;

  void line(const std::string& s) {
    if (std::fputs(s.c_str(), f_) < 0 || std::fputc('\n', f_) == EOF)
      throw IoError("write to " + path_ + " failed");
  }
  void close() {
    const bool bad = std::fclose(f_) != 0;
    f_ = nullptr;
    if (bad) throw IoError("closing " + path_ + " failed");
  }

private:
  std::string path_;
  std::FILE* f_;
};

} // namespace

void run(const SimConfig& config, const RunOptions& options, std::ostream& log) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  if (ec || !fs::is_directory(options.out_dir))
    throw IoError("cannot create output directory " + options.out_dir);
  const fs::path out(options.out_dir);

  std::optional<Simulation> sim;
  if (options.resume)
    sim.emplace(config, read_checkpoint(*options.resume), options.workers);
  else
    sim.emplace(config, options.workers);

  const long total = config.steps();
  if (!options.quiet) {
    log << "# simulate run\n" << describe(config);
    log << "steps = " << total << "\n";
    if (options.resume) log << "resumed at step " << sim->step_index() << "\n";
    log << "H0 = " << sim->h0() << "\n";
    log.flush();
  }

  CsvFile csv((out / "diagnostics.csv").string());
  csv.line(csv_header(config));
  csv.line(csv_row(sim->diagnostics()));

  const long report_every = std::max<long>(1, total / 10);
  double max_err = 0.0;
  while (sim->step_index() < total) {
    sim->advance();
    const long n = sim->step_index();
    if (n % config.csv_stride == 0 || n == total) {
      const DiagnosticsRecord rec = sim->diagnostics();
      max_err = std::max(max_err, rec.rel_energy_err);
      csv.line(csv_row(rec));
      if (!options.quiet && (n % report_every == 0 || n == total)) {
        log << "step " << n << "/" << total << " t=" << rec.time << " rel_energy_err="
            << rec.rel_energy_err << " poisson_res_inf=" << rec.poisson_res_inf << "\n";
        log.flush();
      }
    }
    if (config.checkpoint_stride > 0 && n % config.checkpoint_stride == 0)
      write_checkpoint((out / ("checkpoint_" + std::to_string(n) + ".bin")).string(),
                       sim->checkpoint());
  }
  csv.close();
  write_checkpoint((out / "final.bin").string(), sim->checkpoint());
  if (!options.quiet) log << "done; max rel_energy_err over recorded rows = " << max_err << "\n";
}

} // namespace vlpic
