#include "vlpic/diagnostics.hpp"
#include "vlpic/errors.hpp"
#include "vlpic/run.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace vlpic;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "vlpic_run_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.cfg";
  std::ofstream(p) << text;
  return p;
}

struct CliResult {
  int code;
  std::string err;
};

CliResult simulate(const std::string& args, const fs::path& dir) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(SIMULATE_EXE) + " " + args + " > /dev/null 2> " + err.string();
  const int status = std::system(cmd.c_str());
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<double> column(const std::vector<std::string>& rows, std::size_t col) {
  std::vector<double> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    std::stringstream ss(rows[r]);
    std::string cell;
    for (std::size_t c = 0; c <= col; ++c) std::getline(ss, cell, ',');
    out.push_back(std::stod(cell));
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSmall = "model = 1d\n[grid]\ncells = 16\n[time]\nt_end = 0.4\n"
                     "[particles]\nnp = 200\n[physics]\nhbar = 0.1\n";

} // namespace

TEST_CASE("reference setup starts with a solved Poisson problem") {
  const SimConfig c = parse_config("model = 1d\n");
  const State1D st = setup_run_1d(c);
  CHECK(poisson_residual_1d(st).inf_norm <= 1e-13);
  CHECK(st.ensemble.size() == 4000);
  const DeRhamComplex1D& cx = *st.complex;
  CHECK(std::abs(cx.eval_0form(as_span(st.fields.e_y), 0.0) - c.e0) <= 1e-6);
  CHECK(std::abs(cx.eval_0form(as_span(st.fields.a_y), 0.0)) <= 1e-6);
}

TEST_CASE("zero amplitude: energy is kinetic plus the electrostatic noise field") {
  const SimConfig c = parse_config("model = 1d\n[physics]\ne0 = 0\n");
  const State1D st = setup_run_1d(c);
  double kinetic = 0.0;
  for (std::size_t a = 0; a < st.ensemble.size(); ++a)
    kinetic += st.ensemble.W[a] * (gamma_1d(st.ensemble.P[a], 0.0) - 1.0);
  const Vec& ex = st.fields.e_x;
  const double electrostatic = 0.5 * ex.dot(st.complex->M1() * ex);
  CHECK(std::abs(hamiltonian_1d(st) - kinetic - electrostatic) <= 1e-14 * kinetic);
  CHECK(electrostatic <= 1e-3 * kinetic);
  CHECK(st.fields.a_z.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("spin reference config builds a run") {
  const SimConfig c = load_config(std::string(CONFIG_DIR) + "/spin.cfg");
  Simulation sim(c);
  const Vec3 s = spin_moments(sim.state1d()->ensemble);
  CHECK(std::abs(s[2] - c.lengths[0]) <= 1e-10);
  CHECK(sim.state1d()->hbar == 0.1);
}

TEST_CASE("scaled reference run: one row per step and tight energy error") {
  const fs::path dir = scratch("scaled");
  const fs::path cfg = write_config(dir, "model = 1d\n[grid]\ncells = 32\n[time]\nt_end = 10\n"
                                         "[particles]\nnp = 1000\n");
  const CliResult r = simulate("--config " + cfg.string() + " --out " + (dir / "out").string() + " --quiet", dir);
  REQUIRE(r.code == 0);
  const auto rows = lines(dir / "out" / "diagnostics.csv");
  CHECK(rows[0] == "step,time,H,rel_energy_err,poisson_res_inf,ex_m2,ey_m2,Sx,Sy,Sz");
  CHECK(rows.size() == 1 + 501);
  double worst = 0.0;
  for (double e : column(rows, 3)) worst = std::max(worst, e);
  CHECK(worst <= 1e-10);
  CHECK(fs::exists(dir / "out" / "final.bin"));
}

TEST_CASE("CSV stride beyond the step count keeps initial and final rows") {
  const fs::path dir = scratch("stride");
  const fs::path cfg = write_config(dir, std::string(kSmall) + "[output]\ncsv_stride = 1000\n");
  REQUIRE(simulate("--config " + cfg.string() + " --out " + (dir / "out").string(), dir).code == 0);
  const auto rows = lines(dir / "out" / "diagnostics.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].rfind("0,", 0) == 0);
  CHECK(rows[2].rfind("20,", 0) == 0);
}

TEST_CASE("resumed run reproduces the uninterrupted CSV bitwise") {
  const fs::path dir = scratch("resume");
  const fs::path cfg = write_config(dir, std::string(kSmall) + "[output]\ncheckpoint_stride = 8\n");
  REQUIRE(simulate("--config " + cfg.string() + " --out " + (dir / "full").string(), dir).code == 0);
  REQUIRE(fs::exists(dir / "full" / "checkpoint_8.bin"));
  REQUIRE(fs::exists(dir / "full" / "checkpoint_16.bin"));
  REQUIRE(simulate("--config " + cfg.string() + " --out " + (dir / "part").string() + " --resume " +
                       (dir / "full" / "checkpoint_8.bin").string(),
                   dir)
              .code == 0);
  const auto full = lines(dir / "full" / "diagnostics.csv");
  const auto part = lines(dir / "part" / "diagnostics.csv");
  REQUIRE(full.size() == 22);
  REQUIRE(part.size() == 14);
  CHECK(part[0] == full[0]);
  for (std::size_t i = 1; i < part.size(); ++i) CHECK(part[i] == full[i + 8]);
  CHECK(slurp(dir / "full" / "final.bin") == slurp(dir / "part" / "final.bin"));
}

TEST_CASE("identical runs are bitwise identical, also across worker counts") {
  const fs::path dir = scratch("determinism");
  const fs::path cfg = write_config(dir, kSmall);
  REQUIRE(simulate("--config " + cfg.string() + " --out " + (dir / "a").string() + " --quiet", dir).code == 0);
  REQUIRE(simulate("--config " + cfg.string() + " --out " + (dir / "b").string() + " --quiet", dir).code == 0);
  REQUIRE(simulate("--config " + cfg.string() + " --out " + (dir / "c").string() + " --quiet --workers 3", dir).code == 0);
  CHECK(slurp(dir / "a" / "diagnostics.csv") == slurp(dir / "b" / "diagnostics.csv"));
  CHECK(slurp(dir / "a" / "final.bin") == slurp(dir / "b" / "final.bin"));
  CHECK(slurp(dir / "a" / "diagnostics.csv") == slurp(dir / "c" / "diagnostics.csv"));
}

TEST_CASE("2D run through the CLI") {
  const fs::path dir = scratch("twod");
  const fs::path cfg = write_config(dir, "model = 2d\n[grid]\ncells = 8\n[time]\nt_end = 0.2\n"
                                         "[particles]\nnp = 100\n[physics]\nhbar = 0.05\n");
  REQUIRE(simulate("--config " + cfg.string() + " --out " + (dir / "out").string(), dir).code == 0);
  const auto rows = lines(dir / "out" / "diagnostics.csv");
  CHECK(rows[0] == "step,time,H,rel_energy_err,poisson_res_inf,ex_m1,ez_m1,Sx,Sy,Sz");
  CHECK(rows.size() == 12);
  double worst = 0.0;
  for (double e : column(rows, 3)) worst = std::max(worst, e);
  CHECK(worst <= 1e-10);
}

TEST_CASE("CLI exit codes and error lines") {
  const fs::path dir = scratch("exit");
  SUBCASE("config error") {
    const fs::path cfg = write_config(dir, "[time]\ndt = -0.1\n");
    const CliResult r = simulate("--config " + cfg.string() + " --out " + (dir / "o").string(), dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("error: code=2 kind=config") != std::string::npos);
    CHECK(r.err.find("time.dt") != std::string::npos);
  }
  SUBCASE("missing arguments") {
    CHECK(simulate("--out " + (dir / "o").string(), dir).code == 2);
    CHECK(simulate("--config x.cfg --out o --workers 0", dir).code == 2);
  }
  SUBCASE("unreadable config") {
    const CliResult r = simulate("--config " + (dir / "none.cfg").string() + " --out " + (dir / "o").string(), dir);
    CHECK(r.code == 4);
    CHECK(r.err.find("kind=io") != std::string::npos);
  }
  SUBCASE("unwritable output directory") {
    const fs::path cfg = write_config(dir, kSmall);
    std::ofstream(dir / "blocker") << "x";
    const CliResult r = simulate("--config " + cfg.string() + " --out " + (dir / "blocker" / "out").string(), dir);
    CHECK(r.code == 4);
  }
  SUBCASE("nonconvergence without retry") {
    const fs::path cfg = write_config(dir, std::string(kSmall) +
                                               "[solver]\nmax_iter = 1\n[output]\nmodes = ex:1\n" +
                                               "[time]\nretry_halving = false\n");
    const CliResult r = simulate("--config " + cfg.string() + " --out " + (dir / "o").string(), dir);
    CHECK(r.code == 3);
    CHECK(r.err.find("kind=nonconvergence") != std::string::npos);
  }
  SUBCASE("resume from a missing checkpoint") {
    const fs::path cfg = write_config(dir, kSmall);
    const CliResult r = simulate("--config " + cfg.string() + " --out " + (dir / "o").string() +
                                     " --resume " + (dir / "none.bin").string(),
                                 dir);
    CHECK(r.code == 4);
  }
}

TEST_CASE("retry with halved step rescues a borderline step") {
  const std::string base = "model = 1d\n[grid]\ncells = 16\n[particles]\nnp = 200\n"
                           "[physics]\nhbar = 0.1\n[solver]\nmax_iter = 6\n"
                           "[time]\ndt = 0.2\nt_end = 2\n";
  Simulation strict(parse_config(base + "retry_halving = false\n"));
  CHECK_THROWS_AS(strict.advance(), NonconvergenceError);

  Simulation sim(parse_config(base + "retry_halving = true\n"));
  for (int n = 0; n < 5; ++n) sim.advance();
  CHECK(sim.step_index() == 5);
  CHECK(sim.state1d()->time == doctest::Approx(1.0));
  CHECK(relative_energy_error(sim.hamiltonian(), sim.h0()) <= 1e-10);
}
