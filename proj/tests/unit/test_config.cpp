#include "vlpic/config.hpp"
#include "vlpic/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>

using namespace vlpic;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& part) {
  return s.find(part) != std::string::npos;
}

} // namespace

TEST_CASE("minimal 1D config takes documented defaults") {
  const SimConfig c = parse_config("model = 1d\n");
  CHECK(c.model == Model::one_d);
  CHECK(c.degree[0] == 3);
  CHECK(c.degree[0] - 1 == 2);
  CHECK(c.tol == 1e-13);
  CHECK(c.splitting == Splitting::lie);
  CHECK(c.cells[0] == 128);
  CHECK(c.np == 4000);
  CHECK(c.dt == 0.02);
  CHECK(c.t_end == 80.0);
  CHECK(c.hbar == 0.0);
  CHECK(c.max_iter == 100);
  CHECK(c.degeneracy_eps == 1e-10);
  CHECK(c.retry_halving);
  CHECK(c.csv_stride == 1);
  CHECK(c.steps() == 4000);
  CHECK(std::abs(c.lengths[0] - 2.0 * std::numbers::pi * std::sqrt(2.0)) <= 1e-13);
  REQUIRE(c.modes.size() == 2);
  CHECK(c.modes[0].column() == "ex_m2");
  CHECK(c.modes[1].column() == "ey_m2");
}

TEST_CASE("empty text is a valid 1D config") {
  CHECK(parse_config("").model == Model::one_d);
}

TEST_CASE("negative time step names the key") {
  const std::string e = error_of("[time]\ndt = -0.1\n");
  CHECK(contains(e, "time.dt"));
  CHECK(contains(e, "line 2"));
}

TEST_CASE("reference parametric config is accepted and echoed") {
  const SimConfig c = load_config(std::string(CONFIG_DIR) + "/parametric.cfg");
  CHECK(std::abs(c.e0 - std::sqrt(3.0)) <= 1e-15);
  CHECK(std::abs(c.k - 1.0 / std::sqrt(2.0)) <= 1e-15);
  CHECK(std::abs(c.temperature - 3.0 / 511.0) <= 1e-18);
  CHECK(c.cells[0] == 128);
  CHECK(c.np == 4000);
  CHECK(c.dt == 0.02);
  CHECK(c.t_end == 80.0);
  CHECK(c.hbar == 0.0);
  const std::string echo = describe(c);
  CHECK(contains(echo, "physics.e0 = 1.73205080756887"));
  CHECK(contains(echo, "particles.np = 4000"));
  CHECK(contains(echo, "grid.cells = 128"));
}

TEST_CASE("shipped spin and 2D configs are accepted") {
  const SimConfig s = load_config(std::string(CONFIG_DIR) + "/spin.cfg");
  CHECK(s.hbar == 0.1);
  CHECK(s.np == 10000);
  CHECK(s.t_end == 200.0);
  const SimConfig p = load_config(std::string(CONFIG_DIR) + "/plane2d.cfg");
  CHECK(p.model == Model::two_d);
  CHECK(p.cells[1] == 16);
  CHECK(p.modes.size() == 3);
}

TEST_CASE("2D defaults") {
  const SimConfig c = parse_config("model = 2d\n");
  CHECK(c.cells[0] == 16);
  CHECK(c.cells[1] == 16);
  CHECK(c.modes[0].column() == "ex_m1");
}

TEST_CASE("parse errors carry the line number") {
  CHECK(contains(error_of("model = 1d\n\nbogus = 3\n"), "line 3"));
  CHECK(contains(error_of("[grid]\ncolor = 3\n"), "unknown key grid.color"));
  CHECK(contains(error_of("[time\ndt = 1\n"), "malformed section"));
  CHECK(contains(error_of("[time]\ndt\n"), "expected key = value"));
  CHECK(contains(error_of("[time]\ndt = 0.1\ndt = 0.2\n"), "duplicate key time.dt"));
  CHECK(contains(error_of("[grid]\ncells = abc\n"), "grid.cells"));
}

TEST_CASE("constraint violations") {
  CHECK(contains(error_of("model = 3d\n"), "model"));
  CHECK(contains(error_of("[grid]\ndegree = 1\n"), "grid.degree"));
  CHECK(contains(error_of("[grid]\ndegree = 8\n"), "grid.degree"));
  CHECK(contains(error_of("[grid]\ncells = 3\n"), "grid.cells"));
  CHECK(contains(error_of("[grid]\ncells = 2.5\n"), "grid.cells"));
  CHECK(contains(error_of("[time]\nt_end = 0.03\n"), "time.t_end"));
  CHECK(contains(error_of("[time]\nsplitting = leapfrog\n"), "time.splitting"));
  CHECK(contains(error_of("model = 2d\n[time]\nsplitting = strang\n"), "time.splitting"));
  CHECK(contains(error_of("[time]\nretry_halving = maybe\n"), "time.retry_halving"));
  CHECK(contains(error_of("[particles]\nnp = 0\n"), "particles.np"));
  CHECK(contains(error_of("[particles]\ntemperature = 0\n"), "particles.temperature"));
  CHECK(contains(error_of("[particles]\nspin_direction = 0, 1, 1\n"), "particles.spin_direction"));
  CHECK(contains(error_of("[physics]\nhbar = -1\n"), "physics.hbar"));
  CHECK(contains(error_of("[physics]\nk = 0\n"), "physics.k"));
  CHECK(contains(error_of("[solver]\ntol = 0\n"), "solver.tol"));
  CHECK(contains(error_of("[solver]\nmax_iter = 0\n"), "solver.max_iter"));
  CHECK(contains(error_of("[output]\ncsv_stride = 0\n"), "output.csv_stride"));
  CHECK(contains(error_of("[output]\nmodes = ex:2, qq:1\n"), "output.modes"));
  CHECK(contains(error_of("[output]\nmodes = ex:999\n"), "output.modes"));
  CHECK(contains(error_of("[domain]\nk0 = 1\nlengths = 3\n"), "domain.lengths"));
}

TEST_CASE("explicit lengths and wavenumber") {
  const SimConfig a = parse_config("[domain]\nlengths = 10\n");
  CHECK(a.lengths[0] == 10.0);
  const SimConfig b = parse_config("model = 2d\n[domain]\nk0 = 0.5\n");
  CHECK(std::abs(b.lengths[0] - 4.0 * std::numbers::pi) <= 1e-14);
  CHECK(b.lengths[0] == b.lengths[1]);
  const SimConfig c = parse_config("model = 2d\n[domain]\nlengths = 2, 3\n[grid]\ncells = 8, 6\n");
  CHECK(c.lengths[1] == 3.0);
  CHECK(c.cells[1] == 6);
}

TEST_CASE("comments, whitespace and boolean values") {
  const SimConfig c = parse_config("  # header\nmodel = 1d   # trailing\n\n[time]\n"
                                   "  retry_halving = false\n  splitting = strang\n");
  CHECK_FALSE(c.retry_halving);
  CHECK(c.splitting == Splitting::strang);
}

TEST_CASE("arithmetic expressions") {
  CHECK(eval_expression("3/511") == 3.0 / 511.0);
  CHECK(eval_expression("sqrt(3)") == std::sqrt(3.0));
  CHECK(eval_expression("1/sqrt(2)") == 1.0 / std::sqrt(2.0));
  CHECK(eval_expression("2*pi") == 2.0 * std::numbers::pi);
  CHECK(eval_expression("-(1 + 2) * 4") == -12.0);
  CHECK(eval_expression("1e-13") == 1e-13);
  CHECK(eval_expression(" 2 - -3 ") == 5.0);
  CHECK_THROWS_AS(eval_expression("2 +"), ConfigError);
  CHECK_THROWS_AS(eval_expression("foo(2)"), ConfigError);
  CHECK_THROWS_AS(eval_expression("(1"), ConfigError);
  CHECK_THROWS_AS(eval_expression("1 2"), ConfigError);
}

TEST_CASE("solver parameters follow the config") {
  const SimConfig c = parse_config("[solver]\ntol = 1e-12\nmax_iter = 7\n[time]\ndt = 0.01\nt_end = 1\n");
  const SolverParams p = c.solver_params(3);
  CHECK(p.tol == 1e-12);
  CHECK(p.max_iter == 7);
  CHECK(p.dt == 0.01);
  CHECK(p.workers == 3);
  CHECK(c.steps() == 100);
}

TEST_CASE("missing config file is an IO error") {
  CHECK_THROWS_AS(load_config("/nonexistent/dir/none.cfg"), IoError);
}
