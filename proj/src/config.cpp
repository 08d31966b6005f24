#include "vlpic/config.hpp"

#include "vlpic/errors.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace vlpic {

namespace {

class ExpressionParser {
public:
  explicit ExpressionParser(const std::string& text) : s_(text) {}

  double parse() {
    const double v = sum();
    skip_space();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return v;
  }

private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("bad expression '" + s_ + "': " + what);
  }

  void skip_space() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  double sum() {
    double v = product();
    for (;;) {
      if (accept('+'))
        v += product();
      else if (accept('-'))
        v -= product();
      else
        return v;
    }
  }

  double product() {
    double v = unary();
    for (;;) {
      if (accept('*'))
        v *= unary();
      else if (accept('/'))
        v /= unary();
      else
        return v;
    }
  }

  double unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return primary();
  }

  double primary() {
    skip_space();
    if (accept('(')) {
      const double v = sum();
      if (!accept(')')) fail("missing ')'");
      return v;
    }
    if (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (name == "pi") return std::numbers::pi;
      if (name == "sqrt") {
        if (!accept('(')) fail("expected '(' after sqrt");
        const double v = sum();
        if (!accept(')')) fail("missing ')'");
        if (v < 0.0) fail("sqrt of a negative number");
        return std::sqrt(v);
      }
      fail("unknown name '" + name + "'");
    }
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  std::string s_;
  std::size_t pos_ = 0;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

struct Entry {
  std::string value;
  int line;
};

class Reader {
public:
  explicit Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    auto it = entries_.find(key);
    const std::string where = it == entries_.end() ? "" : "line " + std::to_string(it->second.line) + ": ";
    throw ConfigError(where + key + " " + what);
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  const std::string* raw(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second.value;
  }

  double number(const std::string& key, double fallback) const {
    const std::string* v = raw(key);
    if (!v) return fallback;
    try {
      return eval_expression(*v);
    } catch (const ConfigError& e) {
      fail(key, std::string("is not a number (") + e.what() + ")");
    }
  }

  long integer(const std::string& key, long fallback) const {
    if (!has(key)) return fallback;
    const double v = number(key, 0.0);
    if (v != std::floor(v) || std::abs(v) > 9e15) fail(key, "must be an integer");
    return static_cast<long>(v);
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& part : split(*raw(key), ',')) {
      try {
        out.push_back(eval_expression(part));
      } catch (const ConfigError& e) {
        fail(key, std::string("is not a number list (") + e.what() + ")");
      }
    }
    return out;
  }

  std::vector<long> integers(const std::string& key) const {
    std::vector<long> out;
    for (double v : numbers(key)) {
      if (v != std::floor(v)) fail(key, "must contain integers");
      out.push_back(static_cast<long>(v));
    }
    return out;
  }

  bool boolean(const std::string& key, bool fallback) const {
    const std::string* v = raw(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "yes" || *v == "1") return true;
    if (*v == "false" || *v == "no" || *v == "0") return false;
    fail(key, "must be true or false");
  }

private:
  std::map<std::string, Entry> entries_;
};

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "model",
      "grid.cells",          "grid.degree",
      "domain.k0",           "domain.lengths",
      "time.dt",             "time.t_end",          "time.splitting", "time.retry_halving",
      "particles.np",        "particles.temperature", "particles.seed", "particles.spin_direction",
      "physics.hbar",        "physics.e0",          "physics.k",
      "solver.tol",          "solver.max_iter",     "solver.degeneracy_eps",
      "output.csv_stride",   "output.checkpoint_stride", "output.modes"};
  return keys;
}

} // namespace

double eval_expression(const std::string& expr) { return ExpressionParser(expr).parse(); }

long SimConfig::steps() const { return std::llround(t_end / dt); }

SolverParams SimConfig::solver_params(int workers) const {
  SolverParams p;
  p.dt = dt;
  p.tol = tol;
  p.max_iter = max_iter;
  p.degeneracy_eps = degeneracy_eps;
  p.splitting = splitting;
  p.workers = workers;
  return p;
}

SimConfig parse_config(const std::string& text) {
  std::map<std::string, Entry> entries;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string full = section.empty() ? key : section + "." + key;
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), full) == keys.end())
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key " + full);
    if (entries.count(full))
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key " + full);
    entries[full] = {trim(line.substr(eq + 1)), lineno};
  }

  const Reader r(std::move(entries));
  SimConfig c;
  if (const std::string* m = r.raw("model")) {
    if (*m == "1d")
      c.model = Model::one_d;
    else if (*m == "2d")
      c.model = Model::two_d;
    else
      r.fail("model", "must be 1d or 2d");
  }
  const bool two_d = c.model == Model::two_d;
  const int axes = two_d ? 2 : 1;
  if (two_d) {
    c.cells = {16, 16};
    c.degree = {3, 3};
  }

  auto per_axis_int = [&](const std::string& key, std::array<int, 2>& out) {
    if (!r.has(key)) return;
    const std::vector<long> v = r.integers(key);
    if (v.size() == 1)
      out = {static_cast<int>(v[0]), static_cast<int>(v[0])};
    else if (static_cast<int>(v.size()) == axes)
      out = {static_cast<int>(v[0]), static_cast<int>(v[1])};
    else
      r.fail(key, "needs 1 or " + std::to_string(axes) + " values");
  };
  per_axis_int("grid.cells", c.cells);
  per_axis_int("grid.degree", c.degree);
  for (int a = 0; a < axes; ++a) {
    if (c.degree[a] < 2 || c.degree[a] > kMaxDegree)
      r.fail("grid.degree", "must lie in [2, " + std::to_string(kMaxDegree) + "]");
    if (c.cells[a] < c.degree[a] + 1) r.fail("grid.cells", "must be at least degree + 1");
  }

  c.e0 = r.number("physics.e0", c.e0);
  c.k = r.number("physics.k", c.k);
  c.hbar = r.number("physics.hbar", c.hbar);
  if (!(c.k > 0.0)) r.fail("physics.k", "must be positive");
  if (!(c.hbar >= 0.0)) r.fail("physics.hbar", "must be non-negative");
  if (!std::isfinite(c.e0)) r.fail("physics.e0", "must be finite");

  if (r.has("domain.k0") && r.has("domain.lengths"))
    r.fail("domain.lengths", "conflicts with domain.k0");
  if (r.has("domain.lengths")) {
    const std::vector<double> v = r.numbers("domain.lengths");
    if (v.size() == 1)
      c.lengths = {v[0], v[0]};
    else if (static_cast<int>(v.size()) == axes)
      c.lengths = {v[0], v[1]};
    else
      r.fail("domain.lengths", "needs 1 or " + std::to_string(axes) + " values");
    for (int a = 0; a < axes; ++a)
      if (!(c.lengths[a] > 0.0)) r.fail("domain.lengths", "must be positive");
  } else {
    const double k0 = r.number("domain.k0", c.k);
    if (!(k0 > 0.0)) r.fail("domain.k0", "must be positive");
    const double len = 2.0 * std::numbers::pi / k0;
    c.lengths = {len, len};
  }

  c.dt = r.number("time.dt", c.dt);
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) r.fail("time.dt", "must be positive");
  c.t_end = r.number("time.t_end", c.t_end);
  if (!(c.t_end >= 0.0) || !std::isfinite(c.t_end)) r.fail("time.t_end", "must be non-negative");
  const double ratio = c.t_end / c.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
    r.fail("time.t_end", "must be a whole number of time steps");
  if (const std::string* s = r.raw("time.splitting")) {
    if (*s == "lie")
      c.splitting = Splitting::lie;
    else if (*s == "strang")
      c.splitting = Splitting::strang;
    else
      r.fail("time.splitting", "must be lie or strang");
  }
  if (two_d && c.splitting == Splitting::strang)
    r.fail("time.splitting", "strang is only available for the 1d model");
  c.retry_halving = r.boolean("time.retry_halving", c.retry_halving);

  const long np = r.integer("particles.np", static_cast<long>(c.np));
  if (np < 1) r.fail("particles.np", "must be >= 1");
  c.np = static_cast<std::size_t>(np);
  c.temperature = r.number("particles.temperature", c.temperature);
  if (!(c.temperature > 0.0)) r.fail("particles.temperature", "must be positive");
  const long seed = r.integer("particles.seed", static_cast<long>(c.seed));
  if (seed < 0) r.fail("particles.seed", "must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  if (r.has("particles.spin_direction")) {
    const std::vector<double> v = r.numbers("particles.spin_direction");
    if (v.size() != 3) r.fail("particles.spin_direction", "needs 3 components");
    const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (std::abs(norm - 1.0) > 1e-12) r.fail("particles.spin_direction", "must be a unit vector");
    c.spin_direction = {v[0], v[1], v[2]};
  }

  c.tol = r.number("solver.tol", c.tol);
  if (!(c.tol > 0.0)) r.fail("solver.tol", "must be positive");
  const long max_iter = r.integer("solver.max_iter", c.max_iter);
  if (max_iter < 1 || max_iter > std::numeric_limits<int>::max())
    r.fail("solver.max_iter", "must be >= 1");
  c.max_iter = static_cast<int>(max_iter);
  c.degeneracy_eps = r.number("solver.degeneracy_eps", c.degeneracy_eps);
  if (!(c.degeneracy_eps > 0.0)) r.fail("solver.degeneracy_eps", "must be positive");

  c.csv_stride = r.integer("output.csv_stride", c.csv_stride);
  if (c.csv_stride < 1) r.fail("output.csv_stride", "must be >= 1");
  c.checkpoint_stride = r.integer("output.checkpoint_stride", c.checkpoint_stride);
  if (c.checkpoint_stride < 0) r.fail("output.checkpoint_stride", "must be >= 0");

  const std::string default_modes = two_d ? "ex:1,ez:1" : "ex:2,ey:2";
  const std::string modes = r.raw("output.modes") ? *r.raw("output.modes") : default_modes;
  const std::vector<std::string> fields =
      two_d ? std::vector<std::string>{"ex", "ey", "ez", "az", "bz"}
            : std::vector<std::string>{"ex", "ey", "ez", "ay", "az"};
  if (!trim(modes).empty()) {
    for (const std::string& item : split(modes, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) r.fail("output.modes", "entries must look like field:mode");
      ModeRequest req{trim(item.substr(0, colon)), 0};
      if (std::find(fields.begin(), fields.end(), req.field) == fields.end())
        r.fail("output.modes", "has unknown field '" + req.field + "'");
      try {
        const double m = eval_expression(item.substr(colon + 1));
        if (m != std::floor(m)) throw ConfigError("not an integer");
        req.mode = static_cast<int>(m);
      } catch (const ConfigError&) {
        r.fail("output.modes", "has a bad mode index in '" + item + "'");
      }
      if (req.mode < 0 || req.mode > c.cells[0] / 2)
        r.fail("output.modes", "mode index must lie in [0, cells/2]");
      c.modes.push_back(req);
    }
  }
  return c;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string describe(const SimConfig& c) {
  const bool two_d = c.model == Model::two_d;
  std::ostringstream out;
  out.precision(17);
  out << "model = " << (two_d ? "2d" : "1d") << "\n";
  if (two_d) {
    out << "grid.cells = " << c.cells[0] << "," << c.cells[1] << "\n";
    out << "grid.degree = " << c.degree[0] << "," << c.degree[1] << "\n";
    out << "domain.lengths = " << c.lengths[0] << "," << c.lengths[1] << "\n";
  } else {
    out << "grid.cells = " << c.cells[0] << "\n";
    out << "grid.degree = " << c.degree[0] << " (V1 degree " << c.degree[0] - 1 << ")\n";
    out << "domain.lengths = " << c.lengths[0] << "\n";
  }
  out << "time.dt = " << c.dt << "\n";
  out << "time.t_end = " << c.t_end << "\n";
  out << "time.splitting = " << (c.splitting == Splitting::strang ? "strang" : "lie") << "\n";
  out << "time.retry_halving = " << (c.retry_halving ? "true" : "false") << "\n";
  out << "particles.np = " << c.np << "\n";
  out << "particles.temperature = " << c.temperature << "\n";
  out << "particles.seed = " << c.seed << "\n";
  out << "particles.spin_direction = " << c.spin_direction[0] << "," << c.spin_direction[1]
      << "," << c.spin_direction[2] << "\n";
  out << "physics.hbar = " << c.hbar << "\n";
  out << "physics.e0 = " << c.e0 << "\n";
  out << "physics.k = " << c.k << "\n";
  out << "solver.tol = " << c.tol << "\n";
  out << "solver.max_iter = " << c.max_iter << "\n";
  out << "solver.degeneracy_eps = " << c.degeneracy_eps << "\n";
  out << "output.csv_stride = " << c.csv_stride << "\n";
  out << "output.checkpoint_stride = " << c.checkpoint_stride << "\n";
  out << "output.modes = ";
  for (std::size_t i = 0; i < c.modes.size(); ++i)
    out << (i ? "," : "") << c.modes[i].field << ":" << c.modes[i].mode;
  out << "\n";
  return out.str();
}

} // namespace vlpic
