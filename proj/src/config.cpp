/* Copyright 2026 The ppi-carbon Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include "ppi/config.hpp"

#include <cstdint>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "ppi/errors.hpp"
#include "ppi/io.hpp"
#include "ppi/simulator.hpp"

namespace ppi {

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const toml::node* node, const std::string& key,
                         const std::string& what) const {
    std::ostringstream os;
    os << source_;
    if (node != nullptr) os << ":" << node->source().begin.line;
    os << ": key '" << key << "': " << what;
    throw ValidationError("ParseError", os.str());
  }

  void reject_unknown(const toml::table& table, const std::string& prefix,
                      const std::set<std::string>& allowed) const {
    for (const auto& [k, v] : table) {
      const std::string key(k.str());
      if (!allowed.contains(key)) fail(&v, prefix + key, "unknown key");
    }
  }

  const toml::table& table(const toml::table& parent, const std::string& key) const {
    const toml::node* node = parent.get(key);
    if (node == nullptr) fail(nullptr, key, "missing section");
    if (!node->is_table()) fail(node, key, "expected a table");
    return *node->as_table();
  }

  double number(const toml::table& t, const std::string& prefix, const std::string& key,
                std::optional<double> fallback = {}) const {
    const toml::node* node = t.get(key);
    if (node == nullptr) {
      if (fallback) return *fallback;
      fail(nullptr, prefix + key, "missing value");
    }
    return as_number(*node, prefix + key);
  }

  double as_number(const toml::node& node, const std::string& key) const {
    if (const auto* f = node.as_floating_point()) return f->get();
    if (const auto* i = node.as_integer()) return static_cast<double>(i->get());
    fail(&node, key, "expected a number");
  }

  std::int64_t integer(const toml::table& t, const std::string& prefix, const std::string& key,
                       std::int64_t fallback) const {
    const toml::node* node = t.get(key);
    if (node == nullptr) return fallback;
    const auto* i = node->as_integer();
    if (i == nullptr) fail(node, prefix + key, "expected an integer");
    return i->get();
  }

  std::string string(const toml::table& t, const std::string& prefix, const std::string& key,
                     const std::string& fallback) const {
    const toml::node* node = t.get(key);
    if (node == nullptr) return fallback;
    const auto* s = node->as_string();
    if (s == nullptr) fail(node, prefix + key, "expected a string");
    return s->get();
  }

  std::vector<double> numbers(const toml::node& node, const std::string& key) const {
    const auto* arr = node.as_array();
    if (arr == nullptr) fail(&node, key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : *arr) out.push_back(as_number(v, key));
    return out;
  }

  Eigen::VectorXd vector(const toml::table& t, const std::string& prefix,
                         const std::string& key) const {
    const toml::node* node = t.get(key);
    if (node == nullptr) fail(nullptr, prefix + key, "missing value");
    const auto v = numbers(*node, prefix + key);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }

  Eigen::MatrixXd matrix(const toml::table& t, const std::string& prefix,
                         const std::string& key) const {
    const toml::node* node = t.get(key);
    if (node == nullptr) fail(nullptr, prefix + key, "missing value");
    const auto* rows = node->as_array();
    if (rows == nullptr) fail(node, prefix + key, "expected an array of rows");
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows->size()),
                        static_cast<Eigen::Index>(rows->size()));
    Eigen::Index i = 0;
    for (const auto& row : *rows) {
      const auto v = numbers(row, prefix + key);
      if (v.size() != rows->size()) fail(&row, prefix + key, "matrix must be square");
      for (std::size_t j = 0; j < v.size(); ++j) out(i, static_cast<Eigen::Index>(j)) = v[j];
      ++i;
    }
    return out;
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
};

MarketModel read_model(const Reader& rd, const toml::table& t) {
  const std::string p = "model.";
  rd.reject_unknown(t, p,
                    {"n_green", "a", "b", "sigma", "correlation", "r", "lambda", "beta", "sigma_y",
                     "gamma0", "p0"});
  MarketModel m;
  m.a = rd.vector(t, p, "a");
  m.n = static_cast<int>(m.a.size());
  m.k = static_cast<int>(rd.integer(t, p, "n_green", 0));
  m.b = rd.vector(t, p, "b");
  m.sigma = rd.vector(t, p, "sigma");
  m.R = rd.matrix(t, p, "correlation");
  m.r = rd.number(t, p, "r", 0.01);
  m.lambda = rd.number(t, p, "lambda");
  m.beta = rd.number(t, p, "beta");
  m.sigmaY = rd.number(t, p, "sigma_y");
  m.gamma0 = rd.number(t, p, "gamma0");
  m.p0 = rd.number(t, p, "p0");
  return m;
}

SimulationSettings read_simulation(const Reader& rd, const toml::table& t) {
  const std::string p = "simulation.";
  rd.reject_unknown(t, p,
                    {"T", "dt", "n_paths", "seed", "info_modes", "V0", "PL", "ode_steps",
                     "workers"});
  SimulationSettings s;
  s.T = rd.number(t, p, "T", s.T);
  s.dt = rd.number(t, p, "dt", s.dt);
  const auto paths = rd.integer(t, p, "n_paths", static_cast<std::int64_t>(s.nPaths));
  if (paths < 1) rd.fail(t.get("n_paths"), p + "n_paths", "must be at least 1");
  s.nPaths = static_cast<std::size_t>(paths);
  const auto seed = rd.integer(t, p, "seed", static_cast<std::int64_t>(s.seed));
  if (seed < 0) rd.fail(t.get("seed"), p + "seed", "must be nonnegative");
  s.seed = static_cast<std::uint64_t>(seed);
  s.V0 = rd.number(t, p, "V0", s.V0);
  s.PL = rd.number(t, p, "PL", s.PL);
  const auto steps = rd.integer(t, p, "ode_steps", s.odeSteps);
  if (steps < 100 || steps > std::numeric_limits<int>::max()) {
    rd.fail(t.get("ode_steps"), p + "ode_steps", "must be at least 100");
  }
  s.odeSteps = static_cast<int>(steps);
  const auto workers = rd.integer(t, p, "workers", 0);
  if (workers < 0) rd.fail(t.get("workers"), p + "workers", "must be nonnegative");
  s.workers = static_cast<unsigned>(workers);
  if (const toml::node* node = t.get("info_modes")) {
    const auto* arr = node->as_array();
    if (arr == nullptr || arr->empty()) rd.fail(node, p + "info_modes", "expected a nonempty array");
    s.infoModes.clear();
    for (const auto& v : *arr) {
      const auto* str = v.as_string();
      if (str == nullptr) rd.fail(&v, p + "info_modes", "expected strings");
      try {
        s.infoModes.push_back(parse_info_mode(str->get()));
      } catch (const ValidationError& e) {
        rd.fail(&v, p + "info_modes", e.what());
      }
    }
  }
  return s;
}

void validate_config(const ScenarioConfig& c) {
  Market market(c.model);
  for (const auto& s : c.scenarios) {
    if (s.a.size() != c.model.n) {
      throw ValidationError("ValidationError", "scenario '" + s.name + "' drift must have n entries");
    }
  }
  for (const auto& [delta, eps] : c.preferences) PreferenceSpec::crra(delta, eps);
  for (double d : c.deltaGrid) PreferenceSpec::crra(d, 0.0);
  for (double e : c.epsilonGrid) PreferenceSpec::crra(1.0, e);

  SimConfig sim;
  sim.T = c.simulation.T;
  sim.dt = c.simulation.dt;
  sim.nPaths = c.simulation.nPaths;
  sim.V0 = c.simulation.V0;
  sim.PL = c.simulation.PL;
  sim.odeSteps = c.simulation.odeSteps;
  sim.validate(c.model);
}

void emit_float(std::ostream& os, double x) {
  std::string s = fmt17(x);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  os << s;
}

void emit_vector(std::ostream& os, const Eigen::VectorXd& v) {
  os << "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) os << ", ";
    emit_float(os, v(i));
  }
  os << "]";
}

void emit_list(std::ostream& os, const std::vector<double>& v) {
  emit_vector(os, Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::string info_mode_name(InfoMode mode) { return mode == InfoMode::Full ? "full" : "partial"; }

InfoMode parse_info_mode(const std::string& name) {
  if (name == "full") return InfoMode::Full;
  if (name == "partial") return InfoMode::Partial;
  throw ValidationError("ValidationError", "info mode must be 'full' or 'partial', got '" + name + "'");
}

MarketModel ScenarioConfig::scenario_model(const std::string& name) const {
  for (const auto& s : scenarios) {
    if (s.name == name) {
      MarketModel m = model;
      m.a = s.a;
      return m;
    }
  }
  throw ValidationError("UnknownScenario", "no scenario named '" + name + "'");
}

bool operator==(const ScenarioConfig& x, const ScenarioConfig& y) {
  const auto& a = x.model;
  const auto& b = y.model;
  const bool model = a.n == b.n && a.k == b.k && a.a == b.a && a.b == b.b && a.sigma == b.sigma &&
                     a.R == b.R && a.r == b.r && a.lambda == b.lambda && a.beta == b.beta &&
                     a.sigmaY == b.sigmaY && a.gamma0 == b.gamma0 && a.p0 == b.p0;
  return model && x.scenarios == y.scenarios && x.preferences == y.preferences &&
         x.deltaGrid == y.deltaGrid && x.epsilonGrid == y.epsilonGrid &&
         x.simulation == y.simulation && x.outputDir == y.outputDir;
}

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
  const Reader rd(source);
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << e.source().begin.line << ": " << e.description();
    throw ValidationError("ParseError", os.str());
  }
  rd.reject_unknown(root, "", {"model", "scenarios", "preferences", "simulation", "output"});

  ScenarioConfig c;
  c.model = read_model(rd, rd.table(root, "model"));

  if (const toml::node* node = root.get("scenarios")) {
    const auto* arr = node->as_array();
    if (arr == nullptr) rd.fail(node, "scenarios", "expected an array of tables");
    for (const auto& item : *arr) {
      const auto* t = item.as_table();
      if (t == nullptr) rd.fail(&item, "scenarios", "expected a table");
      rd.reject_unknown(*t, "scenarios.", {"name", "a"});
      Scenario s;
      s.name = rd.string(*t, "scenarios.", "name", "");
      if (s.name.empty()) rd.fail(&item, "scenarios.name", "missing value");
      s.a = rd.vector(*t, "scenarios.", "a");
      c.scenarios.push_back(std::move(s));
    }
  }

  if (const toml::node* node = root.get("preferences")) {
    const auto* t = node->as_table();
    if (t == nullptr) rd.fail(node, "preferences", "expected a table");
    rd.reject_unknown(*t, "preferences.", {"pairs", "delta_grid", "epsilon_grid"});
    if (const toml::node* pairs = t->get("pairs")) {
      const auto* arr = pairs->as_array();
      if (arr == nullptr) rd.fail(pairs, "preferences.pairs", "expected an array of pairs");
      for (const auto& p : *arr) {
        const auto v = rd.numbers(p, "preferences.pairs");
        if (v.size() != 2) rd.fail(&p, "preferences.pairs", "each entry is [delta, epsilon]");
        c.preferences.emplace_back(v[0], v[1]);
      }
    }
    if (const toml::node* g = t->get("delta_grid")) c.deltaGrid = rd.numbers(*g, "preferences.delta_grid");
    if (const toml::node* g = t->get("epsilon_grid")) {
      c.epsilonGrid = rd.numbers(*g, "preferences.epsilon_grid");
    }
  }

  if (const toml::node* node = root.get("simulation")) {
    const auto* t = node->as_table();
    if (t == nullptr) rd.fail(node, "simulation", "expected a table");
    c.simulation = read_simulation(rd, *t);
  }

  if (const toml::node* node = root.get("output")) {
    const auto* t = node->as_table();
    if (t == nullptr) rd.fail(node, "output", "expected a table");
    rd.reject_unknown(*t, "output.", {"dir"});
    c.outputDir = rd.string(*t, "output.", "dir", c.outputDir);
  }

  validate_config(c);
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("ParseError", path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string write_config(const ScenarioConfig& c) {
  std::ostringstream os;
  const auto& m = c.model;
  os << "[model]\n";
  os << "n_green = " << m.k << "\n";
  os << "a = ";
  emit_vector(os, m.a);
  os << "\nb = ";
  emit_vector(os, m.b);
  os << "\nsigma = ";
  emit_vector(os, m.sigma);
  os << "\ncorrelation = [\n";
  for (Eigen::Index i = 0; i < m.R.rows(); ++i) {
    os << "  ";
    emit_vector(os, m.R.row(i).transpose());
    os << ",\n";
  }
  os << "]\n";
  const std::pair<const char*, double> scalars[] = {{"r", m.r},           {"lambda", m.lambda},
                                                    {"beta", m.beta},     {"sigma_y", m.sigmaY},
                                                    {"gamma0", m.gamma0}, {"p0", m.p0}};
  for (const auto& [key, value] : scalars) {
    os << key << " = ";
    emit_float(os, value);
    os << "\n";
  }

  for (const auto& s : c.scenarios) {
    os << "\n[[scenarios]]\nname = " << quoted(s.name) << "\na = ";
    emit_vector(os, s.a);
    os << "\n";
  }

  os << "\n[preferences]\npairs = [";
  for (std::size_t i = 0; i < c.preferences.size(); ++i) {
    if (i > 0) os << ", ";
    os << "[";
    emit_float(os, c.preferences[i].first);
    os << ", ";
    emit_float(os, c.preferences[i].second);
    os << "]";
  }
  os << "]\ndelta_grid = ";
  emit_list(os, c.deltaGrid);
  os << "\nepsilon_grid = ";
  emit_list(os, c.epsilonGrid);

  const auto& s = c.simulation;
  os << "\n\n[simulation]\nT = ";
  emit_float(os, s.T);
  os << "\ndt = ";
  emit_float(os, s.dt);
  os << "\nn_paths = " << s.nPaths << "\nseed = " << s.seed << "\ninfo_modes = [";
  for (std::size_t i = 0; i < s.infoModes.size(); ++i) {
    if (i > 0) os << ", ";
    os << quoted(info_mode_name(s.infoModes[i]));
  }
  os << "]\nV0 = ";
  emit_float(os, s.V0);
  os << "\nPL = ";
  emit_float(os, s.PL);
  os << "\node_steps = " << s.odeSteps << "\nworkers = " << s.workers << "\n";

  os << "\n[output]\ndir = " << quoted(c.outputDir) << "\n";
  return os.str();
}

}  // namespace ppi
