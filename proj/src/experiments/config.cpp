#include "mixopt/experiments/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace mixopt::experiments {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& s) {
  const std::string t = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw std::invalid_argument("expected a number, got '" + s + "'");
  return v;
}

int to_int(const std::string& s) {
  const std::string t = trim(s);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw std::invalid_argument("expected an integer, got '" + s + "'");
  return v;
}

bool to_bool(const std::string& s) {
  const std::string t = trim(s);
  if (t == "true") return true;
  if (t == "false") return false;
  throw std::invalid_argument("expected true or false, got '" + s + "'");
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt(int v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_same_v<T, std::string>)
      out += xs[i];
    else
      out += fmt(xs[i]);
  }
  return out;
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(ScenarioConfig&, const std::string&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

template <class T>
using Accessor = T& (*)(ScenarioConfig&);

template <class T>
Field make_field(std::string section, std::string key, Accessor<T> acc) {
  Field f{std::move(section), std::move(key), nullptr, nullptr};
  f.set = [acc](ScenarioConfig& c, const std::string& raw) {
    T& slot = acc(c);
    if constexpr (std::is_same_v<T, double>)
      slot = to_double(raw);
    else if constexpr (std::is_same_v<T, int>)
      slot = to_int(raw);
    else if constexpr (std::is_same_v<T, bool>)
      slot = to_bool(raw);
    else if constexpr (std::is_same_v<T, std::string>)
      slot = trim(raw);
    else if constexpr (std::is_same_v<T, std::vector<double>>) {
      slot.clear();
      for (const auto& item : split_list(raw)) slot.push_back(to_double(item));
    } else if constexpr (std::is_same_v<T, std::vector<int>>) {
      slot.clear();
      for (const auto& item : split_list(raw)) slot.push_back(to_int(item));
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      slot = split_list(raw);
    } else if constexpr (std::is_same_v<T, Point>) {
      const auto items = split_list(raw);
      if (items.size() != 2) throw std::invalid_argument("expected 'x, y', got '" + raw + "'");
      slot = Point{to_double(items[0]), to_double(items[1])};
    }
  };
  f.get = [acc](const ScenarioConfig& c) -> std::string {
    const T& slot = acc(const_cast<ScenarioConfig&>(c));
    if constexpr (std::is_same_v<T, std::string>)
      return slot;
    else if constexpr (std::is_same_v<T, std::vector<double>> ||
                       std::is_same_v<T, std::vector<int>> ||
                       std::is_same_v<T, std::vector<std::string>>)
      return join(slot);
    else if constexpr (std::is_same_v<T, Point>)
      return fmt(slot.x) + ", " + fmt(slot.y);
    else
      return fmt(slot);
  };
  return f;
}

#define MIXOPT_FIELD(section, key, type, expr) \
  make_field<type>(section, key, +[](ScenarioConfig& c) -> type& { return expr; })

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> t;
    t.push_back(MIXOPT_FIELD("scenario", "name", std::string, c.name));
    t.push_back(MIXOPT_FIELD("scenario", "command", std::string, c.command));
    t.push_back(MIXOPT_FIELD("mesh", "kind", std::string, c.mesh.kind));
    t.push_back(MIXOPT_FIELD("mesh", "nx", int, c.mesh.nx));
    t.push_back(MIXOPT_FIELD("mesh", "ny", int, c.mesh.ny));
    t.push_back(MIXOPT_FIELD("mesh", "n_r", int, c.mesh.n_r));
    t.push_back(MIXOPT_FIELD("mesh", "n_phi", int, c.mesh.n_phi));
    t.push_back(MIXOPT_FIELD("mesh", "center", Point, c.mesh.center));
    t.push_back(MIXOPT_FIELD("mesh", "radius", double, c.mesh.radius));
    t.push_back(MIXOPT_FIELD("basis", "flows", std::vector<std::string>, c.basis.flows));
    t.push_back(MIXOPT_FIELD("basis", "vbar", double, c.basis.vbar));
    t.push_back(MIXOPT_FIELD("basis", "omega", double, c.basis.omega));
    t.push_back(MIXOPT_FIELD("basis", "normalize", bool, c.basis.normalize));
    t.push_back(MIXOPT_FIELD("initial", "profile", std::string, c.initial.profile));
    t.push_back(MIXOPT_FIELD("initial", "width", double, c.initial.width));
    t.push_back(MIXOPT_FIELD("initial", "level", double, c.initial.level));
    t.push_back(MIXOPT_FIELD("initial", "bump_center", Point, c.initial.bump_center));
    t.push_back(MIXOPT_FIELD("initial", "bump_width", double, c.initial.bump_width));
    t.push_back(MIXOPT_FIELD("initial", "value", double, c.initial.value));
    t.push_back(MIXOPT_FIELD("time", "T", double, c.time.final_time));
    t.push_back(MIXOPT_FIELD("time", "dt", double, c.time.dt));
    t.push_back(MIXOPT_FIELD("control", "guess", std::string, c.control.guess));
    t.push_back(MIXOPT_FIELD("control", "values", std::vector<double>, c.control.values));
    t.push_back(MIXOPT_FIELD("control", "file", std::string, c.control.file));
    t.push_back(MIXOPT_FIELD("solver", "krylov_tol", double, c.solver.krylov_tol));
    t.push_back(MIXOPT_FIELD("solver", "gmres_restart", int, c.solver.gmres_restart));
    t.push_back(
        MIXOPT_FIELD("solver", "gmres_max_iterations", int, c.solver.gmres_max_iterations));
    t.push_back(MIXOPT_FIELD("solver", "cg_tol", double, c.solver.cg_tol));
    t.push_back(MIXOPT_FIELD("solver", "cg_max_iterations", int, c.solver.cg_max_iterations));
    t.push_back(MIXOPT_FIELD("objective", "gamma", double, c.objective.gamma));
    t.push_back(
        MIXOPT_FIELD("objective", "adjoint_sampling", std::string, c.objective.adjoint_sampling));
    t.push_back(MIXOPT_FIELD("optimizer", "c", double, c.optimizer.c));
    t.push_back(MIXOPT_FIELD("optimizer", "shrink", double, c.optimizer.shrink));
    t.push_back(MIXOPT_FIELD("optimizer", "alpha0", double, c.optimizer.alpha0));
    t.push_back(MIXOPT_FIELD("optimizer", "growth", double, c.optimizer.growth));
    t.push_back(MIXOPT_FIELD("optimizer", "eps_stop", double, c.optimizer.eps_stop));
    t.push_back(MIXOPT_FIELD("optimizer", "max_outer", int, c.optimizer.max_outer));
    t.push_back(MIXOPT_FIELD("optimizer", "max_backtracks", int, c.optimizer.max_backtracks));
    {
      Field f{"optimizer", "beta_rule", nullptr, nullptr};
      f.set = [](ScenarioConfig& c, const std::string& raw) {
        c.optimizer.beta_rule = parse_beta_rule(trim(raw));
      };
      f.get = [](const ScenarioConfig& c) { return to_string(c.optimizer.beta_rule); };
      t.push_back(std::move(f));
    }
    t.push_back(MIXOPT_FIELD("output", "dir", std::string, c.output.dir));
    t.push_back(MIXOPT_FIELD("output", "mix_stride", int, c.output.mix_stride));
    t.push_back(
        MIXOPT_FIELD("output", "snapshot_times", std::vector<double>, c.output.snapshot_times));
    t.push_back(
        MIXOPT_FIELD("output", "decay_window", std::vector<double>, c.output.decay_window));
    t.push_back(MIXOPT_FIELD("convergence", "levels", std::vector<int>, c.convergence.levels));
    t.push_back(MIXOPT_FIELD("convergence", "min_order", double, c.convergence.min_order));
    t.push_back(MIXOPT_FIELD("grad_check", "probes", std::vector<double>, c.grad_check.probes));
    t.push_back(MIXOPT_FIELD("grad_check", "threshold", double, c.grad_check.threshold));
    t.push_back(MIXOPT_FIELD("grad_check", "amplitude", double, c.grad_check.amplitude));
    return t;
  }();
  return table;
}

#undef MIXOPT_FIELD

[[noreturn]] void fail(const std::string& section, const std::string& key,
                       const std::string& what) {
  throw ConfigError("[" + section + "] " + key + ": " + what);
}

bool is_cellular(const std::string& name, int* index = nullptr) {
  if (name.rfind("cellular", 0) != 0 || name.size() == 8) return false;
  try {
    const int i = to_int(name.substr(8));
    if (index) *index = i;
    return i >= 1;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

bool on_time_grid(double t, double dt) {
  const double k = t / dt;
  return std::abs(k - std::round(k)) <= 1e-9 * std::max(1.0, std::abs(k));
}

}  // namespace

bool operator==(const OptimizerConfig& a, const OptimizerConfig& b) {
  return a.c == b.c && a.shrink == b.shrink && a.alpha0 == b.alpha0 && a.growth == b.growth &&
         a.eps_stop == b.eps_stop && a.max_outer == b.max_outer &&
         a.max_backtracks == b.max_backtracks && a.beta_rule == b.beta_rule;
}

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
  return a.name == b.name && a.command == b.command && a.mesh == b.mesh && a.basis == b.basis &&
         a.initial == b.initial && a.time == b.time && a.control == b.control &&
         a.solver == b.solver && a.objective == b.objective && a.optimizer == b.optimizer &&
         a.output == b.output && a.convergence == b.convergence && a.grad_check == b.grad_check;
}

std::size_t ScenarioConfig::n_steps() const {
  return static_cast<std::size_t>(std::llround(time.final_time / time.dt));
}

void ScenarioConfig::validate() const {
  if (name.empty()) fail("scenario", "name", "must not be empty");
  if (command != "simulate" && command != "optimize")
    fail("scenario", "command", "expected simulate or optimize, got '" + command + "'");

  const bool polar = mesh.kind == "polar";
  if (mesh.kind != "cartesian" && !polar)
    fail("mesh", "kind", "expected cartesian or polar, got '" + mesh.kind + "'");
  if (polar) {
    if (mesh.n_r < 2) fail("mesh", "n_r", "must be >= 2");
    if (mesh.n_phi < 3) fail("mesh", "n_phi", "must be >= 3");
    if (!(mesh.radius > 0.0)) fail("mesh", "radius", "must be > 0");
  } else {
    if (mesh.nx < 2) fail("mesh", "nx", "must be >= 2");
    if (mesh.ny < 2) fail("mesh", "ny", "must be >= 2");
  }

  if (basis.flows.empty()) fail("basis", "flows", "at least one flow is required");
  for (const auto& f : basis.flows) {
    if (is_cellular(f)) {
      if (polar) fail("basis", "flows", "'" + f + "' lives on the unit square, mesh is polar");
    } else if (f == "doswell" || f == "five_doswell" || f == "rotation") {
      if (!polar) fail("basis", "flows", "'" + f + "' lives on the disc, mesh is cartesian");
    } else {
      fail("basis", "flows",
           "unknown flow '" + f + "' (cellular<i>, doswell, five_doswell, rotation)");
    }
  }
  if (!std::isfinite(basis.vbar)) fail("basis", "vbar", "must be finite");
  if (!std::isfinite(basis.omega)) fail("basis", "omega", "must be finite");

  static const std::set<std::string> profiles{"tanh_jump", "sine", "cosine_x", "bump",
                                              "constant"};
  if (!profiles.count(initial.profile))
    fail("initial", "profile",
         "unknown profile '" + initial.profile + "' (tanh_jump, sine, cosine_x, bump, constant)");
  if (!(initial.width > 0.0)) fail("initial", "width", "must be > 0");
  if (!(initial.bump_width > 0.0)) fail("initial", "bump_width", "must be > 0");

  if (!(time.final_time > 0.0) || !std::isfinite(time.final_time))
    fail("time", "T", "must be > 0");
  if (!(time.dt > 0.0) || !std::isfinite(time.dt)) fail("time", "dt", "must be > 0");
  {
    const double n = std::round(time.final_time / time.dt);
    if (n < 1.0 || std::abs(n * time.dt - time.final_time) > 1e-12 * std::max(1.0, time.final_time))
      fail("time", "dt", "must divide T = " + fmt(time.final_time));
  }

  if (control.guess == "constant") {
    if (control.values.size() != basis.flows.size())
      fail("control", "values",
           "expected " + std::to_string(basis.flows.size()) + " values, one per flow");
  } else if (control.guess == "file") {
    if (control.file.empty()) fail("control", "file", "required when guess = file");
  } else if (control.guess != "ones" && control.guess != "trig") {
    fail("control", "guess",
         "unknown guess '" + control.guess + "' (ones, trig, constant, file)");
  }

  if (!(solver.krylov_tol > 0.0)) fail("solver", "krylov_tol", "must be > 0");
  if (!(solver.cg_tol > 0.0)) fail("solver", "cg_tol", "must be > 0");
  if (solver.gmres_restart < 1) fail("solver", "gmres_restart", "must be >= 1");
  if (solver.gmres_max_iterations < 1) fail("solver", "gmres_max_iterations", "must be >= 1");
  if (solver.cg_max_iterations < 1) fail("solver", "cg_max_iterations", "must be >= 1");

  if (!(objective.gamma >= 0.0)) fail("objective", "gamma", "must be >= 0");
  if (objective.adjoint_sampling != "midpoint" && objective.adjoint_sampling != "nodal")
    fail("objective", "adjoint_sampling", "expected midpoint or nodal");

  try {
    optimizer.validate();
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    const auto dot = msg.find('.');
    const auto colon = msg.find(' ');
    if (msg.rfind("optimizer.", 0) == 0 && dot != std::string::npos && colon != std::string::npos)
      fail("optimizer", msg.substr(dot + 1, colon - dot - 1), msg.substr(colon + 1));
    throw ConfigError("[optimizer] " + msg);
  }

  if (output.dir.empty()) fail("output", "dir", "must not be empty");
  if (output.mix_stride < 1) fail("output", "mix_stride", "must be >= 1");
  for (double t : output.snapshot_times) {
    if (!(t >= 0.0 && t <= time.final_time + 1e-12))
      fail("output", "snapshot_times", "time " + fmt(t) + " lies outside [0, T]");
    if (!on_time_grid(t, time.dt))
      fail("output", "snapshot_times", "time " + fmt(t) + " is not a multiple of dt");
  }
  if (!output.decay_window.empty()) {
    if (output.decay_window.size() != 2)
      fail("output", "decay_window", "expected two values 'a, b'");
    const double a = output.decay_window[0];
    const double b = output.decay_window[1];
    if (!(a >= 0.0 && a < b && b <= time.final_time + 1e-12))
      fail("output", "decay_window", "need 0 <= a < b <= T");
  }

  if (convergence.levels.empty()) fail("convergence", "levels", "must not be empty");
  for (std::size_t i = 0; i < convergence.levels.size(); ++i) {
    if (convergence.levels[i] < 1) fail("convergence", "levels", "factors must be >= 1");
    if (i && convergence.levels[i] <= convergence.levels[i - 1])
      fail("convergence", "levels", "factors must increase");
  }
  if (!(convergence.min_order >= 0.0)) fail("convergence", "min_order", "must be >= 0");

  if (grad_check.probes.empty()) fail("grad_check", "probes", "must not be empty");
  for (double e : grad_check.probes)
    if (!(e > 0.0)) fail("grad_check", "probes", "probes must be > 0");
  if (!(grad_check.threshold > 0.0)) fail("grad_check", "threshold", "must be > 0");
  if (!(grad_check.amplitude > 0.0)) fail("grad_check", "amplitude", "must be > 0");
}

ScenarioConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()) + ": " + e.message());
  }

  std::map<std::pair<std::string, std::string>, const Field*> index;
  std::set<std::string> sections;
  for (const auto& f : fields()) {
    index[{f.section, f.key}] = &f;
    sections.insert(f.section);
  }

  ScenarioConfig config;
  for (const auto& [section, body] : tree) {
    if (!sections.count(section)) {
      if (body.empty())
        throw ConfigError("key '" + section + "' appears outside any section");
      throw ConfigError("[" + section + "]: unknown section");
    }
    for (const auto& [key, value] : body) {
      const auto it = index.find({section, key});
      if (it == index.end()) fail(section, key, "unknown key");
      try {
        it->second->set(config, value.data());
      } catch (const ConfigError&) {
        throw;
      } catch (const std::invalid_argument& e) {
        fail(section, key, e.what());
      }
    }
  }
  config.validate();
  return config;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ScenarioConfig& config) {
  std::string out;
  std::string current;
  for (const auto& f : fields()) {
    if (f.section != current) {
      if (!current.empty()) out += "\n";
      out += "[" + f.section + "]\n";
      current = f.section;
    }
    out += f.key + " = " + f.get(config) + "\n";
  }
  return out;
}

}  // namespace mixopt::experiments
