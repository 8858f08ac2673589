#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixopt/objective.hpp"
#include "mixopt/optimizer.hpp"

namespace mixopt::experiments {

/// Invalid scenario file or value. The message names the offending field
/// as "[section] key".
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct MeshSpec {
  std::string kind = "cartesian";  ///< cartesian | polar
  int nx = 64;
  int ny = 64;
  int n_r = 64;
  int n_phi = 64;
  Point center{0.5, 0.5};
  double radius = 0.5;
  friend bool operator==(const MeshSpec&, const MeshSpec&) = default;
};

struct BasisSpec {
  /// Each entry is cellular<i>, doswell, five_doswell or rotation.
  std::vector<std::string> flows{"cellular1", "cellular2"};
  double vbar = 1.0;
  double omega = 1.0;
  bool normalize = false;
  friend bool operator==(const BasisSpec&, const BasisSpec&) = default;
};

struct InitialSpec {
  std::string profile = "tanh_jump";  ///< tanh_jump | sine | cosine_x | bump | constant
  double width = 0.01;                ///< tanh_jump: interface width
  double level = 0.5;                 ///< tanh_jump: interface height y0
  Point bump_center{0.5, 0.75};
  double bump_width = 0.1;
  double value = 0.0;                 ///< constant
  friend bool operator==(const InitialSpec&, const InitialSpec&) = default;
};

struct TimeSpec {
  double final_time = 1.0;
  double dt = 1e-3;
  friend bool operator==(const TimeSpec&, const TimeSpec&) = default;
};

struct ControlSpec {
  std::string guess = "ones";   ///< ones | trig | constant | file
  std::vector<double> values;   ///< constant: one value per mode
  std::string file;             ///< file: schedule CSV as written by `optimize`
  friend bool operator==(const ControlSpec&, const ControlSpec&) = default;
};

struct SolverSpec {
  double krylov_tol = 1e-12;
  int gmres_restart = 50;
  int gmres_max_iterations = 5000;
  double cg_tol = 1e-12;
  int cg_max_iterations = 200000;
  friend bool operator==(const SolverSpec&, const SolverSpec&) = default;
};

struct ObjectiveSpec {
  double gamma = 1e-6;
  std::string adjoint_sampling = "midpoint";  ///< midpoint | nodal
  friend bool operator==(const ObjectiveSpec&, const ObjectiveSpec&) = default;
};

struct OutputSpec {
  std::string dir = "out";
  int mix_stride = 10;
  std::vector<double> snapshot_times;
  /// Fit window [a, b]; empty selects [0.1 T, T].
  std::vector<double> decay_window;
  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct ConvergenceSpec {
  std::vector<int> levels{1, 2, 4};  ///< refinement factors applied to mesh sizes and 1/dt
  double min_order = 0.0;            ///< gate; 0 disables
  friend bool operator==(const ConvergenceSpec&, const ConvergenceSpec&) = default;
};

struct GradCheckSpec {
  std::vector<double> probes{1e-4, 1e-5, 1e-6};
  double threshold = 1e-6;
  double amplitude = 2.0;  ///< random schedule entries drawn from [-a, a]
  friend bool operator==(const GradCheckSpec&, const GradCheckSpec&) = default;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::string command = "simulate";  ///< batch mode: simulate | optimize
  MeshSpec mesh;
  BasisSpec basis;
  InitialSpec initial;
  TimeSpec time;
  ControlSpec control;
  SolverSpec solver;
  ObjectiveSpec objective;
  OptimizerConfig optimizer;
  OutputSpec output;
  ConvergenceSpec convergence;
  GradCheckSpec grad_check;

  std::size_t n_steps() const;
  /// Throws ConfigError on the first invalid field.
  void validate() const;
  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&);
};

bool operator==(const OptimizerConfig& a, const OptimizerConfig& b);

/// Parses the sectioned key = value format. Unknown sections or keys are
/// errors; missing keys keep their defaults. The result is validated.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Writes every field; doubles use 17 significant digits so parsing the
/// output reproduces the config exactly.
std::string serialize_config(const ScenarioConfig& config);

}  // namespace mixopt::experiments
