#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mixopt/elliptic.hpp"
#include "mixopt/experiments/config.hpp"
#include "mixopt/experiments/series.hpp"
#include "mixopt/objective.hpp"
#include "mixopt/optimizer.hpp"

namespace mixopt::experiments {

/// Everything a run needs, assembled from a config. Operators keep pointers
/// to the mesh, so a Scenario is neither copied nor moved.
struct Scenario {
  ScenarioConfig config;
  Mesh mesh;
  std::vector<BasisFlow> flows;
  std::unique_ptr<AdvectionOperator> op;
  std::unique_ptr<NeumannLaplacian> lap;
  StateVector theta0;
  ControlSchedule schedule;  ///< initial guess, or the fixed schedule for simulate
  KrylovOptions krylov;
  CgOptions cg;

  Scenario(const Scenario&) = delete;
  Scenario& operator=(const Scenario&) = delete;
  ObjectiveOptions objective_options() const;

 private:
  friend std::unique_ptr<Scenario> build_scenario(const ScenarioConfig&);
  Scenario() = default;
};

Mesh build_mesh(const MeshSpec& spec);
std::vector<BasisFlow> build_flows(const BasisSpec& spec, const MeshSpec& mesh_spec,
                                   const Mesh& mesh);
ScalarField initial_profile(const InitialSpec& spec);
/// Piecewise-constant schedule for the named guess. `trig` samples
/// v_1 = cos(pi t / 2), v_2 = sin(pi t / 2) at interval midpoints; further
/// modes are zero.
ControlSchedule build_schedule(const ControlSpec& spec, std::size_t num_modes,
                               std::size_t n_steps, double dt);
std::unique_ptr<Scenario> build_scenario(const ScenarioConfig& config);

struct SimulationResult {
  TimeSeries series;
  StateVector final_state;
  std::vector<std::filesystem::path> snapshots;
  double max_mass_drift = 0.0;
  double max_energy_drift_rel = 0.0;
  double max_pairing_drift_rel = 0.0;
};

/// Forward solve under `schedule` with diagnostics. Mix-norm rows are taken
/// every output.mix_stride steps and at T; drift columns hold the largest
/// drift over the steps since the previous row. The pairing uses the adjoint
/// started from eta(theta^N). Snapshots are written only when `out_dir` is
/// non-empty.
SimulationResult simulate_schedule(const Scenario& scenario, const ControlSchedule& schedule,
                                   const std::filesystem::path& out_dir);

/// Writes series.csv and snapshots to out_dir.
SimulationResult run_simulate(const ScenarioConfig& config, const std::filesystem::path& out_dir);

struct OptimizeResult {
  OptimizationReport report;
  SimulationResult simulation;
  DecayFit fit;
  double fit_window[2] = {0.0, 0.0};
};

/// Optimizes from the configured guess, then re-simulates under the result.
/// Writes schedule.csv, series.csv, snapshots and report.json.
OptimizeResult run_optimize(const ScenarioConfig& config, const std::filesystem::path& out_dir,
                            const IterationCallback& progress = nullptr);

struct GradCheckResult {
  std::vector<double> probes;
  std::vector<double> errors;  ///< max relative error per probe
  double best_error = 0.0;
  bool passed = false;
};

/// Compares the adjoint gradient with central differences at a random
/// schedule drawn from `seed`. Writes gradcheck.json.
GradCheckResult run_grad_check(const ScenarioConfig& config, std::uint64_t seed,
                               const std::filesystem::path& out_dir);

struct ConvergenceRow {
  int level = 1;
  double h = 0.0;
  double dt = 0.0;
  double final_mix_norm = 0.0;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  std::vector<double> orders;  ///< from successive differences of final_mix_norm
  bool passed = true;
};

/// Repeats the forward run with mesh sizes times each level and dt divided
/// by it. Writes convergence.csv.
ConvergenceResult run_convergence(const ScenarioConfig& config,
                                  const std::filesystem::path& out_dir);

/// Fit window from the config, defaulting to [0.1 T, T].
std::pair<double, double> decay_window(const ScenarioConfig& config);

}  // namespace mixopt::experiments
