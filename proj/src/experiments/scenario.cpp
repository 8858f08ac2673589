#include "mixopt/experiments/scenario.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <map>
#include <random>

namespace mixopt::experiments {

namespace {

using json = nlohmann::ordered_json;

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

double relative(double drift, double scale) { return scale != 0.0 ? drift / std::abs(scale) : drift; }

}  // namespace

ObjectiveOptions Scenario::objective_options() const {
  ObjectiveOptions o;
  o.gamma = config.objective.gamma;
  o.krylov = krylov;
  o.cg = cg;
  o.sampling = config.objective.adjoint_sampling == "nodal" ? AdjointSampling::nodal
                                                            : AdjointSampling::midpoint;
  return o;
}

Mesh build_mesh(const MeshSpec& spec) {
  if (spec.kind == "polar") return build_polar(spec.n_r, spec.n_phi, spec.center, spec.radius);
  if (spec.kind == "cartesian") return build_cartesian(spec.nx, spec.ny);
  throw ConfigError("[mesh] kind: unknown mesh kind '" + spec.kind + "'");
}

std::vector<BasisFlow> build_flows(const BasisSpec& spec, const MeshSpec& mesh_spec,
                                   const Mesh& mesh) {
  std::vector<BasisFlow> flows;
  for (const auto& name : spec.flows) {
    BasisFlow flow;
    if (name.rfind("cellular", 0) == 0) {
      flow = cellular_basis(std::stoi(name.substr(8)));
    } else if (name == "doswell") {
      flow = doswell_basis(mesh_spec.center, spec.vbar);
    } else if (name == "five_doswell") {
      flow = five_cell_doswell_basis(mesh_spec.center, mesh_spec.radius, spec.vbar);
    } else if (name == "rotation") {
      flow = rigid_rotation_flow(mesh_spec.center, spec.omega);
    } else {
      throw ConfigError("[basis] flows: unknown flow '" + name + "'");
    }
    if (spec.normalize) flow = normalized(flow, l2_norm(flow, mesh));
    flows.push_back(std::move(flow));
  }
  return flows;
}

ScalarField initial_profile(const InitialSpec& spec) {
  if (spec.profile == "tanh_jump") {
    const double level = spec.level;
    const double width = spec.width;
    return [level, width](Point p) { return std::tanh((p.y - level) / width); };
  }
  if (spec.profile == "sine") return [](Point p) { return std::sin(2.0 * M_PI * p.y); };
  if (spec.profile == "cosine_x") return [](Point p) { return std::cos(M_PI * p.x); };
  if (spec.profile == "bump") {
    const Point c = spec.bump_center;
    const double w2 = spec.bump_width * spec.bump_width;
    return [c, w2](Point p) {
      const double dx = p.x - c.x;
      const double dy = p.y - c.y;
      return std::exp(-(dx * dx + dy * dy) / w2);
    };
  }
  if (spec.profile == "constant") {
    const double v = spec.value;
    return [v](Point) { return v; };
  }
  throw ConfigError("[initial] profile: unknown profile '" + spec.profile + "'");
}

ControlSchedule build_schedule(const ControlSpec& spec, std::size_t num_modes,
                               std::size_t n_steps, double dt) {
  if (spec.guess == "ones") return ControlSchedule(num_modes, n_steps, dt, 1.0);
  if (spec.guess == "trig") {
    ControlSchedule s(num_modes, n_steps, dt, 0.0);
    for (std::size_t n = 0; n < n_steps; ++n) {
      const double t = (static_cast<double>(n) + 0.5) * dt;
      s(0, n) = std::cos(M_PI * t / 2.0);
      if (num_modes > 1) s(1, n) = std::sin(M_PI * t / 2.0);
    }
    return s;
  }
  if (spec.guess == "constant") {
    if (spec.values.size() != num_modes)
      throw ConfigError("[control] values: expected one value per flow");
    ControlSchedule s(num_modes, n_steps, dt, 0.0);
    for (std::size_t i = 0; i < num_modes; ++i)
      for (std::size_t n = 0; n < n_steps; ++n) s(i, n) = spec.values[i];
    return s;
  }
  if (spec.guess == "file") {
    ControlSchedule s;
    try {
      s = read_schedule_csv(spec.file, dt);
    } catch (const std::runtime_error& e) {
      throw ConfigError(std::string("[control] file: ") + e.what());
    }
    if (s.num_modes() != num_modes || s.n_steps() != n_steps)
      throw ConfigError("[control] file: schedule is " + std::to_string(s.num_modes()) + " x " +
                        std::to_string(s.n_steps()) + ", scenario needs " +
                        std::to_string(num_modes) + " x " + std::to_string(n_steps));
    return s;
  }
  throw ConfigError("[control] guess: unknown guess '" + spec.guess + "'");
}

std::unique_ptr<Scenario> build_scenario(const ScenarioConfig& config) {
  config.validate();
  std::unique_ptr<Scenario> s(new Scenario());
  s->config = config;
  s->mesh = build_mesh(config.mesh);
  s->flows = build_flows(config.basis, config.mesh, s->mesh);
  std::vector<FluxTable> tables;
  for (const auto& f : s->flows) tables.push_back(assemble_flux_table(s->mesh, f));
  s->op = std::make_unique<AdvectionOperator>(s->mesh, std::move(tables));
  s->lap = std::make_unique<NeumannLaplacian>(s->mesh);
  s->theta0 = project_initial_data(s->mesh, initial_profile(config.initial));
  s->schedule =
      build_schedule(config.control, s->flows.size(), config.n_steps(), config.time.dt);
  s->krylov.tol = config.solver.krylov_tol;
  s->krylov.restart = config.solver.gmres_restart;
  s->krylov.max_iterations = config.solver.gmres_max_iterations;
  s->cg.tol = config.solver.cg_tol;
  s->cg.max_iterations = config.solver.cg_max_iterations;
  return s;
}

std::pair<double, double> decay_window(const ScenarioConfig& config) {
  if (config.output.decay_window.size() == 2)
    return {config.output.decay_window[0], config.output.decay_window[1]};
  return {0.1 * config.time.final_time, config.time.final_time};
}

SimulationResult simulate_schedule(const Scenario& scenario, const ControlSchedule& schedule,
                                   const std::filesystem::path& out_dir) {
  const Mesh& mesh = scenario.mesh;
  const AdvectionOperator& op = *scenario.op;
  const std::size_t N = schedule.n_steps();
  const double dt = schedule.dt();
  const std::size_t stride = static_cast<std::size_t>(scenario.config.output.mix_stride);

  ForwardTrajectory traj(op, scenario.theta0, schedule, scenario.krylov,
                         ObjectiveOptions{}.trajectory_memory_bytes);

  // Adjoint sweep first: pairing drift per step relative to <theta^N, rho^N>.
  std::vector<double> pairing_drift(N + 1, 0.0);
  {
    const StateVector& thetaN = traj.final_state();
    StateVector rho = solve_poisson_zero_mean(*scenario.lap, thetaN, scenario.cg);
    const double pN = pairing(mesh, thetaN, rho);
    for (std::size_t n = N; n-- > 0;) {
      rho = cn_step(op, rho, schedule.step_coefficients(n), dt, Direction::backward,
                    scenario.krylov);
      pairing_drift[n] = relative(std::abs(pairing(mesh, traj.at(n), rho) - pN), pN);
    }
  }

  std::map<std::size_t, double> snapshot_steps;
  for (double t : scenario.config.output.snapshot_times)
    snapshot_steps[static_cast<std::size_t>(std::llround(t / dt))] = t;

  SimulationResult result;
  const double m0 = mass(mesh, scenario.theta0);
  const double e0 = energy(mesh, scenario.theta0);
  SeriesRow pending;
  for (std::size_t n = 0; n <= N; ++n) {
    const StateVector& theta = traj.at(n);
    const double md = std::abs(mass(mesh, theta) - m0);
    const double ed = relative(std::abs(energy(mesh, theta) - e0), e0);
    pending.mass_drift = std::max(pending.mass_drift, md);
    pending.energy_drift_rel = std::max(pending.energy_drift_rel, ed);
    pending.pairing_drift_rel = std::max(pending.pairing_drift_rel, pairing_drift[n]);
    result.max_mass_drift = std::max(result.max_mass_drift, md);
    result.max_energy_drift_rel = std::max(result.max_energy_drift_rel, ed);
    result.max_pairing_drift_rel = std::max(result.max_pairing_drift_rel, pairing_drift[n]);

    if (n % stride == 0 || n == N) {
      pending.t = static_cast<double>(n) * dt;
      pending.mix_norm = mix_norm(*scenario.lap, theta, scenario.cg);
      result.series.rows.push_back(pending);
      pending = SeriesRow{};
    }
    if (!out_dir.empty()) {
      if (const auto it = snapshot_steps.find(n); it != snapshot_steps.end()) {
        const auto path = out_dir / snapshot_filename(it->second);
        emit_snapshot(mesh, theta, path);
        result.snapshots.push_back(path);
      }
    }
  }
  result.final_state = traj.final_state();
  result.series.check();
  return result;
}

SimulationResult run_simulate(const ScenarioConfig& config, const std::filesystem::path& out_dir) {
  const auto scenario = build_scenario(config);
  SimulationResult result = simulate_schedule(*scenario, scenario->schedule, out_dir);
  write_series_csv(result.series, out_dir / "series.csv");
  return result;
}

OptimizeResult run_optimize(const ScenarioConfig& config, const std::filesystem::path& out_dir,
                            const IterationCallback& progress) {
  const auto scenario = build_scenario(config);
  const Objective objective(*scenario->op, *scenario->lap, scenario->theta0,
                            scenario->objective_options());
  OptimizeResult result;
  result.report = optimize(objective, scenario->schedule, config.optimizer, progress);
  write_schedule_csv(result.report.schedule, out_dir / "schedule.csv");
  result.simulation = simulate_schedule(*scenario, result.report.schedule, out_dir);
  write_series_csv(result.simulation.series, out_dir / "series.csv");

  const auto [a, b] = decay_window(config);
  result.fit_window[0] = a;
  result.fit_window[1] = b;
  result.fit = fit_decay_rate(result.simulation.series, a, b);

  json report;
  report["scenario"] = config.name;
  report["termination"] = to_string(result.report.termination);
  report["objective_evaluations"] = result.report.objective_evaluations;
  report["gradient_evaluations"] = result.report.gradient_evaluations;
  report["initial_objective"] = result.report.iterations.front().objective;
  report["final_objective"] = result.report.final_objective();
  report["objective_non_increasing"] = result.report.objective_non_increasing();
  json iters = json::array();
  for (const auto& r : result.report.iterations) {
    iters.push_back({{"iteration", r.iteration},
                     {"objective", r.objective},
                     {"gradient_norm", r.gradient_norm},
                     {"alpha", r.alpha},
                     {"backtracks", r.backtracks},
                     {"restarted", r.restarted},
                     {"directional_derivative", r.directional_derivative}});
  }
  report["iterations"] = iters;
  report["final_mix_norm"] = result.simulation.series.rows.back().mix_norm;
  report["decay_fit"] = {{"window", {a, b}},
                         {"rate", result.fit.rate},
                         {"r_squared", result.fit.r_squared},
                         {"samples", result.fit.samples}};
  report["max_drift"] = {{"mass", result.simulation.max_mass_drift},
                         {"energy_rel", result.simulation.max_energy_drift_rel},
                         {"pairing_rel", result.simulation.max_pairing_drift_rel}};
  write_text(out_dir / "report.json", report.dump(2) + "\n");
  return result;
}

GradCheckResult run_grad_check(const ScenarioConfig& config, std::uint64_t seed,
                               const std::filesystem::path& out_dir) {
  const auto scenario = build_scenario(config);
  const Objective objective(*scenario->op, *scenario->lap, scenario->theta0,
                            scenario->objective_options());
  ControlSchedule schedule = scenario->schedule;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-config.grad_check.amplitude,
                                              config.grad_check.amplitude);
  for (auto& v : schedule.flat()) v = dist(rng);

  const GradientArray g = objective.value_and_gradient(schedule).gradient;
  GradCheckResult result;
  result.best_error = std::numeric_limits<double>::infinity();
  for (double eps : config.grad_check.probes) {
    const double err = max_relative_error(g, objective.finite_difference_gradient(schedule, eps));
    result.probes.push_back(eps);
    result.errors.push_back(err);
    result.best_error = std::min(result.best_error, err);
  }
  result.passed = result.best_error <= config.grad_check.threshold;

  json out;
  out["scenario"] = config.name;
  out["seed"] = seed;
  out["adjoint_sampling"] = config.objective.adjoint_sampling;
  json probes = json::array();
  for (std::size_t k = 0; k < result.probes.size(); ++k)
    probes.push_back({{"eps", result.probes[k]}, {"max_relative_error", result.errors[k]}});
  out["probes"] = probes;
  out["best_error"] = result.best_error;
  out["threshold"] = config.grad_check.threshold;
  out["passed"] = result.passed;
  write_text(out_dir / "gradcheck.json", out.dump(2) + "\n");
  return result;
}

ConvergenceResult run_convergence(const ScenarioConfig& config,
                                  const std::filesystem::path& out_dir) {
  if (config.control.guess == "file")
    throw ConfigError("[control] guess: convergence runs need a guess that can be resampled");
  ConvergenceResult result;
  for (int level : config.convergence.levels) {
    ScenarioConfig c = config;
    c.mesh.nx *= level;
    c.mesh.ny *= level;
    c.mesh.n_r *= level;
    c.mesh.n_phi *= level;
    c.time.dt /= level;
    c.output.snapshot_times.clear();
    c.output.mix_stride = 1 << 30;
    const auto scenario = build_scenario(c);
    StateVector theta = scenario->theta0;
    for (std::size_t n = 0; n < scenario->schedule.n_steps(); ++n)
      theta = cn_step(*scenario->op, theta, scenario->schedule.step_coefficients(n), c.time.dt,
                      Direction::forward, scenario->krylov);
    result.rows.push_back(
        {level, scenario->mesh.h(), c.time.dt, mix_norm(*scenario->lap, theta, scenario->cg)});
  }
  for (std::size_t k = 0; k + 2 < result.rows.size(); ++k) {
    const double e0 = std::abs(result.rows[k + 1].final_mix_norm - result.rows[k].final_mix_norm);
    const double e1 =
        std::abs(result.rows[k + 2].final_mix_norm - result.rows[k + 1].final_mix_norm);
    const double ratio = static_cast<double>(result.rows[k + 1].level) / result.rows[k].level;
    result.orders.push_back(std::log(e0 / e1) / std::log(ratio));
  }
  if (config.convergence.min_order > 0.0) {
    result.passed = !result.orders.empty();
    for (double p : result.orders)
      if (!(p >= config.convergence.min_order)) result.passed = false;
  }

  std::string csv = "level,h,dt,final_mix_norm\n";
  for (const auto& r : result.rows)
    csv += std::to_string(r.level) + "," + format_double(r.h) + "," + format_double(r.dt) + "," +
           format_double(r.final_mix_norm) + "\n";
  write_text(out_dir / "convergence.csv", csv);
  return result;
}

}  // namespace mixopt::experiments
