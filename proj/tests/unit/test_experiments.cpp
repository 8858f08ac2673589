#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "mixopt/experiments/scenario.hpp"

using namespace mixopt;
using namespace mixopt::experiments;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(MIXOPT_SCRATCH_DIR) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScenarioConfig tiny_config() {
  ScenarioConfig c;
  c.name = "tiny";
  c.mesh.nx = 8;
  c.mesh.ny = 8;
  c.initial.width = 0.1;
  c.time.final_time = 0.2;
  c.time.dt = 0.02;
  c.output.mix_stride = 2;
  return c;
}

}  // namespace

TEST_CASE("config defaults describe the cellular tanh experiment") {
  const ScenarioConfig c = parse_config("");
  CHECK(c.mesh.kind == "cartesian");
  CHECK(c.mesh.nx == 64);
  CHECK(c.basis.flows == std::vector<std::string>{"cellular1", "cellular2"});
  CHECK(c.initial.profile == "tanh_jump");
  CHECK(c.time.final_time == 1.0);
  CHECK(c.time.dt == 1e-3);
  CHECK(c.n_steps() == 1000);
  CHECK(c.control.guess == "ones");
  CHECK(c.objective.gamma == 1e-6);
  CHECK(c.optimizer.c == 1e-4);
  CHECK(c.optimizer.shrink == 0.5);
  CHECK(c.optimizer.beta_rule == BetaRule::norm_ratio);
  CHECK(c.output.mix_stride == 10);
}

TEST_CASE("every checked-in config parses and survives a round trip") {
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(fs::path(MIXOPT_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() != ".ini") continue;
    ++count;
    CAPTURE(entry.path().string());
    const ScenarioConfig c = load_config(entry.path());
    CHECK(c.name == entry.path().stem().string());
    CHECK_NOTHROW(c.validate());
    CHECK(parse_config(serialize_config(c)) == c);
  }
  CHECK(count >= 10);
}

TEST_CASE("non-default values round-trip exactly") {
  ScenarioConfig c;
  c.name = "everything";
  c.command = "optimize";
  c.mesh.kind = "polar";
  c.mesh.n_r = 7;
  c.mesh.n_phi = 11;
  c.mesh.center = {0.1, -0.3};
  c.mesh.radius = 0.7;
  c.basis.flows = {"doswell", "five_doswell"};
  c.basis.vbar = 1.0 / 3.0;
  c.basis.normalize = true;
  c.initial.profile = "bump";
  c.initial.bump_center = {0.2, -0.1};
  c.initial.bump_width = 0.123456789;
  c.time.final_time = 0.3;
  c.time.dt = 0.1;
  c.control.guess = "constant";
  c.control.values = {0.1, -2.5e-7};
  c.solver.krylov_tol = 3e-11;
  c.solver.gmres_restart = 20;
  c.objective.gamma = 2.2e-5;
  c.objective.adjoint_sampling = "nodal";
  c.optimizer.growth = 2.0;
  c.optimizer.beta_rule = BetaRule::fletcher_reeves;
  c.optimizer.max_outer = 3;
  c.output.snapshot_times = {0.0, 0.1};
  c.output.decay_window = {0.1, 0.3};
  c.convergence.levels = {1, 3};
  c.grad_check.probes = {1e-3};
  REQUIRE_NOTHROW(c.validate());
  const ScenarioConfig back = parse_config(serialize_config(c));
  CHECK(back == c);
  CHECK(back.basis.vbar == 1.0 / 3.0);
}

TEST_CASE("config errors name the offending field") {
  auto message = [](const std::string& text) -> std::string {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.what();
    }
    return "";
  };
  CHECK(message("[mesh]\nsize = 4\n").find("[mesh] size") != std::string::npos);
  CHECK(message("[warp]\nfactor = 9\n").find("warp") != std::string::npos);
  CHECK(message("[mesh]\nnx = four\n").find("[mesh] nx") != std::string::npos);
  CHECK(message("[mesh]\nnx = 1\n").find("nx") != std::string::npos);
  CHECK(message("[time]\nT = 1\ndt = 0.3\n").find("dt") != std::string::npos);
  CHECK(message("[time]\ndt = -1\n").find("dt") != std::string::npos);
  CHECK(message("[basis]\nflows = doswell\n").find("flows") != std::string::npos);
  CHECK(message("[basis]\nflows = cellular1, swirl\n").find("swirl") != std::string::npos);
  CHECK(message("[optimizer]\nc = 2\n").find("[optimizer]") != std::string::npos);
  CHECK(message("[optimizer]\nbeta_rule = hs\n").find("beta_rule") != std::string::npos);
  CHECK(message("[output]\nsnapshot_times = 0.0005\n").find("snapshot_times") !=
        std::string::npos);
  CHECK(message("[mesh]\nnx = 4\nnx = 5\n") != "");
  CHECK(message("[control]\nguess = constant\nvalues = 1\n").find("values") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/config.ini"), ConfigError);
}

TEST_CASE("decay fit recovers an exponential and reports degenerate input") {
  TimeSeries s;
  for (int k = 0; k <= 20; ++k) s.rows.push_back({0.05 * k, 3.0 * std::exp(-2.0 * 0.05 * k)});
  const DecayFit f = fit_decay_rate(s, 0.1, 1.0);
  CHECK(f.rate == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.samples == 19);

  TimeSeries flat;
  for (int k = 0; k < 5; ++k) flat.rows.push_back({0.1 * k, 0.4});
  const DecayFit g = fit_decay_rate(flat, 0.0, 1.0);
  CHECK(g.rate == doctest::Approx(0.0).scale(1.0));
  CHECK(g.r_squared == 1.0);

  CHECK_THROWS_AS(fit_decay_rate(s, 0.1, 0.15), FitError);
  TimeSeries bad = s;
  bad.rows[10].mix_norm = 0.0;
  CHECK_THROWS_AS(fit_decay_rate(bad, 0.0, 1.0), FitError);
}

TEST_CASE("snapshots list one row per cell and round-trip bit-exactly") {
  const fs::path dir = scratch("snapshot");
  const Mesh mesh = build_cartesian(2, 2);
  const StateVector theta{0.1, -1.0 / 3.0, 1e-300, 2.5};
  emit_snapshot(mesh, theta, dir / "s.csv");
  std::ifstream in(dir / "s.csv");
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 6);
  CHECK(lines[0].rfind("# mesh=cartesian h=", 0) == 0);
  CHECK(lines[1] == "x,y,value");
  CHECK(lines[2] == "0.25,0.25,0.1");
  const Snapshot snap = read_snapshot(dir / "s.csv");
  CHECK(snap.mesh_kind == "cartesian");
  CHECK(snap.h == mesh.h());
  CHECK(snap.values == theta);
  CHECK(snap.centroids.size() == 4);
  CHECK(snapshot_filename(0.25) == "snapshot_t0.25.csv");
  CHECK(snapshot_filename(0.0) == "snapshot_t0.csv");
}

TEST_CASE("schedule and series CSV files round-trip") {
  const fs::path dir = scratch("csv");
  ControlSchedule s(2, 5, 0.1);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d;
  for (auto& v : s.flat()) v = d(rng);
  write_schedule_csv(s, dir / "schedule.csv");
  CHECK(read_schedule_csv(dir / "schedule.csv", 0.1) == s);
  CHECK_THROWS(read_schedule_csv(dir / "schedule.csv", 0.2));

  TimeSeries series;
  series.rows = {{0.0, 1.0 / 3.0, 0.0, 0.0, 0.0}, {0.1, 0.25, 1e-17, 2e-13, 3e-12}};
  write_series_csv(series, dir / "series.csv");
  const TimeSeries back = read_series_csv(dir / "series.csv");
  REQUIRE(back.rows.size() == 2);
  CHECK(back.rows[0].mix_norm == 1.0 / 3.0);
  CHECK(back.rows[1].pairing_drift_rel == 3e-12);
  CHECK(slurp(dir / "series.csv").rfind(std::string(kSeriesHeader) + "\n", 0) == 0);
  TimeSeries unordered = series;
  std::swap(unordered.rows[0], unordered.rows[1]);
  CHECK_THROWS_AS(unordered.check(), std::invalid_argument);
}

TEST_CASE("initial guesses") {
  ControlSpec ones;
  const ControlSchedule a = build_schedule(ones, 2, 4, 0.25);
  for (double v : a.flat()) CHECK(v == 1.0);

  ControlSpec trig;
  trig.guess = "trig";
  const ControlSchedule b = build_schedule(trig, 3, 4, 0.25);
  for (std::size_t n = 0; n < 4; ++n) {
    const double t = (n + 0.5) * 0.25;
    CHECK(b(0, n) == doctest::Approx(std::cos(std::numbers::pi * t / 2)));
    CHECK(b(1, n) == doctest::Approx(std::sin(std::numbers::pi * t / 2)));
    CHECK(b(2, n) == 0.0);
  }

  ControlSpec constant;
  constant.guess = "constant";
  constant.values = {2.0, -1.0};
  const ControlSchedule c = build_schedule(constant, 2, 3, 0.1);
  CHECK(c(1, 2) == -1.0);

  const fs::path dir = scratch("guess");
  write_schedule_csv(c, dir / "guess.csv");
  ControlSpec file;
  file.guess = "file";
  file.file = (dir / "guess.csv").string();
  CHECK(build_schedule(file, 2, 3, 0.1) == c);
  CHECK_THROWS(build_schedule(file, 2, 4, 0.1));
}

TEST_CASE("simulate writes a reproducible series with conservation diagnostics") {
  ScenarioConfig c = tiny_config();
  c.control.guess = "constant";
  c.control.values = {1.0, -0.5};
  c.output.snapshot_times = {0.0, 0.2};
  const fs::path a = scratch("sim_a");
  const fs::path b = scratch("sim_b");
  const SimulationResult r = run_simulate(c, a);
  run_simulate(c, b);
  CHECK(slurp(a / "series.csv") == slurp(b / "series.csv"));
  REQUIRE(r.series.rows.size() == 6);
  CHECK(r.series.rows.front().t == 0.0);
  CHECK(r.series.rows.back().t == doctest::Approx(0.2));
  CHECK(r.max_mass_drift <= 1e-12);
  CHECK(r.max_energy_drift_rel <= 1e-9);
  CHECK(r.max_pairing_drift_rel <= 1e-9);
  CHECK(r.series.rows.back().mix_norm < r.series.rows.front().mix_norm);
  CHECK(fs::exists(a / "snapshot_t0.csv"));
  CHECK(fs::exists(a / "snapshot_t0.2.csv"));
  CHECK(r.snapshots.size() == 2);
}

TEST_CASE("optimize writes a report whose objective sequence never increases") {
  ScenarioConfig c = tiny_config();
  c.command = "optimize";
  c.optimizer.max_outer = 3;
  const fs::path dir = scratch("opt");
  const OptimizeResult r = run_optimize(c, dir);
  CHECK(r.report.objective_non_increasing());
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report["objective_non_increasing"].get<bool>());
  CHECK(report["iterations"].size() == r.report.iterations.size());
  CHECK(report["final_objective"].get<double>() == r.report.final_objective());
  CHECK(report.contains("decay_fit"));
  CHECK(read_schedule_csv(dir / "schedule.csv", c.time.dt) == r.report.schedule);
  CHECK(fs::exists(dir / "series.csv"));
}

TEST_CASE("grad-check and convergence drivers") {
  ScenarioConfig c = tiny_config();
  c.grad_check.threshold = 1e-6;
  const fs::path dir = scratch("drivers");
  const GradCheckResult g = run_grad_check(c, 7, dir);
  CHECK(g.errors.size() == c.grad_check.probes.size());
  CHECK(g.best_error <= 1e-6);
  CHECK(g.passed);
  CHECK(fs::exists(dir / "gradcheck.json"));

  ScenarioConfig conv = tiny_config();
  conv.convergence.levels = {1, 2};
  const ConvergenceResult cr = run_convergence(conv, dir);
  REQUIRE(cr.rows.size() == 2);
  CHECK(cr.rows[1].h == doctest::Approx(0.5 * cr.rows[0].h));
  CHECK(cr.rows[1].dt == doctest::Approx(0.5 * cr.rows[0].dt));
  CHECK(fs::exists(dir / "convergence.csv"));
  CHECK(decay_window(conv).first == doctest::Approx(0.02));
  CHECK(decay_window(conv).second == doctest::Approx(0.2));
}
