// Command-line front end: simulate, optimize, grad-check, convergence, batch.

#include <CLI11.hpp>
#include <cstdio>
#include <future>
#include <iostream>
#include <optional>

#include "mixopt/experiments/scenario.hpp"

namespace {

using namespace mixopt;
using namespace mixopt::experiments;

enum ExitCode : int { kOk = 0, kConfigError = 2, kSolverError = 3, kGateFailure = 4 };

struct CommonOptions {
  std::string config;
  std::string out;
  std::optional<double> tol;
  std::uint64_t seed = 0;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("config", o.config, "Scenario file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "Output directory (overrides [output] dir)");
  cmd->add_option("--tol", o.tol, "Krylov and CG tolerance (overrides [solver])")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Seed for randomized harnesses such as grad-check");
  cmd->add_flag("-q,--quiet", o.quiet, "Suppress progress output");
}

ScenarioConfig load(const CommonOptions& o) {
  ScenarioConfig c = load_config(o.config);
  if (!o.out.empty()) c.output.dir = o.out;
  if (o.tol) {
    c.solver.krylov_tol = *o.tol;
    c.solver.cg_tol = *o.tol;
  }
  c.validate();
  return c;
}

/// Maps exceptions to exit codes with a one-line message on stderr.
template <class F>
int guarded(const std::string& label, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << label << ": config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const SolverError& e) {
    std::cerr << label << ": solver failure: " << e.what() << "\n";
    return kSolverError;
  } catch (const std::exception& e) {
    std::cerr << label << ": " << e.what() << "\n";
    return kSolverError;
  }
}

int cmd_simulate(const ScenarioConfig& c, bool quiet) {
  const auto r = run_simulate(c, c.output.dir);
  if (!quiet) {
    std::fprintf(stderr, "simulate %s: %zu rows, final mix-norm %.6e\n", c.name.c_str(),
                 r.series.rows.size(), r.series.rows.back().mix_norm);
    std::fprintf(stderr, "  max drift: mass %.3e energy %.3e pairing %.3e\n", r.max_mass_drift,
                 r.max_energy_drift_rel, r.max_pairing_drift_rel);
  }
  return kOk;
}

int cmd_optimize(const ScenarioConfig& c, bool quiet) {
  IterationCallback progress;
  if (!quiet) {
    progress = [](const IterationRecord& r) {
      std::fprintf(stderr, "  iter %3d  J %.6e  |g| %.3e  alpha %.3e  backtracks %d%s\n",
                   r.iteration, r.objective, r.gradient_norm, r.alpha, r.backtracks,
                   r.restarted ? "  restart" : "");
    };
  }
  const auto r = run_optimize(c, c.output.dir, progress);
  if (!quiet) {
    std::fprintf(stderr, "optimize %s: %s after %zu iterations, final mix-norm %.6e\n",
                 c.name.c_str(), to_string(r.report.termination).c_str(),
                 r.report.iterations.size() - 1, r.simulation.series.rows.back().mix_norm);
    std::fprintf(stderr, "  decay rate %.4f (r^2 %.4f) on [%g, %g]\n", r.fit.rate,
                 r.fit.r_squared, r.fit_window[0], r.fit_window[1]);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal mixing by incompressible flows: finite-volume solver and optimizer"};
  app.require_subcommand(1);

  CommonOptions sim, opt, grad, conv;
  auto* simulate = app.add_subcommand("simulate", "Forward run under the configured schedule");
  add_common(simulate, sim);
  auto* optimize = app.add_subcommand("optimize", "Optimize the control, then re-simulate");
  add_common(optimize, opt);
  auto* grad_check =
      app.add_subcommand("grad-check", "Adjoint gradient against central differences");
  add_common(grad_check, grad);
  auto* convergence = app.add_subcommand("convergence", "Mesh and time-step refinement study");
  add_common(convergence, conv);

  std::vector<std::string> batch_configs;
  std::string batch_out = "out";
  std::optional<double> batch_tol;
  auto* batch = app.add_subcommand("batch", "Run several scenarios concurrently");
  batch->add_option("configs", batch_configs, "Scenario files")
      ->required()
      ->check(CLI::ExistingFile);
  batch->add_option("--out", batch_out, "Parent directory; each scenario writes to <out>/<name>");
  batch->add_option("--tol", batch_tol, "Krylov and CG tolerance")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (*simulate)
    return guarded("simulate", [&] { return cmd_simulate(load(sim), sim.quiet); });
  if (*optimize)
    return guarded("optimize", [&] { return cmd_optimize(load(opt), opt.quiet); });
  if (*grad_check) {
    return guarded("grad-check", [&] {
      const auto c = load(grad);
      const auto r = run_grad_check(c, grad.seed, c.output.dir);
      if (!grad.quiet) {
        for (std::size_t k = 0; k < r.probes.size(); ++k)
          std::fprintf(stderr, "  eps %.0e  max relative error %.3e\n", r.probes[k], r.errors[k]);
        std::fprintf(stderr, "grad-check %s: best %.3e (threshold %.1e) %s\n", c.name.c_str(),
                     r.best_error, c.grad_check.threshold, r.passed ? "PASS" : "FAIL");
      }
      return r.passed ? kOk : kGateFailure;
    });
  }
  if (*convergence) {
    return guarded("convergence", [&] {
      const auto c = load(conv);
      const auto r = run_convergence(c, c.output.dir);
      if (!conv.quiet) {
        for (const auto& row : r.rows)
          std::fprintf(stderr, "  level %d  h %.4e  dt %.3e  final mix-norm %.10e\n", row.level,
                       row.h, row.dt, row.final_mix_norm);
        for (double p : r.orders) std::fprintf(stderr, "  observed order %.3f\n", p);
      }
      return r.passed ? kOk : kGateFailure;
    });
  }
  if (*batch) {
    std::vector<std::future<int>> jobs;
    for (const auto& path : batch_configs) {
      jobs.push_back(std::async(std::launch::async, [path, batch_out, batch_tol] {
        return guarded(path, [&] {
          CommonOptions o;
          o.config = path;
          o.tol = batch_tol;
          o.quiet = true;
          ScenarioConfig c = load(o);
          c.output.dir = (std::filesystem::path(batch_out) / c.name).string();
          const int code = c.command == "optimize" ? cmd_optimize(c, true) : cmd_simulate(c, true);
          std::fprintf(stderr, "batch: %s -> %s\n", path.c_str(), c.output.dir.c_str());
          return code;
        });
      }));
    }
    int worst = kOk;
    for (auto& j : jobs) worst = std::max(worst, j.get());
    return worst;
  }
  return kOk;
}
