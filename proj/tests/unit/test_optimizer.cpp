#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "mixopt/optimizer.hpp"

using namespace mixopt;

namespace {

struct Problem {
  Mesh mesh;
  AdvectionOperator op;
  NeumannLaplacian lap;
  StateVector theta0;

  Problem(int n, StateVector (*init)(const Mesh&))
      : mesh(build_cartesian(n, n)),
        op(mesh, {assemble_flux_table(mesh, cellular_basis(1)),
                  assemble_flux_table(mesh, cellular_basis(2))}),
        lap(mesh),
        theta0(init(mesh)) {}
  Problem(const Problem&) = delete;
};

StateVector tanh_profile(const Mesh& mesh) {
  return project_initial_data(mesh, [](Point p) { return std::tanh((p.y - 0.5) / 0.1); });
}

StateVector constant_profile(const Mesh& mesh) { return StateVector(mesh.num_cells(), 0.5); }

}  // namespace

TEST_CASE("pure penalty problem is solved in one steepest-descent step") {
  // For a constant state J = gamma/2 dt |v|^2 and g = gamma dt v, so alpha = 1/(gamma dt)
  // lands exactly on v = 0.
  const Problem p(6, constant_profile);
  const double gamma = 0.5;
  const double dt = 0.25;
  const Objective obj(p.op, p.lap, p.theta0, objective_options(gamma, 1e-12));
  ControlSchedule v0(2, 4, dt, 1.0);
  OptimizerConfig cfg;
  cfg.alpha0 = 1.0 / (gamma * dt);
  cfg.max_outer = 5;
  const OptimizationReport r = optimize(obj, v0, cfg);
  REQUIRE(r.iterations.size() >= 2);
  CHECK(r.iterations[1].objective == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  CHECK(r.iterations[1].backtracks == 0);
  CHECK(frobenius_norm(r.schedule) < 1e-12);
  CHECK(r.termination != Termination::stalled);
}

TEST_CASE("objective sequence is non-increasing and every step is a descent step") {
  const Problem p(12, tanh_profile);
  const Objective obj(p.op, p.lap, p.theta0, objective_options(1e-6, 1e-12));
  const ControlSchedule v0(2, 20, 0.025, 1.0);
  for (BetaRule rule : {BetaRule::norm_ratio, BetaRule::fletcher_reeves}) {
    OptimizerConfig cfg;
    cfg.beta_rule = rule;
    cfg.max_outer = 8;
    cfg.growth = 2.0;
    std::vector<IterationRecord> seen;
    const OptimizationReport r = optimize(obj, v0, cfg, [&](const IterationRecord& rec) {
      seen.push_back(rec);
    });
    CHECK(r.objective_non_increasing());
    CHECK(seen.size() == r.iterations.size());
    CHECK(r.final_objective() < r.iterations.front().objective);
    for (std::size_t k = 1; k < r.iterations.size(); ++k) {
      CHECK(r.iterations[k].objective <= r.iterations[k - 1].objective);
      CHECK(r.iterations[k].directional_derivative < 0.0);
      CHECK(r.iterations[k].alpha > 0.0);
    }
    CHECK(r.final_objective() == doctest::Approx(obj.value(r.schedule)).epsilon(1e-13));
    CHECK(r.gradient_evaluations == static_cast<int>(r.iterations.size()));
    CHECK(r.objective_evaluations >= r.gradient_evaluations);
  }
}

TEST_CASE("optimizer is deterministic") {
  const Problem p(8, tanh_profile);
  const Objective obj(p.op, p.lap, p.theta0, objective_options(1e-6, 1e-12));
  const ControlSchedule v0(2, 10, 0.05, 1.0);
  OptimizerConfig cfg;
  cfg.max_outer = 4;
  const OptimizationReport a = optimize(obj, v0, cfg);
  const OptimizationReport b = optimize(obj, v0, cfg);
  CHECK(a.schedule == b.schedule);
  CHECK(a.final_objective() == b.final_objective());
}

TEST_CASE("a line search that cannot make progress stalls") {
  const Problem p(8, tanh_profile);
  const Objective obj(p.op, p.lap, p.theta0, objective_options(1e-6, 1e-12));
  const ControlSchedule v0(2, 10, 0.05, 1.0);
  OptimizerConfig cfg;
  cfg.alpha0 = 1e12;
  cfg.max_backtracks = 0;
  const OptimizationReport r = optimize(obj, v0, cfg);
  CHECK(r.termination == Termination::stalled);
  CHECK(r.iterations.size() == 1);
  CHECK(r.schedule == v0);
}

TEST_CASE("larger gamma keeps the controls smaller") {
  const Problem p(8, tanh_profile);
  const ControlSchedule v0(2, 10, 0.05, 1.0);
  OptimizerConfig cfg;
  cfg.max_outer = 6;
  const Objective soft(p.op, p.lap, p.theta0, objective_options(1e-6, 1e-12));
  const Objective stiff(p.op, p.lap, p.theta0, objective_options(1.0, 1e-12));
  const double n_soft = frobenius_norm(optimize(soft, v0, cfg).schedule);
  const double n_stiff = frobenius_norm(optimize(stiff, v0, cfg).schedule);
  CHECK(n_stiff < n_soft);
}

TEST_CASE("optimizer configuration is validated") {
  auto invalid = [](auto mutate) {
    OptimizerConfig cfg;
    mutate(cfg);
    return cfg;
  };
  CHECK_NOTHROW(OptimizerConfig{}.validate());
  CHECK_THROWS_AS(invalid([](auto& c) { c.c = 0.0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(invalid([](auto& c) { c.c = 1.0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(invalid([](auto& c) { c.shrink = 1.0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(invalid([](auto& c) { c.alpha0 = -1.0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(invalid([](auto& c) { c.growth = 0.5; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(invalid([](auto& c) { c.eps_stop = 0.0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(invalid([](auto& c) { c.max_outer = -1; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(invalid([](auto& c) { c.max_backtracks = -1; }).validate(),
                  std::invalid_argument);
  CHECK(parse_beta_rule("fletcher_reeves") == BetaRule::fletcher_reeves);
  CHECK(to_string(parse_beta_rule("norm_ratio")) == "norm_ratio");
  CHECK_THROWS_AS(parse_beta_rule("polak"), std::invalid_argument);
  CHECK(to_string(Termination::stalled) == "stalled");
}
