#include "mixopt/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace mixopt {

void OptimizerConfig::validate() const {
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("optimizer.c must lie in (0, 1)");
  if (!(shrink > 0.0 && shrink < 1.0))
    throw std::invalid_argument("optimizer.shrink must lie in (0, 1)");
  if (!(alpha0 >= 0.0) || !std::isfinite(alpha0))
    throw std::invalid_argument("optimizer.alpha0 must be >= 0 (0 selects 1/||g0||)");
  if (!(growth >= 1.0) || !std::isfinite(growth))
    throw std::invalid_argument("optimizer.growth must be >= 1");
  if (!(eps_stop > 0.0)) throw std::invalid_argument("optimizer.eps_stop must be > 0");
  if (max_outer < 0) throw std::invalid_argument("optimizer.max_outer must be >= 0");
  if (max_backtracks < 0) throw std::invalid_argument("optimizer.max_backtracks must be >= 0");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_outer: return "max_outer";
    case Termination::stalled: return "stalled";
  }
  return "unknown";
}

std::string to_string(BetaRule r) {
  return r == BetaRule::norm_ratio ? "norm_ratio" : "fletcher_reeves";
}

BetaRule parse_beta_rule(const std::string& s) {
  if (s == "norm_ratio") return BetaRule::norm_ratio;
  if (s == "fletcher_reeves") return BetaRule::fletcher_reeves;
  throw std::invalid_argument("unknown beta rule '" + s + "' (norm_ratio | fletcher_reeves)");
}

bool OptimizationReport::objective_non_increasing() const {
  for (std::size_t k = 1; k < iterations.size(); ++k)
    if (iterations[k].objective > iterations[k - 1].objective) return false;
  return true;
}

namespace {

ControlSchedule negated(const ControlSchedule& g) {
  ControlSchedule d = g;
  for (auto& x : d.flat()) x = -x;
  return d;
}

ControlSchedule step(const ControlSchedule& v, double alpha, const ControlSchedule& d) {
  ControlSchedule out = v;
  axpy(alpha, d.flat(), out.flat());
  return out;
}

struct LineSearchResult {
  bool accepted = false;
  double alpha = 0.0;
  double value = 0.0;
  int backtracks = 0;
};

LineSearchResult armijo(const Objective& objective, const ControlSchedule& v, double j,
                        const ControlSchedule& d, double slope, double trial,
                        const OptimizerConfig& cfg, int& evaluations) {
  LineSearchResult r;
  double alpha = trial;
  for (int b = 0; b <= cfg.max_backtracks; ++b) {
    const double jt = objective.value(step(v, alpha, d));
    ++evaluations;
    if (std::isfinite(jt) && jt <= j + cfg.c * alpha * slope) {
      r.accepted = true;
      r.alpha = alpha;
      r.value = jt;
      r.backtracks = b;
      return r;
    }
    alpha *= cfg.shrink;
  }
  r.backtracks = cfg.max_backtracks;
  return r;
}

}  // namespace

OptimizationReport optimize(const Objective& objective, const ControlSchedule& schedule0,
                            const OptimizerConfig& config, const IterationCallback& callback) {
  config.validate();
  for (double x : schedule0.flat())
    if (!std::isfinite(x)) throw std::invalid_argument("optimize: non-finite initial schedule");

  OptimizationReport report;
  ControlSchedule v = schedule0;
  auto vg = objective.value_and_gradient(v);
  ++report.gradient_evaluations;
  double j = vg.value;
  ControlSchedule g = std::move(vg.gradient);
  double gnorm = frobenius_norm(g);

  IterationRecord rec0;
  rec0.objective = j;
  rec0.gradient_norm = gnorm;
  report.iterations.push_back(rec0);
  if (callback) callback(rec0);

  ControlSchedule d = negated(g);
  double alpha_prev = config.alpha0 > 0.0 ? config.alpha0 : (gnorm > 0.0 ? 1.0 / gnorm : 1.0);
  bool restarted = false;
  report.termination = Termination::max_outer;

  for (int k = 1; k <= config.max_outer; ++k) {
    if (gnorm == 0.0) {
      report.termination = Termination::converged;
      break;
    }
    double slope = frobenius_dot(g, d);
    if (!(slope < 0.0)) {
      d = negated(g);
      slope = -gnorm * gnorm;
      restarted = true;
    }
    const double trial = k == 1 ? alpha_prev : config.growth * alpha_prev;
    LineSearchResult ls =
        armijo(objective, v, j, d, slope, trial, config, report.objective_evaluations);
    if (!ls.accepted && !restarted) {
      d = negated(g);
      slope = -gnorm * gnorm;
      restarted = true;
      ls = armijo(objective, v, j, d, slope, trial, config, report.objective_evaluations);
    }
    if (!ls.accepted) {
      report.termination = Termination::stalled;
      break;
    }

    v = step(v, ls.alpha, d);
    const double j_prev = j;
    vg = objective.value_and_gradient(v);
    ++report.gradient_evaluations;
    j = vg.value;
    ControlSchedule g_new = std::move(vg.gradient);
    const double gnorm_new = frobenius_norm(g_new);

    IterationRecord rec;
    rec.iteration = k;
    rec.objective = j;
    rec.gradient_norm = gnorm_new;
    rec.alpha = ls.alpha;
    rec.backtracks = ls.backtracks;
    rec.restarted = restarted;
    rec.directional_derivative = slope;
    report.iterations.push_back(rec);
    if (callback) callback(rec);

    alpha_prev = ls.alpha;
    if (std::abs(j - j_prev) < config.eps_stop * std::abs(j_prev)) {
      report.termination = Termination::converged;
      break;
    }

    const double ratio = gnorm > 0.0 ? gnorm_new / gnorm : 0.0;
    const double beta = config.beta_rule == BetaRule::norm_ratio ? ratio : ratio * ratio;
    for (std::size_t e = 0; e < d.flat().size(); ++e)
      d.flat()[e] = -g_new.flat()[e] + beta * d.flat()[e];
    g = std::move(g_new);
    gnorm = gnorm_new;
    restarted = false;
  }

  report.schedule = std::move(v);
  return report;
}

}  // namespace mixopt
