#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mixopt/objective.hpp"

namespace mixopt {

enum class BetaRule { norm_ratio, fletcher_reeves };

struct OptimizerConfig {
  double c = 1e-4;        ///< Armijo constant, in (0, 1)
  double shrink = 0.5;    ///< backtracking factor, in (0, 1)
  double alpha0 = 0.0;    ///< first trial step; 0 selects 1 / ||g^0||
  double growth = 1.0;    ///< trial step = growth * previously accepted step
  double eps_stop = 1e-4; ///< relative objective change tolerance
  int max_outer = 50;
  int max_backtracks = 30;
  BetaRule beta_rule = BetaRule::norm_ratio;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

enum class Termination { converged, max_outer, stalled };

std::string to_string(Termination t);
std::string to_string(BetaRule r);
BetaRule parse_beta_rule(const std::string& s);

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;      ///< J after the accepted step (iteration 0: initial J)
  double gradient_norm = 0.0;  ///< Frobenius norm of the gradient at the new iterate
  double alpha = 0.0;          ///< accepted step, 0 for iteration 0
  int backtracks = 0;
  bool restarted = false;      ///< the search direction was reset to -g
  double directional_derivative = 0.0;  ///< <g, d> of the direction searched
};

struct OptimizationReport {
  std::vector<IterationRecord> iterations;
  Termination termination = Termination::max_outer;
  ControlSchedule schedule;
  int objective_evaluations = 0;
  int gradient_evaluations = 0;

  double final_objective() const { return iterations.back().objective; }
  bool objective_non_increasing() const;
};

/// Called after every accepted iteration, e.g. for progress logging.
using IterationCallback = std::function<void(const IterationRecord&)>;

/// Nonlinear conjugate gradients with Armijo backtracking on the coefficient
/// array.
///
/// d^0 = -g^0. A step alpha is accepted when
///   J(v + alpha d) <= J(v) + c alpha <g, d>,
/// trying alpha = trial, trial*shrink, ... The direction update is
/// d = -g_new + beta d with beta = ||g_new|| / ||g|| (norm_ratio) or its
/// square (fletcher_reeves); d is reset to -g_new when it is not a descent
/// direction. A line search that fails along -g ends the run as `stalled`,
/// keeping the best iterate.
OptimizationReport optimize(const Objective& objective, const ControlSchedule& schedule0,
                            const OptimizerConfig& config,
                            const IterationCallback& callback = nullptr);

}  // namespace mixopt
