#pragma once

#include <cstddef>
#include <optional>

#include "mixopt/elliptic.hpp"
#include "mixopt/transport.hpp"

namespace mixopt {

/// Gradient entries g_i^(n), laid out exactly like the schedule they belong to.
using GradientArray = ControlSchedule;

/// How the adjoint is sampled on interval n in the advective gradient term.
///
/// `midpoint` uses (rho^(n) + rho^(n+1))/2, which equals (I - D)^{-1} rho^(n+1)
/// for the Crank-Nicolson step and makes the gradient the exact derivative of
/// the discrete objective. `nodal` uses rho^(n) and differs by O(dt).
enum class AdjointSampling { midpoint, nodal };

struct ObjectiveOptions {
  double gamma = 1e-6;
  KrylovOptions krylov{};
  CgOptions cg{};
  AdjointSampling sampling = AdjointSampling::midpoint;
  /// Forward states beyond this size are checkpointed and recomputed.
  std::size_t trajectory_memory_bytes = std::size_t{1} << 30;
};

/// Options with a single solver tolerance shared by the Krylov and CG solves.
ObjectiveOptions objective_options(double gamma, double tol);

/// The discrete cost
///   J_h(v) = 1/2 <theta^(N), eta>_{X_h} + gamma/2 dt sum_{n,i} |v_i^(n)|^2,
/// with L_h eta = theta^(N) on the zero-mean subspace.
class Objective {
 public:
  Objective(const AdvectionOperator& op, const NeumannLaplacian& lap, StateVector theta0,
            ObjectiveOptions opts);

  const AdvectionOperator& op() const { return *op_; }
  const NeumannLaplacian& laplacian() const { return *lap_; }
  const StateVector& theta0() const { return theta0_; }
  const ObjectiveOptions& options() const { return opts_; }

  double value(const ControlSchedule& schedule) const;

  struct ValueAndGradient {
    double value;
    GradientArray gradient;
  };
  /// Forward solve, eta solve, backward adjoint sweep.
  ValueAndGradient value_and_gradient(const ControlSchedule& schedule) const;

  /// Central differences of value(), one probe pair per entry.
  GradientArray finite_difference_gradient(const ControlSchedule& schedule, double eps) const;

  /// Penalty part gamma/2 dt ||v||^2 alone.
  double penalty(const ControlSchedule& schedule) const;

 private:
  void check_schedule(const ControlSchedule& schedule) const;

  const AdvectionOperator* op_;
  const NeumannLaplacian* lap_;
  StateVector theta0_;
  ObjectiveOptions opts_;
};

double evaluate_objective(const StateVector& theta0, const ControlSchedule& schedule,
                          const AdvectionOperator& op, const NeumannLaplacian& lap, double gamma,
                          double tol);

GradientArray evaluate_gradient(const StateVector& theta0, const ControlSchedule& schedule,
                                const AdvectionOperator& op, const NeumannLaplacian& lap,
                                double gamma, double tol);

GradientArray finite_difference_gradient(const StateVector& theta0,
                                         const ControlSchedule& schedule,
                                         const AdvectionOperator& op,
                                         const NeumannLaplacian& lap, double gamma, double tol,
                                         double eps);

/// Frobenius norm of the m x N coefficient array.
double frobenius_norm(const ControlSchedule& a);
/// Entry-wise sum of products.
double frobenius_dot(const ControlSchedule& a, const ControlSchedule& b);
/// max |a - b| / max |b|, or max |a - b| when b vanishes.
double max_relative_error(const ControlSchedule& a, const ControlSchedule& b);

}  // namespace mixopt
