#include "mixopt/objective.hpp"

#include <algorithm>
#include <cmath>

namespace mixopt {

ObjectiveOptions objective_options(double gamma, double tol) {
  ObjectiveOptions o;
  o.gamma = gamma;
  o.krylov.tol = tol;
  o.cg.tol = tol;
  return o;
}

Objective::Objective(const AdvectionOperator& op, const NeumannLaplacian& lap,
                     StateVector theta0, ObjectiveOptions opts)
    : op_(&op), lap_(&lap), theta0_(std::move(theta0)), opts_(opts) {
  if (theta0_.size() != op.num_cells() || lap.num_cells() != op.num_cells())
    throw ShapeError("Objective: initial state, transport and Laplacian sizes differ");
  if (!(opts_.gamma >= 0.0)) throw std::invalid_argument("Objective: gamma must be >= 0");
}

void Objective::check_schedule(const ControlSchedule& schedule) const {
  if (schedule.num_modes() != op_->num_modes())
    throw ShapeError("Objective: schedule has " + std::to_string(schedule.num_modes()) +
                     " modes, transport has " + std::to_string(op_->num_modes()));
  for (double v : schedule.flat())
    if (!std::isfinite(v)) throw std::invalid_argument("Objective: non-finite coefficient");
}

double Objective::penalty(const ControlSchedule& schedule) const {
  double s = 0.0;
  for (double v : schedule.flat()) s += v * v;
  return 0.5 * opts_.gamma * schedule.dt() * s;
}

double Objective::value(const ControlSchedule& schedule) const {
  check_schedule(schedule);
  StateVector theta = theta0_;
  for (std::size_t n = 0; n < schedule.n_steps(); ++n)
    theta = cn_step(*op_, theta, schedule.step_coefficients(n), schedule.dt(), Direction::forward,
                    opts_.krylov);
  const StateVector eta = solve_poisson_zero_mean(*lap_, theta, opts_.cg);
  return 0.5 * weighted_dot(op_->volumes(), theta.span(), eta.span()) + penalty(schedule);
}

Objective::ValueAndGradient Objective::value_and_gradient(const ControlSchedule& schedule) const {
  check_schedule(schedule);
  const std::size_t N = schedule.n_steps();
  const std::size_t m = schedule.num_modes();
  const std::size_t nc = theta0_.size();
  const double dt = schedule.dt();
  const auto w = op_->volumes();

  ForwardTrajectory traj(*op_, theta0_, schedule, opts_.krylov, opts_.trajectory_memory_bytes);
  const StateVector& thetaN = traj.final_state();
  StateVector rho = solve_poisson_zero_mean(*lap_, thetaN, opts_.cg);
  const double value = 0.5 * weighted_dot(w, thetaN.span(), rho.span()) + penalty(schedule);

  GradientArray grad(m, N, dt, 0.0);
  StateVector theta_mid(nc);
  StateVector rho_sample(nc);
  StateVector d_rho(nc);
  StateVector theta_next = thetaN;
  for (std::size_t n = N; n-- > 0;) {
    const StateVector rho_next = rho;
    rho = cn_step(*op_, rho_next, schedule.step_coefficients(n), dt, Direction::backward,
                  opts_.krylov);
    const StateVector& theta_n = traj.at(n);
    for (std::size_t k = 0; k < nc; ++k) {
      theta_mid[k] = 0.5 * (theta_n[k] + theta_next[k]);
      rho_sample[k] =
          opts_.sampling == AdjointSampling::midpoint ? 0.5 * (rho[k] + rho_next[k]) : rho[k];
    }
    for (std::size_t i = 0; i < m; ++i) {
      op_->apply_faces(op_->table(i).fluxes, rho_sample.span(), d_rho.span());
      grad(i, n) = dt * (opts_.gamma * schedule(i, n) +
                         weighted_dot(w, theta_mid.span(), d_rho.span()));
    }
    theta_next = theta_n;
  }
  return {value, std::move(grad)};
}

GradientArray Objective::finite_difference_gradient(const ControlSchedule& schedule,
                                                    double eps) const {
  if (!(eps > 0.0)) throw std::invalid_argument("finite_difference_gradient: eps must be > 0");
  check_schedule(schedule);
  GradientArray fd(schedule.num_modes(), schedule.n_steps(), schedule.dt(), 0.0);
  ControlSchedule probe = schedule;
  for (std::size_t i = 0; i < schedule.num_modes(); ++i) {
    for (std::size_t n = 0; n < schedule.n_steps(); ++n) {
      const double v = schedule(i, n);
      probe(i, n) = v + eps;
      const double jp = value(probe);
      probe(i, n) = v - eps;
      const double jm = value(probe);
      probe(i, n) = v;
      fd(i, n) = (jp - jm) / (2.0 * eps);
    }
  }
  return fd;
}

double evaluate_objective(const StateVector& theta0, const ControlSchedule& schedule,
                          const AdvectionOperator& op, const NeumannLaplacian& lap, double gamma,
                          double tol) {
  return Objective(op, lap, theta0, objective_options(gamma, tol)).value(schedule);
}

GradientArray evaluate_gradient(const StateVector& theta0, const ControlSchedule& schedule,
                                const AdvectionOperator& op, const NeumannLaplacian& lap,
                                double gamma, double tol) {
  return Objective(op, lap, theta0, objective_options(gamma, tol))
      .value_and_gradient(schedule)
      .gradient;
}

GradientArray finite_difference_gradient(const StateVector& theta0,
                                         const ControlSchedule& schedule,
                                         const AdvectionOperator& op,
                                         const NeumannLaplacian& lap, double gamma, double tol,
                                         double eps) {
  return Objective(op, lap, theta0, objective_options(gamma, tol))
      .finite_difference_gradient(schedule, eps);
}

double frobenius_dot(const ControlSchedule& a, const ControlSchedule& b) {
  if (a.num_modes() != b.num_modes() || a.n_steps() != b.n_steps())
    throw ShapeError("frobenius_dot: shape mismatch");
  double s = 0.0;
  const auto fa = a.flat();
  const auto fb = b.flat();
  for (std::size_t k = 0; k < fa.size(); ++k) s += fa[k] * fb[k];
  return s;
}

double frobenius_norm(const ControlSchedule& a) { return std::sqrt(frobenius_dot(a, a)); }

double max_relative_error(const ControlSchedule& a, const ControlSchedule& b) {
  if (a.num_modes() != b.num_modes() || a.n_steps() != b.n_steps())
    throw ShapeError("max_relative_error: shape mismatch");
  double diff = 0.0;
  double scale = 0.0;
  const auto fa = a.flat();
  const auto fb = b.flat();
  for (std::size_t k = 0; k < fa.size(); ++k) {
    diff = std::max(diff, std::abs(fa[k] - fb[k]));
    scale = std::max(scale, std::abs(fb[k]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

}  // namespace mixopt
