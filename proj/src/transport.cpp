#include "mixopt/transport.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mixopt {

ControlSchedule::ControlSchedule(std::size_t num_modes, std::size_t n_steps, double dt,
                                 double fill)
    : num_modes_(num_modes), n_steps_(n_steps), dt_(dt), coeffs_(num_modes * n_steps, fill) {
  if (!(dt > 0.0)) throw ShapeError("ControlSchedule: dt must be positive");
}

std::vector<double> ControlSchedule::step_coefficients(std::size_t step) const {
  std::vector<double> c(num_modes_);
  for (std::size_t i = 0; i < num_modes_; ++i) c[i] = (*this)(i, step);
  return c;
}

AdvectionOperator::AdvectionOperator(const Mesh& mesh, std::vector<FluxTable> tables)
    : mesh_(&mesh), tables_(std::move(tables)) {
  const std::size_t nf = mesh.num_interior_faces();
  for (const auto& t : tables_)
    if (t.fluxes.size() != nf)
      throw ShapeError("AdvectionOperator: flux table '" + t.basis_name +
                       "' does not match the mesh");
  left_.resize(nf);
  right_.resize(nf);
  for (const auto& f : mesh.interior_faces()) {
    left_[f.id] = f.left;
    right_[f.id] = f.right;
  }
  volumes_ = cell_volumes(mesh);
  inv_volumes_.resize(volumes_.size());
  for (std::size_t k = 0; k < volumes_.size(); ++k) inv_volumes_[k] = 1.0 / volumes_[k];
}

std::vector<double> AdvectionOperator::combine(std::span<const double> coeffs, double scale) const {
  if (coeffs.size() != tables_.size())
    throw ShapeError("AdvectionOperator: expected " + std::to_string(tables_.size()) +
                     " coefficients, got " + std::to_string(coeffs.size()));
  std::vector<double> flux(left_.size(), 0.0);
  for (std::size_t i = 0; i < tables_.size(); ++i) {
    const double c = scale * coeffs[i];
    if (c == 0.0) continue;
    axpy(c, tables_[i].fluxes, flux);
  }
  return flux;
}

void AdvectionOperator::apply_faces(std::span<const double> face_flux, std::span<const double> y,
                                    std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t nf = left_.size();
  for (std::size_t f = 0; f < nf; ++f) {
    const std::size_t l = left_[f];
    const std::size_t r = right_[f];
    const double F = face_flux[f] * 0.5 * (y[l] + y[r]);
    out[l] += F;
    out[r] -= F;
  }
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= inv_volumes_[k];
}

StateVector AdvectionOperator::apply(std::span<const double> coeffs, const StateVector& y) const {
  if (y.size() != num_cells()) throw ShapeError("AdvectionOperator::apply: size mismatch");
  StateVector out(y.size());
  apply_faces(combine(coeffs), y.span(), out.span());
  return out;
}

StateVector AdvectionOperator::apply_mode(std::size_t mode, const StateVector& y) const {
  if (y.size() != num_cells()) throw ShapeError("AdvectionOperator::apply_mode: size mismatch");
  StateVector out(y.size());
  apply_faces(tables_.at(mode).fluxes, y.span(), out.span());
  return out;
}

StateVector apply_divergence(const AdvectionOperator& op, std::span<const double> coeffs,
                             const StateVector& y) {
  return op.apply(coeffs, y);
}

StateVector cn_step(const AdvectionOperator& op, const StateVector& y,
                    std::span<const double> coeffs, double dt, Direction direction,
                    const KrylovOptions& opts, KrylovResult* info) {
  if (y.size() != op.num_cells()) throw ShapeError("cn_step: state does not match the mesh");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("cn_step: tol must be positive");
  if (std::all_of(coeffs.begin(), coeffs.end(), [](double c) { return c == 0.0; })) {
    if (coeffs.size() != op.num_modes()) throw ShapeError("cn_step: coefficient count mismatch");
    if (info) *info = {};
    return y;
  }
  const double sign = direction == Direction::forward ? 1.0 : -1.0;
  const std::vector<double> flux = op.combine(coeffs, sign * 0.5 * dt);

  const std::size_t n = y.size();
  StateVector rhs(n);
  op.apply_faces(flux, y.span(), rhs.span());
  for (std::size_t k = 0; k < n; ++k) rhs[k] = y[k] - rhs[k];

  // Initial guess y keeps every Krylov vector mass-free, so the update
  // preserves M_h to rounding regardless of the tolerance.
  StateVector x = y;
  const LinearMap apply = [&](std::span<const double> in, std::span<double> out) {
    op.apply_faces(flux, in, out);
    for (std::size_t k = 0; k < n; ++k) out[k] += in[k];
  };
  const KrylovResult res = gmres(apply, rhs.span(), x.span(), op.volumes(), opts);
  if (info) *info = res;
  return x;
}

std::vector<StateVector> solve_forward(const AdvectionOperator& op, const StateVector& theta0,
                                       const ControlSchedule& schedule,
                                       const KrylovOptions& opts) {
  if (schedule.num_modes() != op.num_modes())
    throw ShapeError("solve_forward: schedule has a different number of modes");
  std::vector<StateVector> traj;
  traj.reserve(schedule.n_steps() + 1);
  traj.push_back(theta0);
  for (std::size_t n = 0; n < schedule.n_steps(); ++n)
    traj.push_back(cn_step(op, traj.back(), schedule.step_coefficients(n), schedule.dt(),
                           Direction::forward, opts));
  return traj;
}

std::vector<StateVector> solve_adjoint(const AdvectionOperator& op,
                                       const StateVector& eta_terminal,
                                       const ControlSchedule& schedule,
                                       const KrylovOptions& opts) {
  if (schedule.num_modes() != op.num_modes())
    throw ShapeError("solve_adjoint: schedule has a different number of modes");
  const std::size_t N = schedule.n_steps();
  std::vector<StateVector> traj(N + 1);
  traj[N] = eta_terminal;
  for (std::size_t n = N; n-- > 0;)
    traj[n] = cn_step(op, traj[n + 1], schedule.step_coefficients(n), schedule.dt(),
                      Direction::backward, opts);
  return traj;
}

ForwardTrajectory::ForwardTrajectory(const AdvectionOperator& op, StateVector theta0,
                                     const ControlSchedule& schedule, const KrylovOptions& opts,
                                     std::optional<std::size_t> memory_budget_bytes)
    : op_(&op), schedule_(schedule), opts_(opts), n_steps_(schedule.n_steps()) {
  if (schedule.num_modes() != op.num_modes())
    throw ShapeError("ForwardTrajectory: schedule has a different number of modes");
  const std::size_t state_bytes = theta0.size() * sizeof(double);
  const std::size_t full_bytes = (n_steps_ + 1) * state_bytes;
  if (memory_budget_bytes && full_bytes > *memory_budget_bytes) {
    stride_ = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_steps_ + 1)))));
  }
  checkpoints_.reserve(n_steps_ / stride_ + 1);
  StateVector current = std::move(theta0);
  for (std::size_t n = 0; n < n_steps_; ++n) {
    if (n % stride_ == 0) checkpoints_.push_back(current);
    current = cn_step(op, current, schedule_.step_coefficients(n), schedule_.dt(),
                      Direction::forward, opts_);
  }
  if (n_steps_ % stride_ == 0) checkpoints_.push_back(current);
  final_ = std::move(current);
}

const StateVector& ForwardTrajectory::at(std::size_t n) {
  if (n > n_steps_) throw std::out_of_range("ForwardTrajectory::at");
  if (n == n_steps_) return final_;
  if (stride_ == 1) return checkpoints_[n];
  const std::size_t seg = n / stride_;
  const std::size_t base = seg * stride_;
  if (seg != cached_segment_) {
    const std::size_t end = std::min(base + stride_, n_steps_);
    segment_.clear();
    segment_.push_back(checkpoints_[seg]);
    for (std::size_t m = base; m + 1 < end; ++m)
      segment_.push_back(cn_step(*op_, segment_.back(), schedule_.step_coefficients(m),
                                 schedule_.dt(), Direction::forward, opts_));
    cached_segment_ = seg;
  }
  return segment_[n - base];
}

namespace {

void check_size(const Mesh& mesh, const StateVector& v, const char* what) {
  if (v.size() != mesh.num_cells())
    throw ShapeError(std::string(what) + ": state length " + std::to_string(v.size()) +
                     " does not match mesh with " + std::to_string(mesh.num_cells()) + " cells");
}

}  // namespace

std::vector<double> cell_volumes(const Mesh& mesh) {
  std::vector<double> w(mesh.num_cells());
  for (const auto& c : mesh.cells()) w[c.id] = c.volume;
  return w;
}

double mass(const Mesh& mesh, const StateVector& xi) {
  check_size(mesh, xi, "mass");
  double s = 0.0;
  for (const auto& c : mesh.cells()) s += xi[c.id] * c.volume;
  return s;
}

double energy(const Mesh& mesh, const StateVector& xi) { return pairing(mesh, xi, xi); }

double pairing(const Mesh& mesh, const StateVector& a, const StateVector& b) {
  check_size(mesh, a, "pairing");
  check_size(mesh, b, "pairing");
  double s = 0.0;
  for (const auto& c : mesh.cells()) s += a[c.id] * b[c.id] * c.volume;
  return s;
}

double norm(const Mesh& mesh, const StateVector& a) { return std::sqrt(energy(mesh, a)); }

}  // namespace mixopt
