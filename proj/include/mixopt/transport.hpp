#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mixopt/basis_flows.hpp"
#include "mixopt/linalg.hpp"
#include "mixopt/mesh.hpp"
#include "mixopt/state.hpp"

namespace mixopt {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Piecewise-constant control coefficients v_i^(n), i < num_modes, n < n_steps.
class ControlSchedule {
 public:
  ControlSchedule() = default;
  ControlSchedule(std::size_t num_modes, std::size_t n_steps, double dt, double fill = 0.0);

  std::size_t num_modes() const { return num_modes_; }
  std::size_t n_steps() const { return n_steps_; }
  double dt() const { return dt_; }
  double final_time() const { return dt_ * static_cast<double>(n_steps_); }

  double& operator()(std::size_t mode, std::size_t step) { return coeffs_[mode * n_steps_ + step]; }
  double operator()(std::size_t mode, std::size_t step) const {
    return coeffs_[mode * n_steps_ + step];
  }

  /// Coefficients of all modes on interval `step`.
  std::vector<double> step_coefficients(std::size_t step) const;

  /// Flat mode-major storage, length num_modes * n_steps.
  std::span<double> flat() { return coeffs_; }
  std::span<const double> flat() const { return coeffs_; }

  friend bool operator==(const ControlSchedule&, const ControlSchedule&) = default;

 private:
  std::size_t num_modes_ = 0;
  std::size_t n_steps_ = 0;
  double dt_ = 0.0;
  std::vector<double> coeffs_;
};

/// Skew-symmetric central-flux divergence D = sum_i c_i D_{b_i}.
///
/// Stored in face form: one flux per interior face and mode. Per-step
/// operators are coefficient-weighted sums applied without assembly.
class AdvectionOperator {
 public:
  AdvectionOperator(const Mesh& mesh, std::vector<FluxTable> tables);

  const Mesh& mesh() const { return *mesh_; }
  std::size_t num_modes() const { return tables_.size(); }
  std::size_t num_cells() const { return volumes_.size(); }
  std::span<const double> volumes() const { return volumes_; }
  const FluxTable& table(std::size_t mode) const { return tables_[mode]; }

  /// Face fluxes scale * sum_i c_i phi_{i,face}.
  std::vector<double> combine(std::span<const double> coeffs, double scale = 1.0) const;

  /// out = D y for explicit per-face fluxes (as returned by combine).
  void apply_faces(std::span<const double> face_flux, std::span<const double> y,
                   std::span<double> out) const;

  StateVector apply(std::span<const double> coeffs, const StateVector& y) const;
  StateVector apply_mode(std::size_t mode, const StateVector& y) const;

 private:
  const Mesh* mesh_;
  std::vector<FluxTable> tables_;
  std::vector<std::size_t> left_;
  std::vector<std::size_t> right_;
  std::vector<double> volumes_;
  std::vector<double> inv_volumes_;
};

/// Returns (1/|K| sum_face (y_K + y_L)/2 sum_i c_i phi_i)_K.
StateVector apply_divergence(const AdvectionOperator& op, std::span<const double> coeffs,
                             const StateVector& y);

enum class Direction { forward, backward };

/// One Crank-Nicolson step with D = dt/2 sum_i c_i D_{b_i}.
///
/// forward solves (I + D) x = (I - D) y; backward is the same scheme with
/// dt -> -dt, i.e. (I - D) x = (I + D) y, the exact inverse of the forward
/// map. Zero coefficients short-circuit to x = y.
StateVector cn_step(const AdvectionOperator& op, const StateVector& y,
                    std::span<const double> coeffs, double dt, Direction direction,
                    const KrylovOptions& opts, KrylovResult* info = nullptr);

/// trajectory[0] = theta0, trajectory[n+1] = forward step of trajectory[n].
std::vector<StateVector> solve_forward(const AdvectionOperator& op, const StateVector& theta0,
                                       const ControlSchedule& schedule,
                                       const KrylovOptions& opts);

/// trajectory[N] = eta_terminal; steps n = N-1..0 backward with the
/// coefficients of forward interval n.
std::vector<StateVector> solve_adjoint(const AdvectionOperator& op,
                                       const StateVector& eta_terminal,
                                       const ControlSchedule& schedule,
                                       const KrylovOptions& opts);

/// Forward trajectory with optional checkpointing.
///
/// When all N+1 states do not fit in `memory_budget_bytes`, only every
/// stride-th state is kept and the segment holding a requested state is
/// recomputed from its checkpoint. Recomputation repeats the same floating
/// point operations, so recomputed states are bitwise identical.
class ForwardTrajectory {
 public:
  ForwardTrajectory(const AdvectionOperator& op, StateVector theta0,
                    const ControlSchedule& schedule, const KrylovOptions& opts,
                    std::optional<std::size_t> memory_budget_bytes = std::nullopt);

  std::size_t size() const { return n_steps_ + 1; }
  std::size_t checkpoint_stride() const { return stride_; }
  const StateVector& final_state() const { return final_; }

  /// State n; may trigger recomputation of one segment.
  const StateVector& at(std::size_t n);

 private:
  const AdvectionOperator* op_;
  ControlSchedule schedule_;
  KrylovOptions opts_;
  std::size_t n_steps_;
  std::size_t stride_ = 1;
  std::vector<StateVector> checkpoints_;
  std::size_t cached_segment_ = static_cast<std::size_t>(-1);
  std::vector<StateVector> segment_;
  StateVector final_;
};

/// M_h = sum_K xi_K |K|
double mass(const Mesh& mesh, const StateVector& xi);
/// E_h = ||xi||^2_{X_h}
double energy(const Mesh& mesh, const StateVector& xi);
/// <a, b>_{X_h}
double pairing(const Mesh& mesh, const StateVector& a, const StateVector& b);
double norm(const Mesh& mesh, const StateVector& a);

/// Cell volumes as a vector, the X_h weights.
std::vector<double> cell_volumes(const Mesh& mesh);

}  // namespace mixopt
