#pragma once

#include <span>
#include <vector>

#include "mixopt/linalg.hpp"
#include "mixopt/mesh.hpp"
#include "mixopt/state.hpp"

namespace mixopt {

/// Two-point flux Neumann Laplacian,
///   (L y)_K = -1/|K| sum_{interior faces} |face| / d_KL (y_L - y_K).
/// Boundary faces carry no flux. Self-adjoint and positive semidefinite in
/// the X_h inner product with kernel = constants.
class NeumannLaplacian {
 public:
  explicit NeumannLaplacian(const Mesh& mesh);

  const Mesh& mesh() const { return *mesh_; }
  std::size_t num_cells() const { return volumes_.size(); }
  std::span<const double> volumes() const { return volumes_; }
  std::span<const double> transmissibilities() const { return trans_; }

  void apply(std::span<const double> y, std::span<double> out) const;
  StateVector apply(const StateVector& y) const;

 private:
  const Mesh* mesh_;
  std::vector<std::size_t> left_;
  std::vector<std::size_t> right_;
  std::vector<double> trans_;
  std::vector<double> volumes_;
  std::vector<double> inv_volumes_;
};

struct CgOptions {
  double tol = 1e-12;  // relative residual in the X_h norm
  int max_iterations = 200000;
};

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Solves L eta = rhs - mean(rhs) on the zero-mean subspace by conjugate
/// gradients in the X_h inner product, re-projecting every iterate onto
/// zero mean. Throws SolverError on non-convergence.
StateVector solve_poisson_zero_mean(const NeumannLaplacian& lap, const StateVector& rhs,
                                    const CgOptions& opts, CgResult* info = nullptr);

/// Discrete H^{-1} mix-norm sqrt(<theta, L^{-1} theta>) of the mean-corrected
/// field. Inner values in [-10 tol, 0) are clamped to zero.
double mix_norm(const NeumannLaplacian& lap, const StateVector& theta, const CgOptions& opts);

/// Subtracts M_h(v)/|Omega_h| in place (|Omega_h| = sum of cell volumes).
void remove_mean(std::span<const double> volumes, std::span<double> v);

}  // namespace mixopt
