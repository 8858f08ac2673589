#include "mixopt/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mixopt {

NeumannLaplacian::NeumannLaplacian(const Mesh& mesh) : mesh_(&mesh) {
  const std::size_t nf = mesh.num_interior_faces();
  left_.resize(nf);
  right_.resize(nf);
  trans_.resize(nf);
  for (const auto& f : mesh.interior_faces()) {
    left_[f.id] = f.left;
    right_[f.id] = f.right;
    trans_[f.id] = f.area / f.center_distance;
  }
  volumes_.resize(mesh.num_cells());
  inv_volumes_.resize(mesh.num_cells());
  for (const auto& c : mesh.cells()) {
    volumes_[c.id] = c.volume;
    inv_volumes_[c.id] = 1.0 / c.volume;
  }
}

void NeumannLaplacian::apply(std::span<const double> y, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t f = 0; f < trans_.size(); ++f) {
    const std::size_t l = left_[f];
    const std::size_t r = right_[f];
    const double flux = trans_[f] * (y[r] - y[l]);
    out[l] -= flux;
    out[r] += flux;
  }
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= inv_volumes_[k];
}

StateVector NeumannLaplacian::apply(const StateVector& y) const {
  if (y.size() != num_cells()) throw std::invalid_argument("NeumannLaplacian: size mismatch");
  StateVector out(y.size());
  apply(y.span(), out.span());
  return out;
}

void remove_mean(std::span<const double> volumes, std::span<double> v) {
  double m = 0.0;
  double area = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    m += v[k] * volumes[k];
    area += volumes[k];
  }
  const double mean = m / area;
  for (auto& x : v) x -= mean;
}

StateVector solve_poisson_zero_mean(const NeumannLaplacian& lap, const StateVector& rhs,
                                    const CgOptions& opts, CgResult* info) {
  if (rhs.size() != lap.num_cells())
    throw std::invalid_argument("solve_poisson_zero_mean: size mismatch");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("solve_poisson_zero_mean: tol must be positive");
  const auto w = lap.volumes();
  const std::size_t n = rhs.size();

  StateVector b = rhs;
  remove_mean(w, b.span());
  StateVector x(n, 0.0);
  CgResult result;

  // A right-hand side that is constant up to rounding has no zero-mean part.
  const double bnorm = weighted_norm(w, b.span());
  const double rounding = 64.0 * std::numeric_limits<double>::epsilon() * weighted_norm(w, rhs.span());
  if (bnorm <= rounding) {
    if (info) *info = result;
    return x;
  }

  std::vector<double> r(b.begin(), b.end());
  std::vector<double> p = r;
  std::vector<double> ap(n);
  double rr = weighted_dot(w, r, r);
  while (true) {
    result.relative_residual = std::sqrt(rr) / bnorm;
    if (result.relative_residual <= opts.tol) break;
    if (result.iterations >= opts.max_iterations)
      throw SolverError("conjugate gradients did not converge", result.relative_residual,
                        result.iterations);
    ++result.iterations;
    lap.apply(p, ap);
    const double alpha = rr / weighted_dot(w, p, ap);
    axpy(alpha, p, x.span());
    axpy(-alpha, ap, r);
    remove_mean(w, x.span());
    remove_mean(w, r);
    const double rr_new = weighted_dot(w, r, r);
    const double beta = rr_new / rr;
    for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + beta * p[k];
    rr = rr_new;
  }
  if (info) *info = result;
  return x;
}

double mix_norm(const NeumannLaplacian& lap, const StateVector& theta, const CgOptions& opts) {
  StateVector centered = theta;
  remove_mean(lap.volumes(), centered.span());
  const StateVector eta = solve_poisson_zero_mean(lap, centered, opts);
  double inner = weighted_dot(lap.volumes(), centered.span(), eta.span());
  if (inner < 0.0) {
    if (inner >= -10.0 * opts.tol * weighted_dot(lap.volumes(), centered.span(), centered.span()))
      inner = 0.0;
    else
      throw SolverError("mix_norm: negative <theta, eta>", inner, 0);
  }
  return std::sqrt(inner);
}

}  // namespace mixopt
