#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixopt {

/// Weighted inner product sum_k w_k a_k b_k.
inline double weighted_dot(std::span<const double> w, std::span<const double> a,
                           std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += w[k] * a[k] * b[k];
  return s;
}

inline double weighted_norm(std::span<const double> w, std::span<const double> a) {
  return std::sqrt(weighted_dot(w, a, a));
}

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t k = 0; k < x.size(); ++k) y[k] += alpha * x[k];
}

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what + " (relative residual " + std::to_string(residual) + " after " +
                           std::to_string(iterations) + " iterations)"),
        residual_(residual),
        iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

struct KrylovOptions {
  double tol = 1e-12;  // relative residual in the weighted norm
  int restart = 50;
  int max_iterations = 5000;
};

struct KrylovResult {
  int iterations = 0;
  double relative_residual = 0.0;
};

using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

/// Restarted GMRES for A x = b with inner products weighted by `w`.
/// `x` holds the initial guess on entry. Throws SolverError when the
/// tolerance is not met within opts.max_iterations.
KrylovResult gmres(const LinearMap& apply, std::span<const double> b, std::span<double> x,
                   std::span<const double> w, const KrylovOptions& opts);

}  // namespace mixopt
