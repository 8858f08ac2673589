#include <algorithm>
#include <cmath>
#include <vector>

#include "mixopt/linalg.hpp"

namespace mixopt {

KrylovResult gmres(const LinearMap& apply, std::span<const double> b, std::span<double> x,
                   std::span<const double> w, const KrylovOptions& opts) {
  const std::size_t n = b.size();
  const int m = std::max(1, opts.restart);
  KrylovResult result;

  const double bnorm = weighted_norm(w, b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return result;
  }

  // Krylov vectors are allocated on first use; well-conditioned steps need few.
  std::vector<std::vector<double>> basis;
  basis.reserve(m + 1);
  auto vec = [&](int i) -> std::vector<double>& {
    while (static_cast<int>(basis.size()) <= i) basis.emplace_back(n);
    return basis[i];
  };
  std::vector<double> hess(static_cast<std::size_t>(m + 1) * m, 0.0);
  auto H = [&](int i, int j) -> double& { return hess[static_cast<std::size_t>(j) * (m + 1) + i]; };
  std::vector<double> cs(m), sn(m), g(m + 1), y(m);
  std::vector<double> tmp(n);

  while (true) {
    // r = b - A x
    apply(x, tmp);
    auto& v0 = vec(0);
    for (std::size_t k = 0; k < n; ++k) v0[k] = b[k] - tmp[k];
    double beta = weighted_norm(w, v0);
    result.relative_residual = beta / bnorm;
    if (result.relative_residual <= opts.tol) return result;
    if (result.iterations >= opts.max_iterations)
      throw SolverError("gmres did not converge", result.relative_residual, result.iterations);

    for (auto& v : v0) v /= beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;

    int j = 0;
    for (; j < m && result.iterations < opts.max_iterations; ++j) {
      ++result.iterations;
      auto& vn = vec(j + 1);
      apply(basis[j], vn);
      // Modified Gram-Schmidt in the weighted inner product.
      for (int i = 0; i <= j; ++i) {
        const double hij = weighted_dot(w, vn, basis[i]);
        H(i, j) = hij;
        axpy(-hij, basis[i], vn);
      }
      const double hnext = weighted_norm(w, vn);
      H(j + 1, j) = hnext;
      if (hnext > 0.0)
        for (auto& v : vn) v /= hnext;

      for (int i = 0; i < j; ++i) {
        const double a = H(i, j);
        const double c = H(i + 1, j);
        H(i, j) = cs[i] * a + sn[i] * c;
        H(i + 1, j) = -sn[i] * a + cs[i] * c;
      }
      const double a = H(j, j);
      const double c = H(j + 1, j);
      const double r = std::hypot(a, c);
      cs[j] = a / r;
      sn[j] = c / r;
      H(j, j) = r;
      H(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];

      if (std::abs(g[j + 1]) / bnorm <= opts.tol || hnext == 0.0) {
        ++j;
        break;
      }
    }

    // Back substitution for the j x j triangular system.
    for (int i = j - 1; i >= 0; --i) {
      double s = g[i];
      for (int k = i + 1; k < j; ++k) s -= H(i, k) * y[k];
      y[i] = s / H(i, i);
    }
    for (int i = 0; i < j; ++i) axpy(y[i], basis[i], x);
  }
}

}  // namespace mixopt
