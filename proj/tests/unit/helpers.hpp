#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <random>

#include "mixopt/mesh.hpp"
#include "mixopt/state.hpp"

namespace mixopt::testing {

inline StateVector random_state(std::size_t n, std::mt19937_64& rng, double lo = -1.0,
                                double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  StateVector v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

/// Dense matrix of a linear map given by its action on unit vectors.
inline Eigen::MatrixXd dense_matrix(std::size_t n,
                                    const std::function<StateVector(const StateVector&)>& apply) {
  Eigen::MatrixXd A(n, n);
  StateVector e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    const StateVector col = apply(e);
    for (std::size_t i = 0; i < n; ++i) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
    e[j] = 0.0;
  }
  return A;
}

inline Eigen::VectorXd to_eigen(const StateVector& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

inline Eigen::VectorXd volumes_of(const Mesh& mesh) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(mesh.num_cells()));
  for (const auto& c : mesh.cells()) w(static_cast<Eigen::Index>(c.id)) = c.volume;
  return w;
}

inline double max_abs_diff(const StateVector& a, const StateVector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(const StateVector& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace mixopt::testing
