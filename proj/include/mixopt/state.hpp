#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace mixopt {

/// Cell-average scalar field, one value per control volume.
///
/// The vector itself carries no geometry; operations that need the X_h inner
/// product take the mesh explicitly and check the length against it.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(std::size_t n, double fill = 0.0) : values_(n, fill) {}
  explicit StateVector(std::vector<double> values) : values_(std::move(values)) {}
  StateVector(std::initializer_list<double> values) : values_(values) {}

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  std::span<double> span() { return values_; }
  std::span<const double> span() const { return values_; }

  auto begin() { return values_.begin(); }
  auto end() { return values_.end(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  const std::vector<double>& values() const { return values_; }

  friend bool operator==(const StateVector&, const StateVector&) = default;

 private:
  std::vector<double> values_;
};

}  // namespace mixopt
