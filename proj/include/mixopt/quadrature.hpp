#pragma once

#include <vector>

namespace mixopt {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;  // sum to 2
};

/// n-point Gauss-Legendre rule, nodes by Newton iteration on P_n.
GaussRule gauss_legendre(int n);

}  // namespace mixopt
