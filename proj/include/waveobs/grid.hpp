#pragma once

#include <stdexcept>

namespace waveobs {

/// Uniform grid of (0,1) with n interior nodes: x_j = j*h, h = 1/(n+1),
/// j = 0..n+1. Boundary nodes x_0 = 0 and x_{n+1} = 1 carry homogeneous
/// Dirichlet conditions and are not unknowns.
struct Grid {
  int n = 0;
  double h = 0.0;

  double node(int j) const { return j * h; }
};

inline Grid build_grid(int n) {
  if (n < 1) throw std::invalid_argument("build_grid: need at least one interior node");
  return Grid{n, 1.0 / (n + 1)};
}

} // namespace waveobs
