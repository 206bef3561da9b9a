#pragma once

#include <vector>

#include "waveobs/operators.hpp"
#include "waveobs/quadrature.hpp"

namespace waveobs {

/// Half-stencil cell integrals rhs_j = (1/2) int_{x_{j-1}}^{x_{j+1}} v dx,
/// the right-hand side shared by the P2 projection and the source
/// discretization. Declared discontinuities split the quadrature.
inline std::vector<double> half_cell_integrals(const ScalarFn& v, const Grid& grid,
                                               const std::vector<double>& splits = {},
                                               int nsub = 32) {
  const int n = grid.n;
  // per-cell integrals over (x_j, x_{j+1}), j = 0..n
  std::vector<double> cell(n + 1);
  for (int j = 0; j <= n; ++j)
    cell[j] = integrate_split(v, grid.node(j), grid.node(j + 1), splits, nsub);
  std::vector<double> rhs(n);
  for (int j = 1; j <= n; ++j) rhs[j - 1] = 0.5 * (cell[j - 1] + cell[j]);
  return rhs;
}

/// P1: nodal interpolation onto the hat-function space (w must vanish at 0,1).
inline std::vector<double> project_p1(const ScalarFn& w, const Grid& grid) {
  std::vector<double> out(grid.n);
  for (int j = 1; j <= grid.n; ++j) out[j - 1] = w(grid.node(j));
  return out;
}

/// P3: L^2 projection onto the overlapping piecewise-constant basis via plain
/// double-cell averages, v_j = (1/2h) int_{x_{j-1}}^{x_{j+1}} v dx.
inline std::vector<double> project_p3(const ScalarFn& v, const Grid& grid,
                                      const std::vector<double>& splits = {}, int nsub = 32) {
  auto rhs = half_cell_integrals(v, grid, splits, nsub);
  for (double& r : rhs) r /= grid.h;
  return rhs;
}

/// P2: orthogonal L^2 projection coefficients, solving
/// (h/4)(v_{j-1} + 2 v_j + v_{j+1}) = (1/2) int_{x_{j-1}}^{x_{j+1}} v dx,
/// i.e. M V = h * (P3 v).
inline std::vector<double> project_p2(const ScalarFn& v, const OperatorSet& ops,
                                      const std::vector<double>& splits = {}, int nsub = 32) {
  return tridiag_solve(ops.M, half_cell_integrals(v, ops.grid, splits, nsub));
}

} // namespace waveobs
