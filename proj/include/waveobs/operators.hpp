#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "waveobs/grid.hpp"
#include "waveobs/quadrature.hpp"
#include "waveobs/tridiag.hpp"

namespace waveobs {

/// Nonnegative potential a(x) on [0,1]. The evaluator is sampled at grid
/// nodes during assembly; declared discontinuities let quadrature split
/// integrals for exactness on piecewise-smooth data. sup_bound is an upper
/// bound for ||a||_inf used by the spectral estimates.
struct PotentialSpec {
  enum class Kind { SmoothFormula, PiecewiseConstant, Tabulated };

  ScalarFn eval;
  Kind kind = Kind::SmoothFormula;
  double sup_bound = 0.0;
  std::vector<double> discontinuities; // sorted, strictly inside (0,1)
  std::string tag;

  double operator()(double x) const { return eval(x); }
};

inline PotentialSpec zero_potential() {
  return PotentialSpec{[](double) { return 0.0; }, PotentialSpec::Kind::SmoothFormula,
                       0.0, {}, "zero"};
}

/// Mass, stiffness and lumped-potential matrices of the mixed finite element
/// semi-discretization on a uniform grid:
///   M = (h/4) tridiag(1,2,1),  K = (1/h) tridiag(-1,2,-1),
///   L = diag(h a(x_j)) from the trapezoid lumping of the potential term,
///   S = K + L.
/// M and S are positive definite when a >= 0.
struct OperatorSet {
  Grid grid;
  PotentialSpec potential;
  SymTriDiag M;
  SymTriDiag K;
  std::vector<double> L_diag;
  SymTriDiag S;

  int n() const { return grid.n; }
  double h() const { return grid.h; }
};

inline OperatorSet assemble(const Grid& grid, PotentialSpec a) {
  const int n = grid.n;
  const double h = grid.h;
  std::vector<double> ld(n);
  for (int j = 1; j <= n; ++j) {
    const double aj = a(grid.node(j));
    if (aj < 0.0)
      throw std::invalid_argument("assemble: potential must be nonnegative, a(" +
                                  std::to_string(grid.node(j)) + ") = " + std::to_string(aj));
    ld[j - 1] = h * aj;
  }
  SymTriDiag M(std::vector<double>(n, h / 2), std::vector<double>(n - 1, h / 4));
  SymTriDiag K(std::vector<double>(n, 2 / h), std::vector<double>(n - 1, -1 / h));
  SymTriDiag S = K;
  for (int i = 0; i < n; ++i) S.diag[i] += ld[i];
  return OperatorSet{grid, std::move(a), std::move(M), std::move(K), std::move(ld), std::move(S)};
}

// Discrete inner products of the scheme: <U,W>_M = <M U,W> and
// <U,W>_1 = <(K+L) U,W>; the (1,M) product pairs displacement with velocity.
inline double m_inner(const OperatorSet& ops, const std::vector<double>& u,
                      const std::vector<double>& w) {
  if (u.size() != w.size() || static_cast<int>(u.size()) != ops.n())
    throw std::invalid_argument("m_inner: length mismatch");
  const auto mu = ops.M.apply(u);
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += mu[i] * w[i];
  return s;
}

inline double one_inner(const OperatorSet& ops, const std::vector<double>& u,
                        const std::vector<double>& w) {
  if (u.size() != w.size() || static_cast<int>(u.size()) != ops.n())
    throw std::invalid_argument("one_inner: length mismatch");
  const auto su = ops.S.apply(u);
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += su[i] * w[i];
  return s;
}

inline double m_norm(const OperatorSet& ops, const std::vector<double>& w) {
  if (static_cast<int>(w.size()) != ops.n())
    throw std::invalid_argument("m_norm: length mismatch");
  return std::sqrt(ops.M.quadform(w));
}

inline double one_norm(const OperatorSet& ops, const std::vector<double>& w) {
  if (static_cast<int>(w.size()) != ops.n())
    throw std::invalid_argument("one_norm: length mismatch");
  return std::sqrt(ops.S.quadform(w));
}

/// ||(W0,W1)||_{1,M} = sqrt(<(K+L)W0,W0> + <M W1,W1>), the energy-space norm.
inline double energy_norm_1M(const OperatorSet& ops, const std::vector<double>& w0,
                             const std::vector<double>& w1) {
  if (static_cast<int>(w0.size()) != ops.n() || static_cast<int>(w1.size()) != ops.n())
    throw std::invalid_argument("energy_norm_1M: length mismatch");
  return std::sqrt(ops.S.quadform(w0) + ops.M.quadform(w1));
}

} // namespace waveobs
