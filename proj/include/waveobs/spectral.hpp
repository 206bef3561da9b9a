#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "waveobs/operators.hpp"
#include "waveobs/tridiag.hpp"

namespace waveobs {

/// One solution of the generalized eigenproblem (K+L) psi = mu M psi.
/// psi is M-normalized with first component positive; freq is the positive
/// branch sqrt(mu) of the time frequency.
struct EigenPair {
  double mu = 0.0;
  double freq = 0.0;
  std::vector<double> psi;
  int index = 0; // 1-based mode number after ascending sort
};

struct Spectrum {
  Grid grid;
  std::string potential_tag;
  std::vector<EigenPair> pairs;

  int size() const { return static_cast<int>(pairs.size()); }
};

namespace detail {

/// Lower-bidiagonal Cholesky factor of the tridiagonal mass matrix,
/// M = B B^T.
struct BidiagCholesky {
  std::vector<double> d; // diagonal of B
  std::vector<double> l; // subdiagonal of B

  explicit BidiagCholesky(const SymTriDiag& m) : d(m.diag.size()), l(m.off.size()) {
    for (std::size_t i = 0; i < m.diag.size(); ++i) {
      double v = m.diag[i];
      if (i > 0) v -= l[i - 1] * l[i - 1];
      if (!(v > 0.0)) throw numerical_error("BidiagCholesky: mass matrix not positive definite");
      d[i] = std::sqrt(v);
      if (i + 1 < m.diag.size()) l[i] = m.off[i] / d[i];
    }
  }

  // x := B^{-1} x (forward substitution)
  void solve_lower(std::vector<double>& x) const {
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (i > 0) x[i] -= l[i - 1] * x[i - 1];
      x[i] /= d[i];
    }
  }

  // x := B^{-T} x (backward substitution)
  void solve_upper(std::vector<double>& x) const {
    for (std::size_t i = d.size(); i-- > 0;) {
      if (i + 1 < d.size()) x[i] -= l[i] * x[i + 1];
      x[i] /= d[i];
    }
  }
};

/// Two rounds of Rayleigh-quotient shift + inverse iteration on the
/// tridiagonal pencil (S, M). Polishes the dense solve so that small
/// eigenvalues keep full relative accuracy even when mu_max/mu_min is large.
inline double refine_pair(const OperatorSet& ops, std::vector<double>& psi) {
  const int n = ops.n();
  double mu = ops.S.quadform(psi) / ops.M.quadform(psi);
  for (int round = 0; round < 2; ++round) {
    std::vector<double> sub(n - 1), diag(n), sup(n - 1);
    for (int i = 0; i < n; ++i) diag[i] = ops.S.diag[i] - mu * ops.M.diag[i];
    for (int i = 0; i + 1 < n; ++i) sub[i] = sup[i] = ops.S.off[i] - mu * ops.M.off[i];
    std::vector<double> z;
    try {
      z = tridiag_solve_general(std::move(sub), std::move(diag), std::move(sup), ops.M.apply(psi));
    } catch (const numerical_error&) {
      break; // shift hit the eigenvalue exactly
    }
    double nz = 0.0;
    for (double v : z) nz = std::max(nz, std::abs(v));
    if (!(nz > 0.0) || !std::isfinite(nz)) break;
    for (double& v : z) v /= nz;
    const double mn = std::sqrt(ops.M.quadform(z));
    for (double& v : z) v /= mn;
    psi = std::move(z);
    mu = ops.S.quadform(psi) / ops.M.quadform(psi);
  }
  return mu;
}

} // namespace detail

/// Solve (K+L) Psi = mu M Psi: Cholesky M = B B^T, dense symmetric eigensolve
/// of C = B^{-1} (K+L) B^{-T}, back-map Psi = B^{-T} PsiHat, then per-pair
/// refinement on the tridiagonal pencil. Pairs are M-normalized and sorted by
/// ascending mu. Desk-scale only: n is capped at 2000.
inline Spectrum generalized_eigen(const OperatorSet& ops) {
  const int n = ops.n();
  if (n > 2000) throw std::invalid_argument("generalized_eigen: n exceeds dense cap 2000");
  const detail::BidiagCholesky B(ops.M);

  Eigen::MatrixXd C(n, n);
  std::vector<double> col(n);
  for (int j = 0; j < n; ++j) {
    std::fill(col.begin(), col.end(), 0.0);
    col[j] = 1.0;
    B.solve_upper(col);          // B^{-T} e_j
    col = ops.S.apply(col);      // S B^{-T} e_j
    B.solve_lower(col);          // B^{-1} S B^{-T} e_j
    for (int i = 0; i < n; ++i) C(i, j) = col[i];
  }
  C = 0.5 * (C + C.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  if (es.info() != Eigen::Success)
    throw numerical_error("generalized_eigen: dense symmetric eigensolver failed");

  Spectrum spec{ops.grid, ops.potential.tag, {}};
  spec.pairs.reserve(n);
  for (int j = 0; j < n; ++j) {
    std::vector<double> psi(n);
    for (int i = 0; i < n; ++i) psi[i] = es.eigenvectors()(i, j);
    B.solve_upper(psi);
    const double mn = std::sqrt(ops.M.quadform(psi));
    for (double& v : psi) v /= mn;
    double mu = detail::refine_pair(ops, psi);
    if (!(mu > 0.0)) throw numerical_error("generalized_eigen: nonpositive eigenvalue");
    if (psi[0] < 0.0)
      for (double& v : psi) v = -v;
    spec.pairs.push_back(EigenPair{mu, std::sqrt(mu), std::move(psi), 0});
  }
  std::sort(spec.pairs.begin(), spec.pairs.end(),
            [](const EigenPair& a, const EigenPair& b) { return a.mu < b.mu; });
  for (int j = 0; j < n; ++j) spec.pairs[j].index = j + 1;
  return spec;
}

/// Minimum gap between consecutive positive-branch frequencies
/// lambda^n = sqrt(mu^n). The gap of the full signed family (lambda^{-n} =
/// -lambda^n) is min(this, 2 lambda^1).
inline double spectral_gap(const Spectrum& spec) {
  if (spec.size() < 2) throw std::invalid_argument("spectral_gap: need at least two modes");
  double g = std::numeric_limits<double>::infinity();
  for (int j = 0; j + 1 < spec.size(); ++j)
    g = std::min(g, spec.pairs[j + 1].freq - spec.pairs[j].freq);
  return g;
}

inline double signed_family_gap(const Spectrum& spec) {
  return std::min(spectral_gap(spec), 2 * spec.pairs.front().freq);
}

/// Two-term boundary weight of one mode: |phi_1/(h sqrt(mu))|^2 + |phi_1/2|^2.
/// The first term alone decays for the top modes as h -> 0; the second term
/// restores a uniform lower bound.
inline double mode_observability(const EigenPair& pair, double h) {
  const double t1 = pair.psi[0] / (h * std::sqrt(pair.mu));
  const double t2 = pair.psi[0] / 2;
  return t1 * t1 + t2 * t2;
}

struct DirectInequalityResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
};

/// Direct inequality for eigenfunctions:
///   (mu + 1/h^2) |phi_1/sqrt(mu)|^2 <= C0 (1 + ||a||_inf^2 / mu).
/// C0 is calibrated once from an a == 0 sweep where the left side equals
/// 2 (1 + 3 sin^2(n pi h / 2)) < 8, and frozen.
inline DirectInequalityResult direct_inequality_check(const EigenPair& pair, const OperatorSet& ops,
                                                      double c0 = 8.0) {
  const double h = ops.h();
  const double a_sup = ops.potential.sup_bound;
  const double r = pair.psi[0] / std::sqrt(pair.mu);
  DirectInequalityResult res;
  res.lhs = (pair.mu + 1.0 / (h * h)) * r * r;
  res.rhs = c0 * (1.0 + a_sup * a_sup / pair.mu);
  res.ok = res.lhs <= res.rhs;
  return res;
}

struct TrapezoidLemmaResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
};

/// Trapezoid-quadrature inequality for two-exponential intensities
/// f(s) = |b1 e^{i nu1 s} + b2 e^{i nu2 s}|^2: under the gap condition
/// |nu2 - nu1| <= pi/(2t + r) the endpoint average (f(t)+f(t+r))/2 does not
/// exceed the interval mean (1/r) int_t^{t+r} f. The integral is evaluated
/// from the analytic antiderivative.
inline TrapezoidLemmaResult trapezoid_lemma_check(double nu1, double nu2, std::complex<double> b1,
                                                  std::complex<double> b2, double t, double r) {
  if (!(r > 0.0) || t < 0.0)
    throw std::invalid_argument("trapezoid_lemma_check: need r > 0 and t >= 0");
  if (std::abs(nu2 - nu1) > std::numbers::pi / (2 * t + r))
    throw std::invalid_argument("trapezoid_lemma_check: gap condition |nu2-nu1| <= pi/(2t+r) violated");
  const auto f = [&](double s) {
    return std::norm(b1 * std::exp(std::complex<double>(0, nu1 * s)) +
                     b2 * std::exp(std::complex<double>(0, nu2 * s)));
  };
  TrapezoidLemmaResult res;
  res.lhs = 0.5 * (f(t) + f(t + r));
  const double delta = nu1 - nu2;
  double integral = (std::norm(b1) + std::norm(b2)) * r;
  const std::complex<double> cross = b1 * std::conj(b2);
  if (delta == 0.0) {
    integral += 2 * r * cross.real();
  } else {
    const std::complex<double> id(0.0, delta);
    const std::complex<double> prim =
        (std::exp(id * (t + r)) - std::exp(id * t)) / id;
    integral += 2 * (cross * prim).real();
  }
  res.rhs = integral / r;
  res.ok = res.lhs <= res.rhs + 1e-12;
  return res;
}

/// Evaluate the Fourier-expansion solution of the homogeneous system at time
/// t: U(t) = sum_n [a_n cos(l_n t) + b_n sin(l_n t)/l_n] Psi^n with
/// a_n = <M U0, Psi^n>, b_n = <M U1, Psi^n>. Returns (U(t), U'(t)).
inline std::pair<std::vector<double>, std::vector<double>>
fourier_solution(const OperatorSet& ops, const Spectrum& spec, const std::vector<double>& u0,
                 const std::vector<double>& u1, double t) {
  const int n = ops.n();
  std::vector<double> u(n, 0.0), v(n, 0.0);
  const auto mu0 = ops.M.apply(u0);
  const auto mu1 = ops.M.apply(u1);
  for (const auto& p : spec.pairs) {
    double a = 0.0, b = 0.0;
    for (int i = 0; i < n; ++i) {
      a += mu0[i] * p.psi[i];
      b += mu1[i] * p.psi[i];
    }
    const double c = std::cos(p.freq * t), s = std::sin(p.freq * t);
    const double cu = a * c + b * s / p.freq;
    const double cv = -a * p.freq * s + b * c;
    for (int i = 0; i < n; ++i) {
      u[i] += cu * p.psi[i];
      v[i] += cv * p.psi[i];
    }
  }
  return {std::move(u), std::move(v)};
}

} // namespace waveobs
