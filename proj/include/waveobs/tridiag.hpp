#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "waveobs/errors.hpp"

namespace waveobs {

/// Symmetric tridiagonal matrix stored as stencil arrays: diag has n entries,
/// off has n-1. Matrix-vector products and quadratic forms run in O(n).
struct SymTriDiag {
  std::vector<double> diag;
  std::vector<double> off;

  SymTriDiag() = default;
  SymTriDiag(std::vector<double> d, std::vector<double> o)
      : diag(std::move(d)), off(std::move(o)) {
    if (off.size() + 1 != diag.size())
      throw std::invalid_argument("SymTriDiag: off must have diag.size()-1 entries");
  }

  std::size_t size() const { return diag.size(); }

  void apply(const std::vector<double>& v, std::vector<double>& out) const {
    const std::size_t n = size();
    if (v.size() != n || out.size() != n)
      throw std::invalid_argument("SymTriDiag::apply: length mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      double s = diag[i] * v[i];
      if (i > 0) s += off[i - 1] * v[i - 1];
      if (i + 1 < n) s += off[i] * v[i + 1];
      out[i] = s;
    }
  }

  std::vector<double> apply(const std::vector<double>& v) const {
    std::vector<double> out(size());
    apply(v, out);
    return out;
  }

  /// <T v, v>
  double quadform(const std::vector<double>& v) const {
    const std::size_t n = size();
    if (v.size() != n)
      throw std::invalid_argument("SymTriDiag::quadform: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s += diag[i] * v[i] * v[i];
      if (i + 1 < n) s += 2.0 * off[i] * v[i] * v[i + 1];
    }
    return s;
  }
};

/// LDL^T factorization of a symmetric positive definite tridiagonal matrix.
/// Factor once, solve many times in O(n). A non-positive pivot during
/// factorization signals loss of positive definiteness.
class TriDiagFactor {
public:
  explicit TriDiagFactor(const SymTriDiag& t) : d_(t.diag.size()), l_(t.off.size()) {
    const std::size_t n = t.diag.size();
    for (std::size_t i = 0; i < n; ++i) {
      double di = t.diag[i];
      if (i > 0) di -= l_[i - 1] * l_[i - 1] * d_[i - 1];
      if (!(di > 0.0))
        throw numerical_error("TriDiagFactor: non-positive pivot at row " + std::to_string(i));
      d_[i] = di;
      if (i + 1 < n) l_[i] = t.off[i] / di;
    }
  }

  void solve(const std::vector<double>& rhs, std::vector<double>& x) const {
    const std::size_t n = d_.size();
    if (rhs.size() != n || x.size() != n)
      throw std::invalid_argument("TriDiagFactor::solve: length mismatch");
    // L y = rhs
    for (std::size_t i = 0; i < n; ++i)
      x[i] = rhs[i] - (i > 0 ? l_[i - 1] * x[i - 1] : 0.0);
    // D z = y, L^T x = z
    for (std::size_t k = n; k-- > 0;) {
      x[k] /= d_[k];
      if (k + 1 < n) x[k] -= l_[k] * x[k + 1];
    }
  }

  std::vector<double> solve(const std::vector<double>& rhs) const {
    std::vector<double> x(d_.size());
    solve(rhs, x);
    return x;
  }

private:
  std::vector<double> d_; // pivots
  std::vector<double> l_; // subdiagonal multipliers
};

/// One-shot SPD tridiagonal solve.
inline std::vector<double> tridiag_solve(const SymTriDiag& t, const std::vector<double>& rhs) {
  return TriDiagFactor(t).solve(rhs);
}

/// General (possibly indefinite) tridiagonal solve with partial pivoting,
/// used for shifted systems (S - mu M) in eigenpair refinement.
inline std::vector<double> tridiag_solve_general(std::vector<double> sub, std::vector<double> diag,
                                                 std::vector<double> sup, std::vector<double> rhs) {
  const std::size_t n = diag.size();
  if (sub.size() + 1 != n || sup.size() + 1 != n || rhs.size() != n)
    throw std::invalid_argument("tridiag_solve_general: inconsistent lengths");
  // extra superdiagonal fill-in from row swaps
  std::vector<double> sup2(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(sub[i]) > std::abs(diag[i])) {
      std::swap(diag[i], sub[i]);
      std::swap(sup[i], diag[i + 1]);
      if (i + 2 < n) std::swap(sup2[i], sup[i + 1]);
      std::swap(rhs[i], rhs[i + 1]);
    }
    if (diag[i] == 0.0) throw numerical_error("tridiag_solve_general: singular pivot");
    const double m = sub[i] / diag[i];
    diag[i + 1] -= m * sup[i];
    if (i + 2 < n) sup[i + 1] -= m * sup2[i];
    rhs[i + 1] -= m * rhs[i];
  }
  if (diag[n - 1] == 0.0) throw numerical_error("tridiag_solve_general: singular pivot");
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = rhs[k];
    if (k + 1 < n) s -= sup[k] * x[k + 1];
    if (k + 2 < n) s -= sup2[k] * x[k + 2];
    x[k] = s / diag[k];
  }
  return x;
}

} // namespace waveobs
