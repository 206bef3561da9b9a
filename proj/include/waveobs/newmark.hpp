#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "waveobs/operators.hpp"
#include "waveobs/quadrature.hpp"
#include "waveobs/tridiag.hpp"

namespace waveobs {

struct TimeGrid {
  double T = 0.0;
  double dt = 0.0;
  int steps = 0;

  double time(int k) const { return k * dt; }
};

/// Round to the nearest whole number of steps and adjust dt so that
/// steps * dt == T exactly up to rounding.
inline TimeGrid make_time_grid(double T, double dt_target) {
  if (!(T > 0.0) || !(dt_target > 0.0))
    throw std::invalid_argument("make_time_grid: T and dt must be positive");
  int steps = static_cast<int>(std::lround(T / dt_target));
  if (steps < 1) steps = 1;
  return TimeGrid{T, T / steps, steps};
}

/// Separable forcing G(t) = intensity(t) * shape, entering the scheme as
/// M W'' + (K+L) W = M G(t).
struct Forcing {
  std::vector<double> shape;
  ScalarFn intensity;
};

/// Displacement, velocity and algebraic acceleration coefficients at one
/// time sample. A always satisfies M A + (K+L) W = M G(t).
struct State {
  std::vector<double> W;
  std::vector<double> V;
  std::vector<double> A;
};

struct Trajectory {
  TimeGrid time_grid;
  std::vector<State> samples;
};

/// Two-component boundary time series at fixed sampling step.
struct ObservationSignal {
  double dt = 0.0;
  std::vector<std::array<double, 2>> samples;
};

/// Newmark average-acceleration sweep (beta = 1/4, gamma = 1/2), equivalent
/// to the trapezoidal rule on the first-order system; unconditionally stable
/// and exactly energy-conserving for the homogeneous problem. The visitor is
/// called as visit(k, W, V, A) at every sample k = 0..steps.
template <class Visitor>
void newmark_run(const OperatorSet& ops, std::vector<double> W, std::vector<double> V,
                 const Forcing* forcing, const TimeGrid& tg, Visitor&& visit) {
  const int n = ops.n();
  if (static_cast<int>(W.size()) != n || static_cast<int>(V.size()) != n)
    throw std::invalid_argument("newmark_run: initial data length mismatch");
  if (forcing && static_cast<int>(forcing->shape.size()) != n)
    throw std::invalid_argument("newmark_run: forcing shape length mismatch");
  const double dt = tg.dt;
  const double q = dt * dt / 4;

  SymTriDiag P = ops.S;
  for (int i = 0; i < n; ++i) P.diag[i] = ops.M.diag[i] + q * P.diag[i];
  for (int i = 0; i + 1 < n; ++i) P.off[i] = ops.M.off[i] + q * ops.S.off[i];
  const TriDiagFactor Pf(P);
  const TriDiagFactor Mf(ops.M);

  std::vector<double> A(n), Z(n), R(n), tmp(n);
  std::vector<double> MF;
  if (forcing) MF = ops.M.apply(forcing->shape);

  // M A(0) = M G(0) - S W(0)
  ops.S.apply(W, R);
  for (int i = 0; i < n; ++i) R[i] = -R[i];
  if (forcing) {
    const double l0 = forcing->intensity(0.0);
    for (int i = 0; i < n; ++i) R[i] += l0 * MF[i];
  }
  Mf.solve(R, A);
  visit(0, W, V, A);

  for (int k = 0; k < tg.steps; ++k) {
    for (int i = 0; i < n; ++i) Z[i] = W[i] + dt * V[i] + q * A[i];
    ops.S.apply(Z, R);
    for (int i = 0; i < n; ++i) R[i] = -R[i];
    if (forcing) {
      const double lk = forcing->intensity(tg.time(k + 1));
      for (int i = 0; i < n; ++i) R[i] += lk * MF[i];
    }
    Pf.solve(R, tmp); // tmp = A_{k+1}
    for (int i = 0; i < n; ++i) {
      W[i] = Z[i] + q * tmp[i];
      V[i] += dt / 2 * (A[i] + tmp[i]);
      A[i] = tmp[i];
    }
    visit(k + 1, W, V, A);
  }
}

inline Trajectory integrate(const OperatorSet& ops, const std::vector<double>& w0,
                            const std::vector<double>& w1,
                            const std::optional<Forcing>& forcing, const TimeGrid& tg) {
  Trajectory traj{tg, {}};
  traj.samples.reserve(tg.steps + 1);
  newmark_run(ops, w0, w1, forcing ? &*forcing : nullptr, tg,
              [&](int, const std::vector<double>& W, const std::vector<double>& V,
                  const std::vector<double>& A) { traj.samples.push_back(State{W, V, A}); });
  return traj;
}

/// Conserved discrete energy E = (1/2)(<M V,V> + <(K+L) W,W>).
inline double energy(const OperatorSet& ops, const State& s) {
  return 0.5 * (ops.M.quadform(s.V) + ops.S.quadform(s.W));
}

/// Boundary observation of a homogeneous trajectory: (w_1/h, w_1'/2) where
/// index 1 is the first interior node.
inline ObservationSignal boundary_trace(const OperatorSet& ops, const Trajectory& traj) {
  if (traj.samples.empty()) throw std::invalid_argument("boundary_trace: empty trajectory");
  ObservationSignal sig{traj.time_grid.dt, {}};
  sig.samples.reserve(traj.samples.size());
  for (const auto& s : traj.samples)
    sig.samples.push_back({s.W[0] / ops.h(), s.V[0] / 2});
  return sig;
}

/// Inverse-problem observation Y = ((v_1' + u_1)/h, (v_1'' + u_1')/2) built
/// from the forced trajectory v (zero initial data) and, when the initial
/// data do not vanish, the homogeneous trajectory u. v_1'' is the stored
/// algebraic acceleration, never a difference quotient.
inline ObservationSignal observation_Y(const OperatorSet& ops, const Trajectory& v_traj,
                                       const Trajectory* u_traj = nullptr) {
  if (u_traj && (u_traj->samples.size() != v_traj.samples.size() ||
                 u_traj->time_grid.dt != v_traj.time_grid.dt))
    throw std::invalid_argument("observation_Y: mismatched time grids");
  ObservationSignal sig{v_traj.time_grid.dt, {}};
  sig.samples.reserve(v_traj.samples.size());
  for (std::size_t k = 0; k < v_traj.samples.size(); ++k) {
    const auto& v = v_traj.samples[k];
    double y1 = v.V[0], y2 = v.A[0];
    if (u_traj) {
      y1 += u_traj->samples[k].W[0];
      y2 += u_traj->samples[k].V[0];
    }
    sig.samples.push_back({y1 / ops.h(), y2 / 2});
  }
  return sig;
}

/// Trapezoid quadrature weights dt*(1/2,1,...,1,1/2) on steps+1 samples.
inline std::vector<double> trapezoid_weights(const TimeGrid& tg) {
  std::vector<double> w(tg.steps + 1, tg.dt);
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

/// Squared [L^2(0,T)]^2 norm of a signal by the composite trapezoid rule.
inline double signal_norm_sq(const ObservationSignal& sig) {
  const int steps = static_cast<int>(sig.samples.size()) - 1;
  double s = 0.0;
  for (int k = 0; k <= steps; ++k) {
    const double wk = (k == 0 || k == steps) ? sig.dt / 2 : sig.dt;
    s += wk * (sig.samples[k][0] * sig.samples[k][0] + sig.samples[k][1] * sig.samples[k][1]);
  }
  return s;
}

/// Gradient of a linear functional sum_k (rowsV[k] V_k[0] + rowsA[k] A_k[0])
/// of the forced Newmark sweep with respect to the source shape F, by the
/// transposed recursion run backward. rows arrays have steps+1 entries.
inline std::vector<double> adjoint_source_gradient(const OperatorSet& ops, const ScalarFn& intensity,
                                                   const TimeGrid& tg,
                                                   const std::vector<double>& rowsV,
                                                   const std::vector<double>& rowsA) {
  const int n = ops.n();
  const int K = tg.steps;
  if (static_cast<int>(rowsV.size()) != K + 1 || static_cast<int>(rowsA.size()) != K + 1)
    throw std::invalid_argument("adjoint_source_gradient: rows length mismatch");
  const double dt = tg.dt;
  const double q = dt * dt / 4;

  SymTriDiag P = ops.S;
  for (int i = 0; i < n; ++i) P.diag[i] = ops.M.diag[i] + q * P.diag[i];
  for (int i = 0; i + 1 < n; ++i) P.off[i] = ops.M.off[i] + q * ops.S.off[i];
  const TriDiagFactor Pf(P);

  std::vector<double> Wh(n, 0.0), Vh(n, 0.0), Ah(n, 0.0);
  std::vector<double> ahat(n), qv(n), Sq(n), Mq(n), grad(n, 0.0);
  Vh[0] = rowsV[K];
  Ah[0] = rowsA[K];
  for (int k = K - 1; k >= 0; --k) {
    for (int i = 0; i < n; ++i) ahat[i] = Ah[i] + q * Wh[i] + dt / 2 * Vh[i];
    Pf.solve(ahat, qv);
    ops.M.apply(qv, Mq);
    const double lk = intensity(tg.time(k + 1));
    for (int i = 0; i < n; ++i) grad[i] += lk * Mq[i];
    ops.S.apply(qv, Sq);
    for (int i = 0; i < n; ++i) {
      const double Zh = Wh[i] - Sq[i];
      const double Vh_old = Vh[i];
      Wh[i] = Zh;
      Vh[i] = dt * Zh + Vh_old;
      Ah[i] = q * Zh + dt / 2 * Vh_old;
    }
    Vh[0] += rowsV[k];
    Ah[0] += rowsA[k];
  }
  // A(0) = intensity(0) F for zero initial data
  const double l0 = intensity(0.0);
  for (int i = 0; i < n; ++i) grad[i] += l0 * Ah[i];
  return grad;
}

/// Gradient of sum_k (rowsW[k] W_k[0] + rowsV[k] V_k[0]) of the homogeneous
/// Newmark sweep with respect to the initial data (W0, V0).
inline std::pair<std::vector<double>, std::vector<double>>
adjoint_data_gradient(const OperatorSet& ops, const TimeGrid& tg, const std::vector<double>& rowsW,
                      const std::vector<double>& rowsV) {
  const int n = ops.n();
  const int K = tg.steps;
  if (static_cast<int>(rowsW.size()) != K + 1 || static_cast<int>(rowsV.size()) != K + 1)
    throw std::invalid_argument("adjoint_data_gradient: rows length mismatch");
  const double dt = tg.dt;
  const double q = dt * dt / 4;

  SymTriDiag P = ops.S;
  for (int i = 0; i < n; ++i) P.diag[i] = ops.M.diag[i] + q * P.diag[i];
  for (int i = 0; i + 1 < n; ++i) P.off[i] = ops.M.off[i] + q * ops.S.off[i];
  const TriDiagFactor Pf(P);
  const TriDiagFactor Mf(ops.M);

  std::vector<double> Wh(n, 0.0), Vh(n, 0.0), Ah(n, 0.0);
  std::vector<double> ahat(n), qv(n), Sq(n);
  Wh[0] = rowsW[K];
  Vh[0] = rowsV[K];
  for (int k = K - 1; k >= 0; --k) {
    for (int i = 0; i < n; ++i) ahat[i] = Ah[i] + q * Wh[i] + dt / 2 * Vh[i];
    Pf.solve(ahat, qv);
    ops.S.apply(qv, Sq);
    for (int i = 0; i < n; ++i) {
      const double Zh = Wh[i] - Sq[i];
      const double Vh_old = Vh[i];
      Wh[i] = Zh;
      Vh[i] = dt * Zh + Vh_old;
      Ah[i] = q * Zh + dt / 2 * Vh_old;
    }
    Wh[0] += rowsW[k];
    Vh[0] += rowsV[k];
  }
  // A(0) = -M^{-1} S W0
  Mf.solve(Ah, qv);
  ops.S.apply(qv, Sq);
  std::vector<double> gW0(n), gV0(n);
  for (int i = 0; i < n; ++i) {
    gW0[i] = Wh[i] - Sq[i];
    gV0[i] = Vh[i];
  }
  return {std::move(gW0), std::move(gV0)};
}

} // namespace waveobs
