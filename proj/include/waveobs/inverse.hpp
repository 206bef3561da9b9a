#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "waveobs/newmark.hpp"
#include "waveobs/operators.hpp"
#include "waveobs/projections.hpp"
#include "waveobs/rng.hpp"

namespace waveobs {

/// Spatial source profile f in the separable forcing lambda(t) f(x).
struct SourceSpec {
  ScalarFn eval;
  std::vector<double> discontinuities; // sorted, inside (0,1)
  std::string tag;

  double operator()(double x) const { return eval(x); }
};

/// Initial data (w0, w1) of the inverse problem, w0 in H^2 cap H^1_0 and
/// w1 in H^1_0. Only the first derivative of w0 is required: the
/// second-derivative cell integrals reduce to w0_x differences.
struct InitialDataSpec {
  ScalarFn w1;
  ScalarFn w0;
  ScalarFn w0_deriv;
  std::vector<double> discontinuities;
};

/// Source coefficients F solving M F = [ (1/2) int_{x_{j-1}}^{x_{j+1}} f ]_j.
inline std::vector<double> discretize_source(const SourceSpec& f, const OperatorSet& ops) {
  return tridiag_solve(ops.M, half_cell_integrals(f.eval, ops.grid, f.discontinuities));
}

/// Discrete initial data of the homogeneous companion system:
///   U0_j = w1(x_j),
///   M U1 = [ (1/2) int (w0_xx - a w0) ]_j,  int w0_xx = w0_x(x_{j+1}) - w0_x(x_{j-1}).
inline std::pair<std::vector<double>, std::vector<double>>
discretize_initial_data(const InitialDataSpec& data, const OperatorSet& ops) {
  const int n = ops.n();
  const Grid& grid = ops.grid;
  std::vector<double> u0(n, 0.0);
  if (data.w1)
    for (int j = 1; j <= n; ++j) u0[j - 1] = data.w1(grid.node(j));
  std::vector<double> rhs(n, 0.0);
  if (data.w0) {
    if (!data.w0_deriv)
      throw std::invalid_argument("discretize_initial_data: w0 given without its derivative");
    std::vector<double> splits = data.discontinuities;
    splits.insert(splits.end(), ops.potential.discontinuities.begin(),
                  ops.potential.discontinuities.end());
    std::sort(splits.begin(), splits.end());
    const ScalarFn aw0 = [&](double x) { return ops.potential(x) * data.w0(x); };
    const auto pot_int = half_cell_integrals(aw0, grid, splits);
    for (int j = 1; j <= n; ++j)
      rhs[j - 1] = 0.5 * (data.w0_deriv(grid.node(j + 1)) - data.w0_deriv(grid.node(j - 1))) -
                   pot_int[j - 1];
  }
  return {std::move(u0), tridiag_solve(ops.M, rhs)};
}

/// Everything fixed about one inverse-problem instance except the unknown
/// source: operators, intensity lambda with lambda(0) != 0, time grid,
/// function-level initial data and their discrete vectors.
struct InverseSetup {
  OperatorSet ops;
  ScalarFn intensity;
  TimeGrid time_grid;
  std::optional<InitialDataSpec> data_spec;
  std::vector<double> u0;
  std::vector<double> u1;
  bool has_initial_data = false;
};

inline InverseSetup make_inverse_setup(OperatorSet ops, ScalarFn intensity, double T, double dt,
                                       std::optional<InitialDataSpec> data = std::nullopt) {
  if (intensity(0.0) == 0.0)
    throw std::invalid_argument("make_inverse_setup: intensity must not vanish at t = 0");
  InverseSetup setup{std::move(ops), std::move(intensity), make_time_grid(T, dt),
                     std::move(data), {},           {},    false};
  const int n = setup.ops.n();
  if (setup.data_spec && (setup.data_spec->w0 || setup.data_spec->w1)) {
    auto [u0, u1] = discretize_initial_data(*setup.data_spec, setup.ops);
    setup.u0 = std::move(u0);
    setup.u1 = std::move(u1);
    setup.has_initial_data = true;
  } else {
    setup.u0.assign(n, 0.0);
    setup.u1.assign(n, 0.0);
  }
  return setup;
}

namespace detail {

struct SignalRows {
  std::vector<double> r1, r2;
};

/// Boundary rows of the forced system (zero initial data): r1 = v_1'/h,
/// r2 = v_1''/2 per sample.
inline SignalRows forced_rows(const OperatorSet& ops, const std::vector<double>& F,
                              const ScalarFn& intensity, const TimeGrid& tg) {
  SignalRows rows{std::vector<double>(tg.steps + 1), std::vector<double>(tg.steps + 1)};
  const int n = ops.n();
  const Forcing forcing{F, intensity};
  const std::vector<double> zero(n, 0.0);
  const double h = ops.h();
  newmark_run(ops, zero, zero, &forcing, tg,
              [&](int k, const std::vector<double>&, const std::vector<double>& V,
                  const std::vector<double>& A) {
                rows.r1[k] = V[0] / h;
                rows.r2[k] = A[0] / 2;
              });
  return rows;
}

/// Boundary rows of the homogeneous system from (u0,u1): r1 = u_1/h,
/// r2 = u_1'/2 per sample. Zero rows for vanishing data.
inline SignalRows offset_rows(const InverseSetup& setup) {
  const TimeGrid& tg = setup.time_grid;
  SignalRows rows{std::vector<double>(tg.steps + 1, 0.0), std::vector<double>(tg.steps + 1, 0.0)};
  if (!setup.has_initial_data) return rows;
  const double h = setup.ops.h();
  newmark_run(setup.ops, setup.u0, setup.u1, nullptr, tg,
              [&](int k, const std::vector<double>& W, const std::vector<double>& V,
                  const std::vector<double>&) {
                rows.r1[k] = W[0] / h;
                rows.r2[k] = V[0] / 2;
              });
  return rows;
}

inline std::vector<double> resample_linear(const std::vector<double>& y, double dt_from,
                                           double dt_to, int steps_to) {
  std::vector<double> out(steps_to + 1);
  const int last = static_cast<int>(y.size()) - 1;
  for (int k = 0; k <= steps_to; ++k) {
    const double t = k * dt_to;
    const double s = t / dt_from;
    int i = static_cast<int>(std::floor(s));
    if (i >= last) {
      out[k] = y[last];
      continue;
    }
    const double frac = s - i;
    out[k] = (1 - frac) * y[i] + frac * y[i + 1];
  }
  return out;
}

} // namespace detail

/// Boundary observation with provenance: synthesized on a strictly finer
/// mesh, second component identically zero for clean data, optional
/// multiplicative Gaussian noise (1 + delta zeta_k).
struct SyntheticObservation {
  ObservationSignal signal;
  int fine_n = 0;
  double delta = 0.0;
  std::uint64_t seed = 0;
};

/// Forward-solve the inverse problem on a strictly finer mesh, take the first
/// observation component (v_1' + u_1)/h, zero the second per the continuous
/// observation, resample onto the coarse time grid by linear interpolation
/// and optionally apply multiplicative noise. Initial data, when present in
/// the setup, are rebuilt from their function specs on the fine mesh.
inline SyntheticObservation synthesize_observation(const InverseSetup& setup,
                                                   const SourceSpec& f_true, int n_fine,
                                                   double delta, std::uint64_t seed) {
  const int n = setup.ops.n();
  if (n_fine < 4 * (n + 1) - 1)
    throw std::invalid_argument(
        "synthesize_observation: fine mesh must satisfy n_fine >= 4(n+1)-1 (inverse-crime guard)");
  if (delta < 0.0) throw std::invalid_argument("synthesize_observation: delta must be >= 0");
  const OperatorSet fine_ops = assemble(build_grid(n_fine), setup.ops.potential);
  const double hf = fine_ops.h();
  const TimeGrid& tg = setup.time_grid;
  const int m = std::max(1, static_cast<int>(std::ceil(tg.dt / hf)));
  const TimeGrid fine_tg{tg.T, tg.dt / m, tg.steps * m};

  const std::vector<double> Ff = discretize_source(f_true, fine_ops);
  std::vector<double> y1(fine_tg.steps + 1, 0.0);
  {
    const Forcing forcing{Ff, setup.intensity};
    const std::vector<double> zero(n_fine, 0.0);
    newmark_run(fine_ops, zero, zero, &forcing, fine_tg,
                [&](int k, const std::vector<double>&, const std::vector<double>& V,
                    const std::vector<double>&) { y1[k] = V[0] / hf; });
  }
  if (setup.has_initial_data) {
    auto [u0f, u1f] = discretize_initial_data(*setup.data_spec, fine_ops);
    newmark_run(fine_ops, u0f, u1f, nullptr, fine_tg,
                [&](int k, const std::vector<double>& W, const std::vector<double>&,
                    const std::vector<double>&) { y1[k] += W[0] / hf; });
  }
  std::vector<double> coarse = detail::resample_linear(y1, fine_tg.dt, tg.dt, tg.steps);
  if (delta > 0.0) {
    SplitMix64 rng(seed);
    for (double& v : coarse) v *= 1.0 + delta * rng.next_normal();
  }
  SyntheticObservation obs{ObservationSignal{tg.dt, {}}, n_fine, delta, seed};
  obs.signal.samples.reserve(tg.steps + 1);
  for (double v : coarse) obs.signal.samples.push_back({v, 0.0});
  return obs;
}

namespace detail {

inline void check_signal(const SyntheticObservation& y, const InverseSetup& setup) {
  if (static_cast<int>(y.signal.samples.size()) != setup.time_grid.steps + 1)
    throw std::invalid_argument("observation sample count does not match the setup time grid");
}

} // namespace detail

/// Least-squares misfit J(F) = (1/2) || Y_h(F) - y ||^2_{[L^2(0,T)]^2} with
/// trapezoid time quadrature; the u-part of Y_h enters when the setup has
/// nonzero initial data.
inline double functional_J(const std::vector<double>& F, const SyntheticObservation& y,
                           const InverseSetup& setup) {
  detail::check_signal(y, setup);
  const TimeGrid& tg = setup.time_grid;
  const auto rows = detail::forced_rows(setup.ops, F, setup.intensity, tg);
  const auto off = detail::offset_rows(setup);
  double J = 0.0;
  for (int k = 0; k <= tg.steps; ++k) {
    const double wk = (k == 0 || k == tg.steps) ? tg.dt / 2 : tg.dt;
    const double r1 = rows.r1[k] + off.r1[k] - y.signal.samples[k][0];
    const double r2 = rows.r2[k] + off.r2[k] - y.signal.samples[k][1];
    J += 0.5 * wk * (r1 * r1 + r2 * r2);
  }
  return J;
}

/// Exact gradient of the fully discrete J (discretize-then-optimize): the
/// boundary residual drives the transposed Newmark recursion backward and is
/// accumulated against the intensity-weighted source injection.
inline std::vector<double> gradient_J(const std::vector<double>& F, const SyntheticObservation& y,
                                      const InverseSetup& setup) {
  detail::check_signal(y, setup);
  const TimeGrid& tg = setup.time_grid;
  const double h = setup.ops.h();
  const auto rows = detail::forced_rows(setup.ops, F, setup.intensity, tg);
  const auto off = detail::offset_rows(setup);
  std::vector<double> rowsV(tg.steps + 1), rowsA(tg.steps + 1);
  for (int k = 0; k <= tg.steps; ++k) {
    const double wk = (k == 0 || k == tg.steps) ? tg.dt / 2 : tg.dt;
    rowsV[k] = wk * (rows.r1[k] + off.r1[k] - y.signal.samples[k][0]) / h;
    rowsA[k] = wk * (rows.r2[k] + off.r2[k] - y.signal.samples[k][1]) / 2;
  }
  return adjoint_source_gradient(setup.ops, setup.intensity, tg, rowsV, rowsA);
}

struct ReconstructOptions {
  double grad_tol = 1e-6; // stop when ||grad J|| <= grad_tol
  int max_iterations = 0; // 0 means 10 N
  std::optional<SourceSpec> truth; // fills the error fields when present
};

struct ReconstructionResult {
  std::vector<double> F;
  int iterations = 0;
  double grad_norm = 0.0;
  double J = 0.0;
  bool converged = false;
  bool short_time_warning = false; // T below the continuous minimal time 2
  double l2_error = std::numeric_limits<double>::quiet_NaN();    // nodal (hat) expansion vs truth
  double l2_error_pc = std::numeric_limits<double>::quiet_NaN(); // piecewise-constant expansion
  double m_error = std::numeric_limits<double>::quiet_NaN();     // ||F - F_true||_M
};

/// L^2(0,1) distance between f and the piecewise-linear interpolant of the
/// coefficients at the nodes (the table error norm).
inline double l2_error_nodal(const std::vector<double>& F, const SourceSpec& truth,
                             const OperatorSet& ops) {
  const int n = ops.n();
  const double h = ops.h();
  const int nsub = std::max(8, 10000 / (n + 1) / 2);
  double tot = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double a = ops.grid.node(j);
    const double fl = (j == 0) ? 0.0 : F[j - 1];
    const double fr = (j == n) ? 0.0 : F[j];
    const ScalarFn integrand = [&](double x) {
      const double lin = fl + (fr - fl) * (x - a) / h;
      const double d = truth(x) - lin;
      return d * d;
    };
    tot += integrate_split(integrand, a, a + h, truth.discontinuities, nsub);
  }
  return std::sqrt(tot);
}

/// L^2(0,1) distance between f and the overlapping piecewise-constant
/// expansion sum F_j psi_j, whose value on cell (x_j, x_{j+1}) is
/// (F_j + F_{j+1})/2.
inline double l2_error_piecewise_constant(const std::vector<double>& F, const SourceSpec& truth,
                                          const OperatorSet& ops) {
  const int n = ops.n();
  const double h = ops.h();
  const int nsub = std::max(8, 10000 / (n + 1) / 2);
  double tot = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double a = ops.grid.node(j);
    const double fl = (j == 0) ? 0.0 : F[j - 1];
    const double fr = (j == n) ? 0.0 : F[j];
    const double c = 0.5 * (fl + fr);
    const ScalarFn integrand = [&](double x) {
      const double d = truth(x) - c;
      return d * d;
    };
    tot += integrate_split(integrand, a, a + h, truth.discontinuities, nsub);
  }
  return std::sqrt(tot);
}

/// Conjugate gradients on the quadratic J with exact line search; the
/// Hessian is applied matrix-free as one forward plus one adjoint sweep.
/// Stops at ||grad J|| <= grad_tol or the iteration cap (result flagged
/// non-converged, no exception).
inline ReconstructionResult reconstruct(const InverseSetup& setup, const SyntheticObservation& y,
                                        const ReconstructOptions& options = {}) {
  detail::check_signal(y, setup);
  const int n = setup.ops.n();
  const TimeGrid& tg = setup.time_grid;
  const double h = setup.ops.h();
  const int cap = options.max_iterations > 0 ? options.max_iterations : 10 * n;

  const auto off = detail::offset_rows(setup);
  std::vector<double> weights(tg.steps + 1, tg.dt);
  weights.front() *= 0.5;
  weights.back() *= 0.5;

  const auto apply_adjoint = [&](const std::vector<double>& r1, const std::vector<double>& r2) {
    std::vector<double> rowsV(tg.steps + 1), rowsA(tg.steps + 1);
    for (int k = 0; k <= tg.steps; ++k) {
      rowsV[k] = weights[k] * r1[k] / h;
      rowsA[k] = weights[k] * r2[k] / 2;
    }
    return adjoint_source_gradient(setup.ops, setup.intensity, tg, rowsV, rowsA);
  };
  const auto apply_H = [&](const std::vector<double>& p) {
    const auto rows = detail::forced_rows(setup.ops, p, setup.intensity, tg);
    return apply_adjoint(rows.r1, rows.r2);
  };

  // b = -grad J(0) = A^T w (y - offset)
  std::vector<double> c1(tg.steps + 1), c2(tg.steps + 1);
  for (int k = 0; k <= tg.steps; ++k) {
    c1[k] = y.signal.samples[k][0] - off.r1[k];
    c2[k] = y.signal.samples[k][1] - off.r2[k];
  }
  const std::vector<double> b = apply_adjoint(c1, c2);

  const auto dot = [](const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
  };

  ReconstructionResult result;
  result.short_time_warning = tg.T < 2.0;
  std::vector<double> x(n, 0.0);
  std::vector<double> r = b;
  int iterations = 0;
  double grad_norm = std::sqrt(dot(r, r));
  while (grad_norm > options.grad_tol && iterations < cap) {
    std::vector<double> p = r;
    double rr = dot(r, r);
    while (std::sqrt(rr) > options.grad_tol && iterations < cap) {
      const std::vector<double> Hp = apply_H(p);
      const double pHp = dot(p, Hp);
      if (!(pHp > 0.0)) break; // numerically semi-definite direction
      const double alpha = rr / pHp;
      for (int i = 0; i < n; ++i) x[i] += alpha * p[i];
      for (int i = 0; i < n; ++i) r[i] -= alpha * Hp[i];
      const double rr_new = dot(r, r);
      const double beta = rr_new / rr;
      for (int i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
      rr = rr_new;
      ++iterations;
    }
    // refresh the true residual; restart CG if rounding drift hid it
    const std::vector<double> Hx = apply_H(x);
    for (int i = 0; i < n; ++i) r[i] = b[i] - Hx[i];
    const double true_norm = std::sqrt(dot(r, r));
    if (true_norm >= grad_norm && true_norm > options.grad_tol) {
      grad_norm = true_norm;
      break; // stagnated at rounding level
    }
    grad_norm = true_norm;
  }

  result.F = std::move(x);
  result.iterations = iterations;
  result.grad_norm = grad_norm;
  result.converged = grad_norm <= options.grad_tol;
  result.J = functional_J(result.F, y, setup);
  if (options.truth) {
    result.l2_error = l2_error_nodal(result.F, *options.truth, setup.ops);
    result.l2_error_pc = l2_error_piecewise_constant(result.F, *options.truth, setup.ops);
    const auto Ft = discretize_source(*options.truth, setup.ops);
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) d[i] = result.F[i] - Ft[i];
    result.m_error = m_norm(setup.ops, d);
  }
  return result;
}

} // namespace waveobs
