#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <variant>
#include <vector>

#include "waveobs/newmark.hpp"
#include "waveobs/operators.hpp"
#include "waveobs/rng.hpp"
#include "waveobs/spectral.hpp"

namespace waveobs {

namespace detail {

inline std::pair<double, double> boundary_energy_terms(const OperatorSet& ops,
                                                       const std::vector<double>& w0,
                                                       const std::vector<double>& w1, double T,
                                                       double dt) {
  const TimeGrid tg = make_time_grid(T, dt);
  const double h = ops.h();
  double first = 0.0, second = 0.0;
  newmark_run(ops, w0, w1, nullptr, tg,
              [&](int k, const std::vector<double>& W, const std::vector<double>& V,
                  const std::vector<double>&) {
                const double wk = (k == 0 || k == tg.steps) ? tg.dt / 2 : tg.dt;
                first += wk * (W[0] / h) * (W[0] / h);
                second += wk * (V[0] / 2) * (V[0] / 2);
              });
  return {first, second};
}

} // namespace detail

/// Boundary-observation quotient of one homogeneous solution:
///   int_0^T (|u_1/h|^2 + |u_1'/2|^2) dt / ||(W0,W1)||_{1,M}^2,
/// trapezoid rule in time. The observability constant kappa_0 is the infimum
/// of this quotient over nonzero data.
inline double observability_quotient(const OperatorSet& ops, const std::vector<double>& w0,
                                     const std::vector<double>& w1, double T, double dt) {
  const double den = ops.S.quadform(w0) + ops.M.quadform(w1);
  if (!(den > 0.0)) throw std::invalid_argument("observability_quotient: zero datum");
  const auto [first, second] = detail::boundary_energy_terms(ops, w0, w1, T, dt);
  return (first + second) / den;
}

/// Same quotient keeping only the normal-derivative term |u_1/h|^2. Not
/// uniform in h; used to witness that the mass-matrix term is necessary.
inline double observability_quotient_first_term(const OperatorSet& ops,
                                                const std::vector<double>& w0,
                                                const std::vector<double>& w1, double T,
                                                double dt) {
  const double den = ops.S.quadform(w0) + ops.M.quadform(w1);
  if (!(den > 0.0)) throw std::invalid_argument("observability_quotient: zero datum");
  return detail::boundary_energy_terms(ops, w0, w1, T, dt).first / den;
}

/// Single eigenmodes plus antisymmetric nearest-neighbour pairs plus random
/// two-mode combinations; the two-mode solutions are the critical structure
/// for the gap estimates.
struct EigenmodeSearch {
  int pair_trials = 200;
  std::uint64_t seed = 1;
};

/// Unit-energy data with independent normal coefficients.
struct RandomSearch {
  int trials = 200;
  std::uint64_t seed = 1;
};

/// Projected gradient descent on the quotient over (W0,W1), restarted from a
/// few random points; gradients come from the transposed Newmark recursion.
struct RayleighMinimization {
  int iterations = 120;
  int restarts = 3;
  std::uint64_t seed = 1;
};

using MinQuotientStrategy = std::variant<EigenmodeSearch, RandomSearch, RayleighMinimization>;

struct MinQuotientResult {
  double kappa0 = 0.0;
  std::string witness;
  std::vector<double> w0;
  std::vector<double> w1;
};

namespace detail {

inline void consider(const OperatorSet& ops, double T, double dt, const std::vector<double>& w0,
                     const std::vector<double>& w1, const std::string& desc,
                     MinQuotientResult& best) {
  const double q = observability_quotient(ops, w0, w1, T, dt);
  if (q < best.kappa0) {
    best.kappa0 = q;
    best.witness = desc;
    best.w0 = w0;
    best.w1 = w1;
  }
}

inline MinQuotientResult eigenmode_search(const OperatorSet& ops, double T, double dt,
                                          const EigenmodeSearch& cfg) {
  const int n = ops.n();
  const Spectrum spec = generalized_eigen(ops);
  MinQuotientResult best;
  best.kappa0 = std::numeric_limits<double>::infinity();
  const std::vector<double> zero(n, 0.0);
  for (int j = 0; j < n; ++j) {
    consider(ops, T, dt, spec.pairs[j].psi, zero, "mode " + std::to_string(j + 1), best);
    consider(ops, T, dt, zero, spec.pairs[j].psi, "mode " + std::to_string(j + 1) + " (velocity)",
             best);
  }
  std::vector<double> w0(n), w1(n);
  for (int j = 0; j + 1 < n; ++j) {
    const auto& a = spec.pairs[j].psi;
    const auto& b = spec.pairs[j + 1].psi;
    static constexpr double combos[4][4] = {
        {1, 0, -1, 0}, {0, 1, 0, -1}, {1, 1, -1, -1}, {1, 0, 0, -1}};
    for (const auto& c : combos) {
      for (int i = 0; i < n; ++i) {
        w0[i] = c[0] * a[i] + c[2] * b[i];
        w1[i] = c[1] * a[i] + c[3] * b[i];
      }
      consider(ops, T, dt, w0, w1,
               "modes " + std::to_string(j + 1) + "+" + std::to_string(j + 2), best);
    }
  }
  SplitMix64 rng(cfg.seed);
  for (int trial = 0; trial < cfg.pair_trials; ++trial) {
    const int i = static_cast<int>(rng.next_u64() % n);
    const int j = static_cast<int>(rng.next_u64() % n);
    if (i == j) continue;
    const double c0 = rng.next_normal(), c1 = rng.next_normal();
    const double c2 = rng.next_normal(), c3 = rng.next_normal();
    for (int r = 0; r < n; ++r) {
      w0[r] = c0 * spec.pairs[i].psi[r] + c2 * spec.pairs[j].psi[r];
      w1[r] = c1 * spec.pairs[i].psi[r] + c3 * spec.pairs[j].psi[r];
    }
    consider(ops, T, dt, w0, w1,
             "modes " + std::to_string(i + 1) + "+" + std::to_string(j + 1) + " (random)", best);
  }
  return best;
}

inline MinQuotientResult random_search(const OperatorSet& ops, double T, double dt,
                                       const RandomSearch& cfg) {
  const int n = ops.n();
  MinQuotientResult best;
  best.kappa0 = std::numeric_limits<double>::infinity();
  SplitMix64 rng(cfg.seed);
  std::vector<double> w0(n), w1(n);
  for (int trial = 0; trial < cfg.trials; ++trial) {
    for (int i = 0; i < n; ++i) w0[i] = rng.next_normal();
    for (int i = 0; i < n; ++i) w1[i] = rng.next_normal();
    const double e = energy_norm_1M(ops, w0, w1);
    for (int i = 0; i < n; ++i) {
      w0[i] /= e;
      w1[i] /= e;
    }
    consider(ops, T, dt, w0, w1, "random trial " + std::to_string(trial), best);
  }
  return best;
}

inline MinQuotientResult rayleigh_minimization(const OperatorSet& ops, double T, double dt,
                                               const RayleighMinimization& cfg) {
  const int n = ops.n();
  const double h = ops.h();
  const TimeGrid tg = make_time_grid(T, dt);
  MinQuotientResult best;
  best.kappa0 = std::numeric_limits<double>::infinity();
  SplitMix64 rng(cfg.seed);

  std::vector<double> rowsW(tg.steps + 1), rowsV(tg.steps + 1);
  for (int restart = 0; restart < cfg.restarts; ++restart) {
    std::vector<double> w0(n), w1(n);
    for (int i = 0; i < n; ++i) w0[i] = rng.next_normal();
    for (int i = 0; i < n; ++i) w1[i] = rng.next_normal();
    double step = 0.5;
    double q = observability_quotient(ops, w0, w1, T, dt);
    for (int it = 0; it < cfg.iterations; ++it) {
      // numerator and its row seeds at the current datum
      double num = 0.0;
      newmark_run(ops, w0, w1, nullptr, tg,
                  [&](int k, const std::vector<double>& W, const std::vector<double>& V,
                      const std::vector<double>&) {
                    const double wk = (k == 0 || k == tg.steps) ? tg.dt / 2 : tg.dt;
                    num += wk * ((W[0] / h) * (W[0] / h) + (V[0] / 2) * (V[0] / 2));
                    rowsW[k] = 2 * wk * W[0] / (h * h);
                    rowsV[k] = 2 * wk * V[0] / 4;
                  });
      const double den = ops.S.quadform(w0) + ops.M.quadform(w1);
      q = num / den;
      auto [gN0, gN1] = adjoint_data_gradient(ops, tg, rowsW, rowsV);
      const auto sw0 = ops.S.apply(w0);
      const auto mw1 = ops.M.apply(w1);
      // grad of N/D, then an energy-normalized descent step with backtracking
      std::vector<double> g0(n), g1(n);
      double gnorm2 = 0.0;
      for (int i = 0; i < n; ++i) {
        g0[i] = (gN0[i] - q * 2 * sw0[i]) / den;
        g1[i] = (gN1[i] - q * 2 * mw1[i]) / den;
        gnorm2 += g0[i] * g0[i] + g1[i] * g1[i];
      }
      if (!(gnorm2 > 0.0)) break;
      bool moved = false;
      for (int bt = 0; bt < 8 && !moved; ++bt) {
        std::vector<double> t0(n), t1(n);
        for (int i = 0; i < n; ++i) {
          t0[i] = w0[i] - step * g0[i] / std::sqrt(gnorm2);
          t1[i] = w1[i] - step * g1[i] / std::sqrt(gnorm2);
        }
        const double e = energy_norm_1M(ops, t0, t1);
        if (e > 0.0) {
          for (int i = 0; i < n; ++i) {
            t0[i] /= e;
            t1[i] /= e;
          }
          const double qt = observability_quotient(ops, t0, t1, T, dt);
          if (qt < q) {
            w0 = std::move(t0);
            w1 = std::move(t1);
            q = qt;
            moved = true;
            step *= 1.3;
          }
        }
        if (!moved) step *= 0.5;
      }
      if (!moved && step < 1e-12) break;
    }
    consider(ops, T, dt, w0, w1, "rayleigh restart " + std::to_string(restart), best);
  }
  return best;
}

} // namespace detail

/// Minimize the boundary quotient over initial data with the requested search
/// strategy; returns the smallest quotient found and the witnessing datum.
inline MinQuotientResult min_quotient(const OperatorSet& ops, double T, double dt,
                                      const MinQuotientStrategy& strategy) {
  if (!(T > 0.0)) throw std::invalid_argument("min_quotient: T must be positive");
  return std::visit(
      [&](const auto& cfg) {
        using C = std::decay_t<decltype(cfg)>;
        if constexpr (std::is_same_v<C, EigenmodeSearch>)
          return detail::eigenmode_search(ops, T, dt, cfg);
        else if constexpr (std::is_same_v<C, RandomSearch>)
          return detail::random_search(ops, T, dt, cfg);
        else
          return detail::rayleigh_minimization(ops, T, dt, cfg);
      },
      strategy);
}

struct ObservabilityRecord {
  int n = 0;
  double h = 0.0;
  double quotient = 0.0;
  std::string witness;
};

/// Uniformity report for the observability constant across a mesh family:
/// per-N worst quotients and the overall minimum. Theory guarantees a
/// uniform constant only for T > T_0 >= 2; T is a free parameter here.
struct ObservabilityReport {
  double T = 0.0;
  std::vector<ObservabilityRecord> records;
  double kappa0 = 0.0;
};

/// dt policy for quotient evaluation: fine enough that time-quadrature error
/// stays below spatial effects.
inline double quotient_dt(double h, double T) { return std::min(h, T / 3000.0); }

inline ObservabilityReport observability_sweep(const PotentialSpec& potential,
                                               const std::vector<int>& n_list, double T,
                                               const MinQuotientStrategy& strategy) {
  ObservabilityReport report;
  report.T = T;
  report.kappa0 = std::numeric_limits<double>::infinity();
  for (int n : n_list) {
    const OperatorSet ops = assemble(build_grid(n), potential);
    const auto res = min_quotient(ops, T, quotient_dt(ops.h(), T), strategy);
    report.records.push_back(ObservabilityRecord{n, ops.h(), res.kappa0, res.witness});
    report.kappa0 = std::min(report.kappa0, res.kappa0);
  }
  return report;
}

struct InghamSumResult {
  double integral = 0.0;  // int_0^T |sum_n b_n e^{-i lambda_n t}|^2 dt
  double coeff_sum = 0.0; // sum |b_n|^2
  double constant = 0.0;  // coeff_sum / integral, the empirical Ingham constant
};

/// Nonharmonic-Fourier sum check over the full signed frequency family
/// lambda^{-n} = -lambda^n. coeffs has 2N entries ordered
/// (n = -N..-1, then n = 1..N). The time integral uses the trapezoid rule
/// with step dt; tracked across N at fixed T > 2 pi / gap.
inline InghamSumResult ingham_sum_check(const Spectrum& spec, double T,
                                        const std::vector<std::complex<double>>& coeffs,
                                        double dt) {
  if (!(T > 0.0)) throw std::invalid_argument("ingham_sum_check: T must be positive");
  const int n = spec.size();
  if (static_cast<int>(coeffs.size()) != 2 * n)
    throw std::invalid_argument("ingham_sum_check: need 2N coefficients");
  std::vector<double> freqs(2 * n);
  for (int k = 0; k < n; ++k) {
    freqs[k] = -spec.pairs[n - 1 - k].freq; // n = -N..-1
    freqs[n + k] = spec.pairs[k].freq;      // n = 1..N
  }
  InghamSumResult res;
  for (const auto& b : coeffs) res.coeff_sum += std::norm(b);
  const TimeGrid tg = make_time_grid(T, dt);
  // advance each phasor by a per-step rotation; cheaper than exp per sample
  std::vector<std::complex<double>> phase(2 * n, {1.0, 0.0}), rot(2 * n);
  for (int j = 0; j < 2 * n; ++j)
    rot[j] = std::exp(std::complex<double>(0.0, -freqs[j] * tg.dt));
  for (int k = 0; k <= tg.steps; ++k) {
    std::complex<double> s{0.0, 0.0};
    for (int j = 0; j < 2 * n; ++j) s += coeffs[j] * phase[j];
    const double wk = (k == 0 || k == tg.steps) ? tg.dt / 2 : tg.dt;
    res.integral += wk * std::norm(s);
    for (int j = 0; j < 2 * n; ++j) phase[j] *= rot[j];
  }
  res.constant = res.coeff_sum / res.integral;
  return res;
}

} // namespace waveobs
