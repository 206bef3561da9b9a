#pragma once

#include <algorithm>
#include <functional>
#include <vector>

namespace waveobs {

using ScalarFn = std::function<double(double)>;

/// Composite Simpson rule with nsub subintervals (exact for cubics). The two
/// endpoint samples are nudged inward by a relative 1e-13 so that a piece cut
/// at a declared discontinuity sees its one-sided limits, not the arbitrary
/// value stored at the jump.
inline double simpson(const ScalarFn& f, double a, double b, int nsub = 32) {
  if (b <= a) return 0.0;
  const double dx = (b - a) / (2 * nsub);
  const double nudge = (b - a) * 1e-13;
  double s = f(a + nudge) + f(b - nudge);
  for (int i = 1; i < 2 * nsub; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * dx);
  return s * dx / 3.0;
}

/// Integral over (a,b) split at the given discontinuity points, composite
/// Simpson on each smooth piece. Piecewise-polynomial integrands (degree <= 3
/// between declared splits) are integrated exactly.
inline double integrate_split(const ScalarFn& f, double a, double b,
                              const std::vector<double>& splits, int nsub = 32) {
  double total = 0.0;
  double lo = a;
  for (double s : splits) {
    if (s <= a || s >= b) continue;
    total += simpson(f, lo, s, nsub);
    lo = s;
  }
  total += simpson(f, lo, b, nsub);
  return total;
}

} // namespace waveobs
