#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "waveobs/inverse.hpp"
#include "waveobs/operators.hpp"

// Benchmark potentials and sources used by the experiment harness: a smooth
// sine-modulated potential, a two-level step potential, a discontinuous
// truncated-parabola source and a smooth rational-weighted bump source.
namespace waveobs::presets {

inline PotentialSpec smooth_sine_potential() {
  return PotentialSpec{[](double x) { return 1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * x); },
                       PotentialSpec::Kind::SmoothFormula,
                       1.5,
                       {},
                       "smooth-sine"};
}

inline PotentialSpec step_potential() {
  return PotentialSpec{[](double x) { return x <= 0.5 ? 30.0 : 10.0; },
                       PotentialSpec::Kind::PiecewiseConstant,
                       30.0,
                       {0.5},
                       "discontinuous-step"};
}

inline PotentialSpec constant_potential(double c) {
  return PotentialSpec{[c](double) { return c; },
                       PotentialSpec::Kind::PiecewiseConstant,
                       c,
                       {},
                       c == 0.0 ? "zero" : "constant " + std::to_string(c)};
}

/// f(x) = 20 (x - 1/2)^2 on (1/4, 3/4), zero elsewhere; jumps at both cut
/// points.
inline SourceSpec discontinuous_source() {
  return SourceSpec{[](double x) {
                      return (x > 0.25 && x < 0.75) ? 20.0 * (x - 0.5) * (x - 0.5) : 0.0;
                    },
                    {0.25, 0.75},
                    "f-discontinuous"};
}

/// g(x) = x (1-x) [5 (x+0.1)^2 + 1/(x+0.1)], smooth on [0,1].
inline SourceSpec smooth_source() {
  return SourceSpec{[](double x) {
                      return x * (1.0 - x) * (5.0 * (x + 0.1) * (x + 0.1) + 1.0 / (x + 0.1));
                    },
                    {},
                    "g-smooth"};
}

inline ScalarFn unit_intensity() {
  return [](double) { return 1.0; };
}

} // namespace waveobs::presets
