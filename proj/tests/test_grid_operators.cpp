#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "waveobs/operators.hpp"
#include "waveobs/presets.hpp"
#include "waveobs/rng.hpp"
#include "waveobs/tridiag.hpp"

using namespace waveobs;
using Catch::Approx;

namespace {

std::vector<double> random_vector(SplitMix64& rng, int n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.next_normal();
  return v;
}

} // namespace

TEST_CASE("build_grid basics") {
  const Grid g = build_grid(3);
  CHECK(g.h == Approx(0.25).epsilon(1e-15));
  CHECK(g.node(0) == 0.0);
  CHECK(g.node(1) == Approx(0.25));
  CHECK(g.node(2) == Approx(0.5));
  CHECK(g.node(3) == Approx(0.75));
  CHECK(g.node(4) == 1.0);
  CHECK(build_grid(9).h == Approx(0.1).epsilon(1e-15));
  CHECK(build_grid(999).h == Approx(1e-3).epsilon(1e-15));
  // h*(n+1) = 1 up to one rounding unit
  for (int n : {3, 9, 17, 100, 999})
    CHECK(std::abs(build_grid(n).h * (n + 1) - 1.0) <= 1e-16);
  CHECK_THROWS_AS(build_grid(0), std::invalid_argument);
}

TEST_CASE("assemble stencils") {
  const Grid g = build_grid(3);
  const double h = g.h;

  SECTION("zero potential") {
    const OperatorSet ops = assemble(g, presets::constant_potential(0.0));
    for (double d : ops.M.diag) CHECK(d == Approx(h / 2).epsilon(1e-15));
    for (double o : ops.M.off) CHECK(o == Approx(h / 4).epsilon(1e-15));
    for (double d : ops.K.diag) CHECK(d == Approx(2 / h).epsilon(1e-15));
    for (double o : ops.K.off) CHECK(o == Approx(-1 / h).epsilon(1e-15));
    for (double l : ops.L_diag) CHECK(l == 0.0);
    for (int i = 0; i < 3; ++i) CHECK(ops.S.diag[i] == ops.K.diag[i]);
  }
  SECTION("constant potential") {
    const OperatorSet ops = assemble(g, presets::constant_potential(1.0));
    for (double l : ops.L_diag) CHECK(l == Approx(0.25).epsilon(1e-15));
  }
  SECTION("smooth sine potential, evaluated at x1 = 0.25") {
    const OperatorSet ops = assemble(g, presets::smooth_sine_potential());
    // h * (1 + 0.5 sin(pi/2)) = 0.25 * 1.5
    CHECK(ops.L_diag[0] == Approx(0.375).epsilon(1e-14));
  }
  SECTION("negative potential rejected") {
    PotentialSpec bad{[](double) { return -0.5; }, PotentialSpec::Kind::SmoothFormula, 0.5, {}, "bad"};
    CHECK_THROWS_AS(assemble(g, bad), std::invalid_argument);
  }
}

TEST_CASE("discrete norms") {
  const OperatorSet ops = assemble(build_grid(3), presets::constant_potential(0.0));
  const std::vector<double> zero(3, 0.0);
  CHECK(m_norm(ops, zero) == 0.0);
  CHECK(one_norm(ops, zero) == 0.0);
  CHECK(energy_norm_1M(ops, zero, zero) == 0.0);

  const std::vector<double> e1{1.0, 0.0, 0.0};
  CHECK(m_norm(ops, e1) == Approx(std::sqrt(0.125)).epsilon(1e-14));
  CHECK(one_norm(ops, e1) == Approx(std::sqrt(8.0)).epsilon(1e-14));

  CHECK_THROWS_AS(m_norm(ops, std::vector<double>(2, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(one_norm(ops, std::vector<double>(4, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(energy_norm_1M(ops, e1, std::vector<double>(2, 1.0)), std::invalid_argument);
}

TEST_CASE("symmetry and positivity of the inner products") {
  SplitMix64 rng(42);
  for (int n : {5, 17, 64}) {
    const OperatorSet ops = assemble(build_grid(n), presets::smooth_sine_potential());
    for (int rep = 0; rep < 20; ++rep) {
      const auto u = random_vector(rng, n);
      const auto w = random_vector(rng, n);
      const double muw = m_inner(ops, u, w);
      const double mwu = m_inner(ops, w, u);
      CHECK(muw == Approx(mwu).epsilon(1e-13).margin(1e-13));
      const double suw = one_inner(ops, u, w);
      const double swu = one_inner(ops, w, u);
      CHECK(suw == Approx(swu).epsilon(1e-13).margin(1e-13));
      CHECK(m_norm(ops, u) > 0.0);
      CHECK(one_norm(ops, u) > 0.0);
    }
    for (int j = 0; j < n; ++j) {
      std::vector<double> e(n, 0.0);
      e[j] = 1.0;
      CHECK(m_norm(ops, e) > 0.0);
      CHECK(one_norm(ops, e) > 0.0);
    }
  }
}

TEST_CASE("discrete Poincare inequality") {
  SplitMix64 rng(7);
  for (int n : {9, 19, 39, 79}) {
    const OperatorSet ops = assemble(build_grid(n), presets::constant_potential(0.0));
    const double h = ops.h();
    const double c = 4.0 / h * std::pow(std::sin(std::numbers::pi * h / 2), 2);
    for (int rep = 0; rep < 100; ++rep) {
      const auto w = random_vector(rng, n);
      double ww = 0.0;
      for (double x : w) ww += x * x;
      CHECK(ops.K.quadform(w) >= c * ww * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("mass matrix smallest eigenvalue") {
  // lambda_min(M) = h cos^2(n pi h / 2), eigenvector sin(n pi j h)
  for (int n : {3, 9, 33}) {
    const OperatorSet ops = assemble(build_grid(n), presets::constant_potential(0.0));
    const double h = ops.h();
    const double lmin = h * std::pow(std::cos(n * std::numbers::pi * h / 2), 2);
    CHECK(lmin > 0.0);
    std::vector<double> v(n);
    for (int j = 1; j <= n; ++j) v[j - 1] = std::sin(n * std::numbers::pi * j * h);
    double vv = 0.0;
    for (double x : v) vv += x * x;
    CHECK(ops.M.quadform(v) == Approx(lmin * vv).epsilon(1e-12));
  }
}

TEST_CASE("tridiag_solve") {
  SECTION("identity stencil") {
    SymTriDiag eye(std::vector<double>(5, 1.0), std::vector<double>(4, 0.0));
    const std::vector<double> rhs{3.0, -1.0, 0.5, 2.0, -7.0};
    CHECK_THAT(tridiag_solve(eye, rhs), Catch::Matchers::Approx(rhs).epsilon(1e-15));
  }
  SECTION("forward-multiply oracle on M") {
    const OperatorSet ops = assemble(build_grid(3), presets::constant_potential(0.0));
    const std::vector<double> ones(3, 1.0);
    const auto rhs = ops.M.apply(ones);
    CHECK(rhs[0] == Approx(0.1875).epsilon(1e-15));
    CHECK(rhs[1] == Approx(0.25).epsilon(1e-15));
    CHECK(rhs[2] == Approx(0.1875).epsilon(1e-15));
    CHECK_THAT(tridiag_solve(ops.M, rhs), Catch::Matchers::Approx(ones).epsilon(1e-13));
  }
  SECTION("zero right-hand side") {
    const OperatorSet ops = assemble(build_grid(7), presets::smooth_sine_potential());
    for (double x : tridiag_solve(ops.S, std::vector<double>(7, 0.0))) CHECK(x == 0.0);
  }
  SECTION("solve then multiply is identity on random SPD systems") {
    SplitMix64 rng(11);
    for (int rep = 0; rep < 25; ++rep) {
      const int n = 2 + static_cast<int>(rng.next_u64() % 40);
      std::vector<double> off(n - 1), diag(n);
      for (double& o : off) o = rng.next_normal();
      for (int i = 0; i < n; ++i) {
        diag[i] = 0.1 + std::abs(rng.next_normal());
        if (i > 0) diag[i] += std::abs(off[i - 1]);
        if (i + 1 < n) diag[i] += std::abs(off[i]);
      }
      const SymTriDiag t(diag, off);
      const auto x = random_vector(rng, n);
      const auto sol = tridiag_solve(t, t.apply(x));
      double err = 0.0, nrm = 0.0;
      for (int i = 0; i < n; ++i) {
        err += (sol[i] - x[i]) * (sol[i] - x[i]);
        nrm += x[i] * x[i];
      }
      CHECK(std::sqrt(err) <= 1e-12 * std::sqrt(nrm));
    }
  }
  SECTION("indefinite matrix rejected") {
    SymTriDiag t(std::vector<double>{1.0, -2.0, 1.0}, std::vector<double>{0.0, 0.0});
    CHECK_THROWS_AS(TriDiagFactor(t), numerical_error);
  }
  SECTION("length mismatch rejected") {
    const OperatorSet ops = assemble(build_grid(4), presets::constant_potential(0.0));
    CHECK_THROWS_AS(tridiag_solve(ops.M, std::vector<double>(3, 1.0)), std::invalid_argument);
  }
}
