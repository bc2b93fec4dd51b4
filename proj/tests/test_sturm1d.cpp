#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "peaklab/common.hpp"
#include "peaklab/geometry.hpp"
#include "peaklab/sturm1d.hpp"

using namespace peaklab;
using doctest::Approx;

namespace {

// Number of zeros in (0, a) of the Frobenius solution of
// -f'' + (H/s^2 - mu/s^q) f = lambda f, integrated by RK4 in x = log s.
// By Sturm oscillation this counts the Dirichlet eigenvalues below lambda.
int shooting_zeros(double q, int d, double mu, double a, double lambda) {
  const double H = hardy_constant(q, d);
  const double r = 0.5 + hardy_index(q, d);
  const double beta = 2.0 - q;
  const double c = -mu / (beta * (2.0 * r + beta - 1.0));
  const double s0 = 1e-9;
  const double x0 = std::log(s0), x1 = std::log(a);
  const int steps = 40000;
  const double h = (x1 - x0) / steps;
  // g(x) = f(e^x) / s0^r; g' = dg/dx
  double g = 1.0 + c * std::pow(s0, beta);
  double gp = r + c * (r + beta) * std::pow(s0, beta);
  auto acc = [&](double x, double gv, double gpv) {
    const double s = std::exp(x);
    return gpv + (H - mu * std::pow(s, beta) - lambda * s * s) * gv;
  };
  int zeros = 0;
  double x = x0;
  for (int i = 0; i < steps; ++i) {
    const double k1 = gp, l1 = acc(x, g, gp);
    const double k2 = gp + 0.5 * h * l1, l2 = acc(x + 0.5 * h, g + 0.5 * h * k1, gp + 0.5 * h * l1);
    const double k3 = gp + 0.5 * h * l2, l3 = acc(x + 0.5 * h, g + 0.5 * h * k2, gp + 0.5 * h * l2);
    const double k4 = gp + h * l3, l4 = acc(x + h, g + h * k3, gp + h * l3);
    const double gn = g + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    gp += h / 6.0 * (l1 + 2 * l2 + 2 * l3 + l4);
    if ((gn < 0.0) != (g < 0.0) && i + 1 < steps) ++zeros;
    g = gn;
    x += h;
  }
  return zeros;
}

double shooting_eigenvalue(int j, double q, int d, double mu, double a, double lo, double hi) {
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (shooting_zeros(q, d, mu, a, mid) >= j ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

double gauss_integral(double s0, double s1, const auto& f, int panels) {
  static const double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
  static const double w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                              0.2369268850561891};
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = s0 + (s1 - s0) * p / panels, b = s0 + (s1 - s0) * (p + 1) / panels;
    for (int i = 0; i < 5; ++i) sum += 0.5 * (b - a) * w[i] * f(0.5 * (a + b) + 0.5 * (b - a) * x[i]);
  }
  return sum;
}

}  // namespace

TEST_CASE("build_grid examples") {
  const Grid1D g1 = build_grid(1.0, 2, 1.0);
  CHECK(g1.nodes[0] == 0.0);
  CHECK(g1.nodes[1] == 0.5);
  CHECK(g1.nodes[2] == 1.0);
  const Grid1D g2 = build_grid(1.0, 2, 2.0);
  CHECK(g2.nodes[1] == 0.25);
  const Grid1D g3 = build_grid(4.0, 4, 1.0);
  for (int i = 0; i < 4; ++i) CHECK(g3.nodes[i + 1] - g3.nodes[i] == Approx(1.0));
  CHECK_THROWS_AS(build_grid(1.0, 1, 1.0), Error);
  CHECK_THROWS_AS(build_grid(1.0, 4, 0.5), Error);
}

TEST_CASE("assembly examples") {
  EffectiveOperatorSpec spec;
  spec.q = 1.5;
  spec.mu = 0.0;
  spec.H = 0.0;
  spec.a = 1.0;
  const TridiagonalPencil p = assemble_effective(spec, build_grid(1.0, 2, 1.0));
  REQUIRE(p.dim() == 1);
  CHECK(p.diag[0] == Approx(4.0));
  CHECK(p.mass[0] == Approx(0.5));

  const Grid1D grid = build_grid(1.0, 20, 2.0);
  const TridiagonalPencil base = assemble_effective(spec, grid);
  EffectiveOperatorSpec withH = spec;
  withH.H = 0.3;
  EffectiveOperatorSpec withMu = spec;
  withMu.mu = 1.0;
  const TridiagonalPencil ph = assemble_effective(withH, grid), pm = assemble_effective(withMu, grid);
  for (int i = 0; i < base.dim(); ++i) {
    CHECK(ph.diag[i] > base.diag[i]);
    CHECK(pm.diag[i] < base.diag[i]);
  }
  EffectiveOperatorSpec bad = spec;
  bad.q = 1.0;
  CHECK_THROWS_AS(assemble_effective(bad, grid), Error);
}

TEST_CASE("hat moments against quadrature") {
  for (double beta : {2.0, 1.5, 1.2}) {
    const double s0 = 0.3, s1 = 0.7, h = s1 - s0;
    const HatMoments m = hat_moments(s0, s1, beta);
    auto L = [&](double s) { return (s1 - s) / h; };
    auto R = [&](double s) { return (s - s0) / h; };
    CHECK(m.ll == Approx(gauss_integral(s0, s1, [&](double s) { return L(s) * L(s) * std::pow(s, -beta); }, 20)).epsilon(1e-12));
    CHECK(m.lr == Approx(gauss_integral(s0, s1, [&](double s) { return L(s) * R(s) * std::pow(s, -beta); }, 20)).epsilon(1e-12));
    CHECK(m.rr == Approx(gauss_integral(s0, s1, [&](double s) { return R(s) * R(s) * std::pow(s, -beta); }, 20)).epsilon(1e-12));
  }
  // first element: (s/s1)^2 s^-beta integrates to s1^{1-beta}/(3-beta)
  for (double beta : {2.0, 1.5}) CHECK(hat_moments(0.0, 0.4, beta).rr == Approx(std::pow(0.4, 1.0 - beta) / (3.0 - beta)));
}

TEST_CASE("discrete Dirichlet Laplacian") {
  EffectiveOperatorSpec spec;
  spec.mu = 0.0;
  spec.H = 0.0;
  const TridiagonalPencil p = assemble_effective(spec, build_grid(1.0, 100, 1.0));
  const Spectrum s = eigs_tridiagonal(p, 5);
  const double h = 0.01;
  for (int k = 1; k <= 5; ++k) {
    const double exact = 4.0 * std::pow(std::sin(k * std::numbers::pi * h / 2.0), 2) / (h * h);
    CHECK(s.values[k - 1] == Approx(exact).epsilon(1e-11));
  }
  CHECK(s.values[0] == Approx(9.8688).epsilon(1e-4));
  CHECK(negative_count(p, 0.0) == 0);
  CHECK_THROWS_AS(eigs_tridiagonal(p, 100), Error);
}

TEST_CASE("spectrum ordering and count consistency") {
  const EffectiveOperatorSpec spec = EffectiveOperatorSpec::make(1.5, 2, 1.0, 40.0);
  const TridiagonalPencil p = assemble_effective(spec, build_grid(40.0, 4000, default_grading(1.5, 2)));
  const Spectrum s = eigs_tridiagonal(p, 4);
  for (int i = 1; i < 4; ++i) CHECK(s.values[i] > s.values[i - 1]);
  for (int k = 1; k < 4; ++k) CHECK(negative_count(p, 0.5 * (s.values[k - 1] + s.values[k])) == k);
  for (int k = 0; k < 4; ++k) CHECK(s.error_bounds[k] <= std::max(1e-12 * std::abs(s.values[k]), 1e-14) * 1.0001);
}

TEST_CASE("Hardy positivity of the discrete form") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (auto [q, d] : {std::pair{1.2, 2}, std::pair{1.5, 2}, std::pair{1.5, 3}, std::pair{1.9, 2}})
    for (int N : {100, 1000}) {
      const TridiagonalPencil p =
          assemble_effective(EffectiveOperatorSpec::make(q, d, 0.0, 1.0), build_grid(1.0, N, default_grading(q, d)));
      CHECK(eigs_tridiagonal(p, 1).values[0] >= -1e-10);
      for (int t = 0; t < 5; ++t) {
        Eigen::VectorXd x(p.dim());
        for (int i = 0; i < x.size(); ++i) x[i] = g(rng);
        CHECK(p.form(x) >= 0.0);
      }
    }
}

TEST_CASE("truncated eigenvalues agree with a shooting oracle") {
  const double q = 1.5, a = 12.0;
  const TridiagonalPencil p =
      assemble_effective(EffectiveOperatorSpec::make(q, 2, 1.0, a), build_grid(a, 16000, default_grading(q, 2)));
  const Spectrum s = eigs_tridiagonal(p, 2);
  const double l1 = shooting_eigenvalue(1, q, 2, 1.0, a, -5.0, 0.0);
  const double l2 = shooting_eigenvalue(2, q, 2, 1.0, a, l1 + 1e-6, 1.0);
  CHECK(s.values[0] == Approx(l1).epsilon(1e-5));
  CHECK(s.values[1] == Approx(l2).epsilon(1e-4));

  const double q2 = 1.2;
  const TridiagonalPencil p2 =
      assemble_effective(EffectiveOperatorSpec::make(q2, 2, 1.0, a), build_grid(a, 16000, default_grading(q2, 2)));
  CHECK(eigs_tridiagonal(p2, 1).values[0] == Approx(shooting_eigenvalue(1, q2, 2, 1.0, a, -5.0, 0.0)).epsilon(1e-5));
}

TEST_CASE("lambda_L1 ladder") {
  const LambdaL1Result r1 = lambda_L1(1, 1.5, 2, 1e-4);
  CHECK(r1.converged);
  CHECK(r1.value < 0.0);
  REQUIRE(r1.ladder.size() >= 2);
  const double last = r1.ladder.back().lambda, prev = r1.ladder[r1.ladder.size() - 2].lambda;
  CHECK(std::abs(last - prev) <= 1e-3 * std::abs(last));
  // oracle: shooting on the largest truncation of the ladder
  CHECK(r1.value == Approx(shooting_eigenvalue(1, 1.5, 2, 1.0, r1.ladder.back().a, -5.0, 0.0)).epsilon(2e-4));

  const LambdaL1Result r2 = lambda_L1(2, 1.5, 2, 1e-4);
  CHECK(r1.value < r2.value);
  CHECK(r2.value < 0.0);

  // nonincreasing in a at fixed resolution
  double before = 1e300;
  for (double a : {5.0, 10.0, 20.0, 40.0}) {
    const TridiagonalPencil p =
        assemble_effective(EffectiveOperatorSpec::make(1.5, 2, 1.0, a), build_grid(a, static_cast<int>(400 * a), 4.0));
    const double l = eigs_tridiagonal(p, 1).values[0];
    CHECK(l <= before + 1e-9 * std::abs(l));
    before = l;
  }
}

TEST_CASE("scaling identity on mapped grids") {
  const ScalingReport single = scaling_check(1, 1.5, 2, {1.0});
  CHECK(single.max_relative_spread == 0.0);
  const ScalingReport two = scaling_check(1, 1.5, 2, {1.0, 2.0});
  CHECK(two.raw[1] / two.raw[0] == Approx(16.0).epsilon(1e-10));
  for (int j = 1; j <= 3; ++j) CHECK(scaling_check(j, 1.5, 2, {1.0, 2.0, 4.0}).max_relative_spread <= 1e-10);
}

TEST_CASE("simplicity and accumulation at zero") {
  const double delta = 0.01;
  int prev_total = -1, prev_delta = -1;
  for (double a : {40.0, 160.0, 640.0}) {
    const TridiagonalPencil p =
        assemble_effective(EffectiveOperatorSpec::make(1.5, 2, 1.0, a), build_grid(a, static_cast<int>(400 * a), 4.0));
    const int n = negative_count(p, 0.0);
    const Spectrum s = eigs_tridiagonal(p, n);
    for (int i = 1; i < n; ++i) CHECK(s.values[i] - s.values[i - 1] > 1e-8 * std::abs(s.values[0]));
    const int nd = negative_count(p, -delta);
    if (prev_delta >= 0) {
      CHECK(nd == prev_delta);
      CHECK(n >= prev_total);
    }
    prev_total = n;
    prev_delta = nd;
  }
  CHECK(prev_total > prev_delta);
}
