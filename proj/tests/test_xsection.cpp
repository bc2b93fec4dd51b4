#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "peaklab/common.hpp"
#include "peaklab/xsection.hpp"

using namespace peaklab;
using doctest::Approx;

namespace {

// P1 Robin eigenvalues on (-l/2, l/2) with n elements, Richardson-extrapolated
// from n and 2n.
Eigen::VectorXd fem_interval(double l, double alpha, int n, int k) {
  auto solve = [&](int m) {
    const double h = l / m;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m + 1, m + 1), M = A;
    for (int e = 0; e < m; ++e) {
      A.block<2, 2>(e, e) += (Eigen::Matrix2d() << 1, -1, -1, 1).finished() / h;
      M.block<2, 2>(e, e) += (Eigen::Matrix2d() << 2, 1, 1, 2).finished() * h / 6.0;
    }
    A(0, 0) -= alpha;
    A(m, m) -= alpha;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, M, Eigen::EigenvaluesOnly);
    return Eigen::VectorXd(es.eigenvalues().head(k));
  };
  return (4.0 * solve(2 * n) - solve(n)) / 3.0;
}

}  // namespace

TEST_CASE("negative branches solve their secular equations") {
  for (double alpha : {0.5, 1.0, 2.0, 5.0, 10.0}) {
    const Spectrum s = robin_interval_eigs({1.0, alpha}, 2);
    const double k = std::sqrt(-s.values[0]);
    CHECK(k * std::tanh(k / 2.0) == Approx(alpha).epsilon(1e-12));
    CHECK(s.values[0] <= -alpha * alpha);
    if (alpha > 2.0) {
      const double k2 = std::sqrt(-s.values[1]);
      CHECK(k2 / std::tanh(k2 / 2.0) == Approx(alpha).epsilon(1e-12));
    } else {
      CHECK(s.values[1] >= 0.0);
    }
  }
}

TEST_CASE("interval eigenvalues against finite elements") {
  for (double alpha : {0.1, 1.0, 3.0, 10.0}) {
    const Spectrum s = robin_interval_eigs({1.0, alpha}, 5);
    const Eigen::VectorXd f = fem_interval(1.0, alpha, 800, 5);
    for (int i = 0; i < 5; ++i) CHECK(s.values[i] == Approx(f[i]).epsilon(1e-6).scale(1.0));
    for (int i = 1; i < 5; ++i) CHECK(s.values[i] > s.values[i - 1]);
  }
}

TEST_CASE("examples and limits") {
  CHECK(robin_interval_eigs({1.0, 10.0}, 1).values[0] == Approx(-100.018145).epsilon(1e-8));
  const Spectrum neu = robin_interval_eigs({2.0, 0.0}, 4);
  for (int n = 0; n < 4; ++n) CHECK(neu.values[n] == Approx(std::pow(std::numbers::pi * n / 2.0, 2)).scale(1.0));
  // small-alpha law
  for (double alpha : {1e-1, 1e-2, 1e-3}) {
    const double l = robin_interval_eigs({1.0, alpha}, 1).values[0];
    CHECK(std::abs(l + 2.0 * alpha) <= 3.0 * alpha * alpha);
  }
  // Neumann limit of the second eigenvalue
  CHECK(robin_interval_eigs({1.0, 1e-6}, 2).values[1] == Approx(std::numbers::pi * std::numbers::pi).epsilon(1e-5));
}

TEST_CASE("scaling identity for intervals") {
  for (double t : {0.5, 2.0, 3.0})
    for (double alpha : {0.3, 4.0}) {
      const double lhs = robin_interval_eigs({t * 1.0, alpha}, 1).values[0];
      const double rhs = robin_interval_eigs({1.0, t * alpha}, 1).values[0] / (t * t);
      CHECK(lhs == Approx(rhs).epsilon(1e-11));
    }
}

TEST_CASE("rectangle by separation") {
  const double r = robin_rectangle_eig1(2.0, 0.5, 0.7);
  CHECK(r == Approx(robin_interval_eigs({2.0, 0.7}, 1).values[0] + robin_interval_eigs({0.5, 0.7}, 1).values[0]));
  const double a = 1e-4;
  CHECK(robin_rectangle_eig1(2.0, 0.5, a) / a == Approx(-(2.0 / 2.0 + 2.0 / 0.5)).epsilon(1e-3));
}

TEST_CASE("branch range errors") {
  const RobinIntervalProblem p{1.0, 1.0};
  const int kmax = robin_interval_max_modes(p);
  CHECK(kmax >= 5);
  CHECK_THROWS_AS(robin_interval_eigs(p, kmax + 1), Error);
  CHECK_THROWS_AS(robin_interval_eigs(p, 0), Error);
}
