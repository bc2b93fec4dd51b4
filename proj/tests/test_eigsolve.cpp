#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "doctest.h"
#include "peaklab/common.hpp"
#include "peaklab/eigsolve.hpp"
#include "peaklab/ldlt.hpp"

using namespace peaklab;
using doctest::Approx;

namespace {

Eigen::MatrixXd random_symmetric(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = g(rng);
  return a;
}

int dense_negative(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  return static_cast<int>((es.eigenvalues().array() < 0.0).count());
}

// Shuffled sparse symmetric matrix with a banded structure plus a few long links.
SparseRow random_sparse(int n, std::mt19937_64& rng, double shift) {
  std::normal_distribution<double> g;
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(perm[i], perm[i], g(rng) + shift);
    for (int k = 1; k <= 3 && i + k < n; ++k) {
      const double v = g(rng);
      t.emplace_back(perm[i], perm[i + k], v);
      t.emplace_back(perm[i + k], perm[i], v);
    }
  }
  SparseRow a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

SymmetricPencil square_pencil(int n, double alpha) { return assemble(build_rectangle_mesh(1.0, 1.0, n, n), alpha); }

}  // namespace

TEST_CASE("Bunch-Kaufman solves and counts inertia") {
  std::mt19937_64 rng(11);
  for (int n : {1, 2, 7, 50}) {
    const Eigen::MatrixXd a = random_symmetric(n, rng);
    const BunchKaufman<double> bk(a);
    CHECK(bk.inertia().negative == dense_negative(a));
    CHECK(bk.inertia().negative + bk.inertia().positive == n);
    const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(n, -1.0, 2.0);
    const Eigen::VectorXd x = bk.solve(b);
    CHECK((a * x - b).norm() <= 1e-10 * a.norm() * x.norm());
  }
  // needs a 2x2 pivot: zero diagonal
  Eigen::Matrix2d z;
  z << 0, 1, 1, 0;
  const BunchKaufman<double> bz(z);
  CHECK(bz.inertia().negative == 1);
  CHECK(bz.inertia().positive == 1);
  Eigen::MatrixXd singular = Eigen::MatrixXd::Zero(3, 3);
  singular(0, 0) = 1.0;
  CHECK_THROWS_AS(BunchKaufman<double>{singular}, ZeroPivotError);
}

TEST_CASE("Bunch-Kaufman in single precision") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXf a = random_symmetric(12, rng).cast<float>();
  const BunchKaufman<float> bk(a);
  CHECK(bk.inertia().negative == dense_negative(a.cast<double>()));
}

TEST_CASE("reverse Cuthill-McKee narrows shuffled bands") {
  std::mt19937_64 rng(2);
  const SparseRow a = random_sparse(300, rng, 0.0);
  std::vector<int> identity(300);
  for (int i = 0; i < 300; ++i) identity[i] = i;
  const std::vector<int> perm = reverse_cuthill_mckee(a);
  std::vector<int> sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == identity);
  CHECK(bandwidth(a, perm) < bandwidth(a, identity) / 5);
}

TEST_CASE("sparse LDLT inertia and solve") {
  std::mt19937_64 rng(7);
  for (double shift : {-1.0, 0.0, 2.0}) {
    const SparseRow a = random_sparse(200, rng, shift);
    const SparseLDLT f(a);
    const Eigen::MatrixXd dense(a);
    CHECK(f.inertia().negative == dense_negative(dense));
    const Eigen::VectorXd b = Eigen::VectorXd::Ones(200);
    const Eigen::VectorXd x = f.solve(b);
    const Eigen::SparseMatrix<double> col = a;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(col);
    const Eigen::VectorXd y = lu.solve(b);
    CHECK((x - y).norm() <= 1e-8 * y.norm());
  }
}

TEST_CASE("Lanczos agrees with the dense solver on n = 200") {
  const SymmetricPencil p = assemble(build_rectangle_mesh(2.0, 1.0, 19, 9), 1.0);
  REQUIRE(p.dim() == 200);
  EigOptions eo;
  eo.k = 6;
  eo.method = EigMethod::lanczos;
  const Spectrum lz = smallest_eigs(p, eo);
  const Spectrum de = dense_eigs(p, 6);
  for (int i = 0; i < 6; ++i) {
    CHECK(std::abs(lz.values[i] - de.values[i]) <= 1e-8 * std::abs(de.values[i]));
    CHECK(lz.residuals[i] <= eo.tol);
    CHECK(rayleigh(p, lz.vectors.col(i)) == Approx(lz.values[i]).epsilon(1e-10));
  }
  for (int i = 1; i < 6; ++i) CHECK(lz.values[i] >= lz.values[i - 1]);
  CHECK(lz.info.inertia_below == 6);
  CHECK(inertia_count(p, lz.info.certificate_shift) == 6);
  CHECK(de.info.inertia_below == 6);
}

TEST_CASE("Neumann square") {
  const SymmetricPencil p = square_pencil(32, 0.0);
  EigOptions eo;
  eo.k = 4;
  eo.method = EigMethod::lanczos;
  const Spectrum s = smallest_eigs(p, eo);
  CHECK(std::abs(s.values[0]) <= 1e-9);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  // double eigenvalue pi^2 is recovered with its multiplicity
  CHECK(s.values[1] == Approx(pi2).epsilon(5e-3));
  CHECK(s.values[2] == Approx(pi2).epsilon(5e-3));
  CHECK(s.values[3] == Approx(2.0 * pi2).epsilon(1e-2));
  CHECK(std::abs(s.values[1] - s.values[2]) <= 1e-8 * pi2);
  const double e16 = smallest_eigs(square_pencil(16, 0.0), eo).values[1] - pi2;
  CHECK(std::abs(s.values[1] - pi2) < std::abs(e16));
}

TEST_CASE("inertia count extremes and consistency") {
  const SymmetricPencil p = square_pencil(8, 2.0);
  const Spectrum all = dense_eigs(p, static_cast<int>(p.dim()), false);
  CHECK(inertia_count(p, all.values[0] - 1.0) == 0);
  CHECK(inertia_count(p, all.values[p.dim() - 1] + 1.0) == p.dim());
  for (int k = 1; k < 10; ++k) CHECK(inertia_count(p, 0.5 * (all.values[k - 1] + all.values[k])) == k);
}

TEST_CASE("zero pivot at an exact eigenvalue") {
  SymmetricPencil p;
  p.A.resize(3, 3);
  p.M.resize(3, 3);
  std::vector<Eigen::Triplet<double>> a = {{0, 0, 1.0}, {1, 1, 2.0}, {2, 2, 3.0}}, m = {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}};
  p.A.setFromTriplets(a.begin(), a.end());
  p.M.setFromTriplets(m.begin(), m.end());
  CHECK_THROWS_AS(inertia_count(p, 2.0), ZeroPivotError);
  CHECK(inertia_count(p, 2.5) == 2);
}

TEST_CASE("deterministic with a fixed seed") {
  const SymmetricPencil p = square_pencil(30, 3.0);
  EigOptions eo;
  eo.k = 3;
  eo.method = EigMethod::lanczos;
  const Spectrum a = smallest_eigs(p, eo), b = smallest_eigs(p, eo);
  for (int i = 0; i < 3; ++i) CHECK(a.values[i] == b.values[i]);
  eo.shift = a.values[0] - 5.0;
  const Spectrum c = smallest_eigs(p, eo);
  for (int i = 0; i < 3; ++i) CHECK(c.values[i] == Approx(a.values[i]).epsilon(1e-10));
}

TEST_CASE("relative residual definition") {
  const SymmetricPencil p = square_pencil(6, 1.0);
  const Spectrum s = dense_eigs(p, 1);
  CHECK(relative_residual(p, s.values[0], s.vectors.col(0)) <= 1e-13);
  CHECK(relative_residual(p, s.values[0] + 1.0, s.vectors.col(0)) > 1e-3);
  EigOptions bad;
  bad.k = 0;
  CHECK_THROWS_AS(smallest_eigs(p, bad), Error);
}
