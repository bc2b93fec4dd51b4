#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "peaklab/common.hpp"
#include "peaklab/eigsolve.hpp"
#include "peaklab/femrobin.hpp"
#include "peaklab/xsection.hpp"

using namespace peaklab;
using doctest::Approx;

namespace {

Mesh2D neumann_peak(int ns = 40, int nt = 6) {
  PeakMeshOptions o;
  o.s_min = 0.05;
  o.ns = ns;
  o.nt = nt;
  o.tip = BoundaryTag::neumann;
  o.far = BoundaryTag::neumann;
  return build_peak_mesh(o);
}

double lambda1(const Mesh2D& m, double alpha) {
  EigOptions eo;
  eo.vectors = false;
  return smallest_eigs(assemble(m, alpha), eo).values[0];
}

double simpson(double a, double b, int n, const auto& f) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("pure Neumann identities") {
  const Mesh2D m = neumann_peak();
  const SymmetricPencil p = assemble(m, 0.0);
  REQUIRE(p.dim() == m.num_vertices());
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(p.dim());
  CHECK((p.A * one).norm() <= 1e-12);
  CHECK(one.dot(p.M * one) == Approx(m.area()).epsilon(1e-12));
  CHECK(asymmetry(p.A) <= 1e-14);
  CHECK(asymmetry(p.M) <= 1e-14);
  CHECK(mass_positive_definite(p));
}

TEST_CASE("Robin edge mass and the constant Rayleigh quotient") {
  const Mesh2D m = neumann_peak();
  const SparseRow B = boundary_mass(m, BoundaryTag::robin);
  CHECK(B.sum() == Approx(m.boundary_length(BoundaryTag::robin)).epsilon(1e-13));
  const double alpha = 1.7;
  const SymmetricPencil p = assemble(m, alpha);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(p.dim());
  CHECK(rayleigh(p, one) == Approx(-alpha * m.boundary_length(BoundaryTag::robin) / m.area()).epsilon(1e-12));
  CHECK_THROWS_AS(rayleigh(p, Eigen::VectorXd::Zero(p.dim())), Error);

  // lateral polyline length converges to the arc length
  const double q = 1.5, l = 1.0;
  const double arc = 2.0 * simpson(0.05, 1.0, 20000, [&](double s) {
    return std::sqrt(1.0 + std::pow(0.5 * q * l * std::pow(s, q - 1.0), 2));
  });
  double prev = 1.0;
  for (int ns : {10, 40, 160}) {
    const double err = std::abs(neumann_peak(ns, 2).boundary_length(BoundaryTag::robin) - arc) / arc;
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-4);
}

TEST_CASE("linear functions have exact energy") {
  const Mesh2D m = neumann_peak();
  const SymmetricPencil p = assemble(m, 0.0);
  Eigen::VectorXd x(p.dim()), y(p.dim());
  for (int d = 0; d < p.dim(); ++d) {
    x[d] = m.vertices(0, p.vertex_of_dof[d]);
    y[d] = m.vertices(1, p.vertex_of_dof[d]);
  }
  CHECK(x.dot(p.A * x) == Approx(m.area()).epsilon(1e-12));
  CHECK(y.dot(p.A * y) == Approx(m.area()).epsilon(1e-12));
  CHECK(x.dot(p.A * y) == Approx(0.0).scale(1.0));
}

TEST_CASE("Dirichlet elimination") {
  PeakMeshOptions o;
  o.ns = 10;
  o.nt = 4;
  const Mesh2D m = build_peak_mesh(o);
  const SymmetricPencil p = assemble(m, 1.0);
  CHECK(p.dim() == m.num_vertices() - (o.nt + 1));
  for (int v = 0; v < m.num_vertices(); ++v)
    if (std::abs(m.vertices(0, v) - o.a) < 1e-14) CHECK(p.dof_of_vertex[v] == -1);
  const Eigen::VectorXd full = p.expand(Eigen::VectorXd::Ones(p.dim()));
  CHECK(full.sum() == Approx(p.dim()));
}

TEST_CASE("square agrees with the separable oracle") {
  for (double alpha : {0.01, 1.0}) {
    const double oracle = robin_rectangle_eig1(1.0, 1.0, alpha);
    const double l64 = lambda1(build_rectangle_mesh(1.0, 1.0, 64, 64), alpha);
    CHECK(std::abs(l64 - oracle) <= 0.01 * std::abs(oracle));
    const double l16 = lambda1(build_rectangle_mesh(1.0, 1.0, 16, 16), alpha);
    const double l32 = lambda1(build_rectangle_mesh(1.0, 1.0, 32, 32), alpha);
    const double rate = std::log2(std::abs(l16 - oracle) / std::abs(l32 - oracle));
    CHECK(rate > 1.8);
  }
}

TEST_CASE("monotonicity in alpha and in the truncation length") {
  const Mesh2D m = neumann_peak();
  const double l1 = lambda1(m, 0.5), l2 = lambda1(m, 1.0), l3 = lambda1(m, 2.0);
  CHECK(l2 <= l1);
  CHECK(l3 <= l2);
  PeakMeshOptions o;
  o.s_min = 0.05;
  o.ns = 95;
  o.nt = 8;
  o.grading = 1.0;
  // h = 0.01 on both, so the short mesh is a submesh and the spaces are nested
  const double short_peak = lambda1(build_peak_mesh(o), 1.0);
  o.a = 1.5;
  o.ns = 145;
  CHECK(lambda1(build_peak_mesh(o), 1.0) < short_peak);
}

TEST_CASE("threaded assembly and triplet export") {
  const Mesh2D m = neumann_peak(80, 8);
  const SymmetricPencil a = assemble(m, 2.0, 1), b = assemble(m, 2.0, 3);
  CHECK((Eigen::MatrixXd(a.A) - Eigen::MatrixXd(b.A)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((Eigen::MatrixXd(a.M) - Eigen::MatrixXd(b.M)).cwiseAbs().maxCoeff() <= 1e-14);
  std::ostringstream out;
  write_triplets(out, a.A);
  int lines = 0;
  for (char c : out.str()) lines += c == '\n';
  CHECK(lines == a.A.nonZeros());
}

TEST_CASE("no free vertex is an error") {
  Mesh2D m = build_rectangle_mesh(1.0, 1.0, 1, 1);
  for (BoundaryEdge& e : m.boundary) e.tag = BoundaryTag::dirichlet;
  CHECK_THROWS_AS(assemble(m, 1.0), Error);
}
