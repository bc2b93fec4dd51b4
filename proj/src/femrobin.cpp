#include "peaklab/femrobin.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <thread>

#include <Eigen/SparseCholesky>

#include "peaklab/common.hpp"

namespace peaklab {

Eigen::VectorXd SymmetricPencil::expand(const Eigen::VectorXd& x) const {
  require(x.size() == dim(), "expand: dimension mismatch");
  Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dof_of_vertex.size()));
  for (size_t v = 0; v < dof_of_vertex.size(); ++v)
    if (dof_of_vertex[v] >= 0) full[static_cast<Eigen::Index>(v)] = x[dof_of_vertex[v]];
  return full;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void element_range(const Mesh2D& mesh, const std::vector<int>& dof, Eigen::Index begin,
                   Eigen::Index end, Triplets& a, Triplets& m) {
  for (Eigen::Index t = begin; t < end; ++t) {
    const Eigen::Vector3i tri = mesh.triangles.col(t);
    Eigen::Matrix<double, 2, 3> p;
    for (int k = 0; k < 3; ++k) p.col(k) = mesh.vertices.col(tri[k]);
    const double area = mesh.signed_area(t);
    require(area > 0.0, "assemble: triangle with non-positive area");
    // Rotated opposite edges give the hat gradients times 2|T|.
    Eigen::Matrix<double, 2, 3> g;
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector2d e = p.col((k + 2) % 3) - p.col((k + 1) % 3);
      g.col(k) << -e.y(), e.x();
    }
    const Eigen::Matrix3d K = g.transpose() * g / (4.0 * area);
    for (int i = 0; i < 3; ++i) {
      const int di = dof[static_cast<size_t>(tri[i])];
      if (di < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int dj = dof[static_cast<size_t>(tri[j])];
        if (dj < 0) continue;
        a.emplace_back(di, dj, K(i, j));
        m.emplace_back(di, dj, area * (i == j ? 2.0 : 1.0) / 12.0);
      }
    }
  }
}

}  // namespace

SymmetricPencil assemble(const Mesh2D& mesh, double alpha, int threads) {
  require(std::isfinite(alpha), "assemble: alpha must be finite");
  const auto nv = static_cast<size_t>(mesh.num_vertices());
  SymmetricPencil pencil;
  pencil.alpha = alpha;
  pencil.dof_of_vertex.assign(nv, 0);
  for (const BoundaryEdge& e : mesh.boundary)
    if (e.tag == BoundaryTag::dirichlet)
      pencil.dof_of_vertex[static_cast<size_t>(e.a)] = pencil.dof_of_vertex[static_cast<size_t>(e.b)] = -1;
  int n = 0;
  for (size_t v = 0; v < nv; ++v) {
    if (pencil.dof_of_vertex[v] < 0) continue;
    pencil.dof_of_vertex[v] = n++;
    pencil.vertex_of_dof.push_back(static_cast<int>(v));
  }
  require(n > 0, "assemble: mesh has no free vertex");

  const Eigen::Index nt = mesh.num_triangles();
  const int parts = static_cast<int>(std::clamp<Eigen::Index>(threads, 1, std::max<Eigen::Index>(1, nt / 256)));
  std::vector<Triplets> a(static_cast<size_t>(parts)), m(static_cast<size_t>(parts));
  if (parts == 1) {
    element_range(mesh, pencil.dof_of_vertex, 0, nt, a[0], m[0]);
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < parts; ++k)
      pool.emplace_back([&, k] {
        element_range(mesh, pencil.dof_of_vertex, nt * k / parts, nt * (k + 1) / parts,
                      a[static_cast<size_t>(k)], m[static_cast<size_t>(k)]);
      });
    for (std::thread& th : pool) th.join();
  }
  Triplets at, mt;
  for (int k = 0; k < parts; ++k) {
    at.insert(at.end(), a[static_cast<size_t>(k)].begin(), a[static_cast<size_t>(k)].end());
    mt.insert(mt.end(), m[static_cast<size_t>(k)].begin(), m[static_cast<size_t>(k)].end());
  }
  for (const BoundaryEdge& e : mesh.boundary) {
    if (e.tag != BoundaryTag::robin || alpha == 0.0) continue;
    const int da = pencil.dof_of_vertex[static_cast<size_t>(e.a)];
    const int db = pencil.dof_of_vertex[static_cast<size_t>(e.b)];
    const double h = (mesh.vertices.col(e.b) - mesh.vertices.col(e.a)).norm();
    const double diag = -alpha * h / 3.0, off = -alpha * h / 6.0;
    if (da >= 0) at.emplace_back(da, da, diag);
    if (db >= 0) at.emplace_back(db, db, diag);
    if (da >= 0 && db >= 0) {
      at.emplace_back(da, db, off);
      at.emplace_back(db, da, off);
    }
  }
  pencil.A.resize(n, n);
  pencil.M.resize(n, n);
  pencil.A.setFromTriplets(at.begin(), at.end());
  pencil.M.setFromTriplets(mt.begin(), mt.end());
  pencil.A.makeCompressed();
  pencil.M.makeCompressed();
  return pencil;
}

SparseRow boundary_mass(const Mesh2D& mesh, BoundaryTag tag) {
  Triplets t;
  for (const BoundaryEdge& e : mesh.boundary) {
    if (e.tag != tag) continue;
    const double h = (mesh.vertices.col(e.b) - mesh.vertices.col(e.a)).norm();
    t.emplace_back(e.a, e.a, h / 3.0);
    t.emplace_back(e.b, e.b, h / 3.0);
    t.emplace_back(e.a, e.b, h / 6.0);
    t.emplace_back(e.b, e.a, h / 6.0);
  }
  SparseRow B(mesh.num_vertices(), mesh.num_vertices());
  B.setFromTriplets(t.begin(), t.end());
  return B;
}

double rayleigh(const SymmetricPencil& pencil, const Eigen::VectorXd& x) {
  require(x.size() == pencil.dim(), "rayleigh: dimension mismatch");
  require(x.squaredNorm() > 0.0, "rayleigh: zero vector");
  return x.dot(pencil.A * x) / x.dot(pencil.M * x);
}

bool mass_positive_definite(const SymmetricPencil& pencil) {
  Eigen::SparseMatrix<double> M = pencil.M;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(M);
  return llt.info() == Eigen::Success;
}

double asymmetry(const SparseRow& A) {
  const SparseRow At = A.transpose();
  const SparseRow D = A - At;
  double dmax = 0.0, amax = 0.0;
  for (Eigen::Index k = 0; k < D.outerSize(); ++k)
    for (SparseRow::InnerIterator it(D, k); it; ++it) dmax = std::max(dmax, std::abs(it.value()));
  for (Eigen::Index k = 0; k < A.outerSize(); ++k)
    for (SparseRow::InnerIterator it(A, k); it; ++it) amax = std::max(amax, std::abs(it.value()));
  return amax > 0.0 ? dmax / amax : 0.0;
}

void write_triplets(std::ostream& out, const SparseRow& A) {
  out << std::setprecision(17);
  for (Eigen::Index k = 0; k < A.outerSize(); ++k)
    for (SparseRow::InnerIterator it(A, k); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace peaklab
