#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "peaklab/mesh2d.hpp"

namespace peaklab {

using SparseRow = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Generalized problem A x = lambda M x over the free (non-Dirichlet)
/// vertices of a mesh.
struct SymmetricPencil {
  SparseRow A;
  SparseRow M;
  std::vector<int> dof_of_vertex;  ///< -1 for eliminated vertices
  std::vector<int> vertex_of_dof;
  double alpha = 0.0;

  Eigen::Index dim() const { return A.rows(); }
  /// Scatters a dof vector to all vertices, zero on eliminated ones.
  Eigen::VectorXd expand(const Eigen::VectorXd& x) const;
};

/// P1 Robin pencil: exact stiffness and consistent mass per triangle, minus
/// alpha times the edge mass h/6 [[2,1],[1,2]] on Robin edges. Vertices
/// touching a Dirichlet edge are deleted. `threads` > 1 splits the element
/// loop into independent triplet lists.
SymmetricPencil assemble(const Mesh2D& mesh, double alpha, int threads = 1);

/// Edge mass on all vertices for edges carrying `tag`.
SparseRow boundary_mass(const Mesh2D& mesh, BoundaryTag tag);

/// x^T A x / x^T M x.
double rayleigh(const SymmetricPencil& pencil, const Eigen::VectorXd& x);

/// Attempts a sparse Cholesky factorization of M.
bool mass_positive_definite(const SymmetricPencil& pencil);

/// Relative asymmetry max|A - A^T| / max|A|.
double asymmetry(const SparseRow& A);

/// One "row col value" line per stored entry, 0-based.
void write_triplets(std::ostream& out, const SparseRow& A);

}  // namespace peaklab
