#pragma once

#include <cstdint>
#include <limits>

#include "peaklab/femrobin.hpp"
#include "peaklab/spectrum.hpp"

namespace peaklab {

enum class EigMethod { automatic, lanczos, dense };

struct EigOptions {
  int k = 1;
  /// Shift below lambda_1; NaN picks one from inertia counts.
  double shift = std::numeric_limits<double>::quiet_NaN();
  /// Bound on the relative residual ||Ax - lMx|| / ((||A||_1 + |l| ||M||_1) ||x||).
  double tol = 1e-10;
  int max_restarts = 300;
  /// Krylov subspace dimension; 0 chooses max(2(k+1) + 10, 30).
  int krylov_dim = 0;
  std::uint64_t seed = 20240611;
  bool vectors = true;
  /// automatic uses the dense solver for n <= dense_limit.
  EigMethod method = EigMethod::automatic;
  int dense_limit = 500;
};

/// k smallest eigenpairs of A x = l M x. The Lanczos path runs shift-invert
/// with full reorthogonalization and thick restarts, computes k + 1 pairs,
/// and certifies the count by the inertia of A - s M at s = (l_k + l_{k+1})/2;
/// eigenvalues missed by the Krylov space (repeated ones) are recovered by
/// deflated reruns. Throws if M is not positive definite or the certificate
/// cannot be established.
Spectrum smallest_eigs(const SymmetricPencil& pencil, const EigOptions& options);

/// Number of eigenvalues strictly below sigma, from the negative pivots of
/// LDL^T(A - sigma M). Throws ZeroPivotError when sigma is an eigenvalue to
/// working precision.
int inertia_count(const SymmetricPencil& pencil, double sigma);

/// Dense generalized solve (Cholesky of M, tridiagonalization, QL).
Spectrum dense_eigs(const SymmetricPencil& pencil, int k, bool vectors = true);

/// Relative residual of one pair as in EigOptions::tol.
double relative_residual(const SymmetricPencil& pencil, double lambda, const Eigen::VectorXd& x);

}  // namespace peaklab
