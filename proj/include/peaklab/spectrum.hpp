#pragma once

#include <limits>
#include <string>

#include <Eigen/Core>

namespace peaklab {

struct SolverInfo {
  std::string method;
  double shift = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  int restarts = 0;
  /// Inertia count at certificate_shift (eigenvalues strictly below it).
  int inertia_below = -1;
  double certificate_shift = std::numeric_limits<double>::quiet_NaN();
};

/// Eigenvalues in ascending order, multiplicities repeated.
///
/// `vectors` holds M-normalized eigenvectors column-wise when requested.
/// `residuals` are relative pencil residuals
/// ||A x - l M x|| / ((||A||_1 + |l| ||M||_1) ||x||); `error_bounds` holds
/// bisection bracket widths for the tridiagonal solver.
struct Spectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  Eigen::VectorXd residuals;
  Eigen::VectorXd error_bounds;
  SolverInfo info;

  Eigen::Index size() const { return values.size(); }
};

}  // namespace peaklab
