#pragma once

#include <vector>

#include <Eigen/Core>

#include "peaklab/spectrum.hpp"
#include "peaklab/tridiagonal.hpp"

namespace peaklab {

/// Parameters of L_{mu,a} = -d^2/ds^2 + H/s^2 - mu/s^q on (0, a), Dirichlet
/// at both ends.
struct EffectiveOperatorSpec {
  double q = 1.5;
  int d = 2;
  double mu = 1.0;
  double a = 1.0;
  double H = 0.0;

  /// Fills H from (q, d).
  static EffectiveOperatorSpec make(double q, int d, double mu, double a);
};

/// Nodes s_i = a (i / N)^gamma, i = 0..N.
struct Grid1D {
  Eigen::VectorXd nodes;
  double gamma = 1.0;

  double a() const { return nodes[nodes.size() - 1]; }
  int elements() const { return static_cast<int>(nodes.size()) - 1; }
};

Grid1D build_grid(double a, int N, double gamma);

/// Grading that keeps the P1 eigenvalue error O(N^-2) despite the s^{1/2+nu}
/// behaviour at the origin: max(2, 1/nu).
double default_grading(double q, int d);

/// Stiffness + potential over interior nodes s_1..s_{N-1}, lumped mass.
struct TridiagonalPencil {
  Eigen::VectorXd diag;
  Eigen::VectorXd off;
  Eigen::VectorXd mass;
  EffectiveOperatorSpec spec;
  Grid1D grid;

  int dim() const { return static_cast<int>(diag.size()); }
  /// M^{-1/2} A M^{-1/2}.
  SymTridiagonal<double> standard() const;
  /// Quadratic form x^T A x.
  double form(const Eigen::VectorXd& x) const;
};

/// Exact integrals of s^{-beta} against the products of the two hat
/// functions on [s0, s1]: {left*left, left*right, right*right}. For s0 = 0
/// only `rr` is meaningful (the left node is the Dirichlet endpoint).
struct HatMoments {
  double ll = 0.0;
  double lr = 0.0;
  double rr = 0.0;
};
HatMoments hat_moments(double s0, double s1, double beta);

TridiagonalPencil assemble_effective(const EffectiveOperatorSpec& spec, const Grid1D& grid);

/// k smallest eigenvalues by Sturm bisection; error_bounds are bracket widths.
Spectrum eigs_tridiagonal(const TridiagonalPencil& pencil, int k);

/// Number of eigenvalues strictly below threshold.
int negative_count(const TridiagonalPencil& pencil, double threshold);

struct LadderStep {
  double a = 0.0;
  int N = 0;
  double lambda = 0.0;
};

struct LadderOptions {
  double a0 = 10.0;
  int n0 = 2000;
  /// <= 0 selects default_grading(q, d).
  double gamma = 0.0;
  int max_levels = 8;
  int max_nodes = 1 << 22;
};

struct LambdaL1Result {
  double value = 0.0;
  double bracket_width = 0.0;
  bool converged = false;
  std::vector<LadderStep> ladder;
};

/// lambda_j(L_1) from a truncation/refinement ladder. Stops when both
/// doubling a and doubling N change lambda_j by less than tol * |lambda_j|.
/// Throws if lambda_j(L_{1,a}) increases with a beyond that tolerance.
LambdaL1Result lambda_L1(int j, double q, int d, double tol, const LadderOptions& options = {});

struct ScalingOptions {
  double a = 40.0;
  int N = 4000;
  double gamma = 0.0;
};

struct ScalingReport {
  std::vector<double> mu;
  std::vector<double> raw;       ///< lambda_j(L_{mu, a c})
  std::vector<double> rescaled;  ///< raw / mu^{2/(2-q)}
  double max_relative_spread = 0.0;
};

/// Checks lambda_j(L_mu) = mu^{2/(2-q)} lambda_j(L_1) on grids mapped by
/// s -> c s with c = mu^{-1/(2-q)}.
ScalingReport scaling_check(int j, double q, int d, const std::vector<double>& mu_list,
                            const ScalingOptions& options = {});

}  // namespace peaklab
