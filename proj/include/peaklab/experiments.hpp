#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "peaklab/geometry.hpp"
#include "peaklab/mesh2d.hpp"
#include "peaklab/spectrum.hpp"

namespace peaklab {

/// n log-spaced values in [lo, hi].
std::vector<double> log_spaced(double lo, double hi, int n);

/// Worker count: PEAKLAB_THREADS if set, else the hardware concurrency.
int default_threads();

struct SweepOptions {
  double q = 1.5;
  double length = 1.0;
  double a = 1.0;
  std::vector<double> alphas = log_spaced(2.0, 16.0, 8);
  int J = 1;
  int ns = 1600;
  int nt = 4;
  double grading = 4.0;
  /// s_min = min(1e-3 a, smin_factor X) with X = (A_omega alpha)^{-1/(2-q)}.
  double smin_factor = 1e-5;
  BoundaryTag tip = BoundaryTag::neumann;
  bool check_smin = true;
  bool keep_vectors = true;
  double tol = 1e-10;
  long max_dofs = 200000;
  int threads = 1;
  std::uint64_t seed = 20240611;
};

struct SweepPoint {
  double alpha = 0.0;
  double s_min = 0.0;
  int ns = 0;
  int nt = 0;
  long dofs = 0;
  Eigen::VectorXd lambda;
  Eigen::VectorXd residuals;
  SolverInfo info;
  bool certified = false;
  /// lambda_1 with s_min halved, and |difference| / |lambda_1|.
  double lambda_half_smin = 0.0;
  double smin_sensitivity = 0.0;
  bool smin_flag = false;
  /// First eigenvector on all vertices, scaled to max |u| = 1 with a
  /// positive maximum; sign_flag is set when it takes values below -1e-8.
  Eigen::VectorXd u1;
  double u1_min = 0.0;
  bool sign_flag = false;
  Mesh2D mesh;
};

struct SweepResult {
  SweepOptions options;
  TheoryConstants constants;
  std::vector<SweepPoint> points;
  /// lambda_j nonincreasing in alpha for every j.
  bool monotone = true;

  std::vector<double> alphas() const;
  std::vector<double> lambdas(int j) const;
};

/// Solves the Robin problem on the finite model peak (Dirichlet far end) for
/// each alpha, with tip resolution tied to the localization scale.
SweepResult sweep_alpha(const SweepOptions& options);

struct AsymptoticFit {
  int j = 1;
  int window = 0;
  /// Least squares log(-lambda) = slope log(alpha) + log(coefficient).
  double slope = 0.0;
  double coefficient = 0.0;
  double rms_log_residual = 0.0;
  /// Coefficient with the exponent fixed at p_theory: geometric mean of
  /// -lambda / alpha^p over the window.
  double coefficient_fixed_exponent = 0.0;
  std::vector<double> local_slopes;
  /// One Richardson step on the last two local slopes, linear in
  /// alpha^{-(q-1)} (the relative order of the remainder).
  double extrapolated_slope = 0.0;
  double p_theory = 0.0;
  double c_theory = 0.0;  ///< A_omega^p |lambda_j(L_1)|, 0 if unknown
  double slope_rel_error = 0.0;
  double coefficient_rel_error = 0.0;
  double coefficient_fixed_rel_error = 0.0;
};

/// Fit over the trailing `window` points (window <= 0 means all).
/// `remainder_order` is q - 1.
AsymptoticFit fit_power_law(const std::vector<double>& alphas, const std::vector<double>& lambdas,
                            int window, double remainder_order, double p_theory = 0.0,
                            double c_theory = 0.0);

struct AgmonReport {
  double b = 0.0;
  std::vector<double> alphas;
  std::vector<double> ratios;
  /// Same ratio on the 4-way subdivided triangulation, and its difference.
  std::vector<double> ratios_refined;
  std::vector<double> refinement_change;
  bool growth_flag = false;
  double max_over_min = 1.0;
};

/// int e^{2 b alpha |x|} u^2 / int u^2 for a P1 function on a mesh, with the
/// weight taken at triangle centroids and u^2 integrated exactly.
double agmon_ratio(const Mesh2D& mesh, const Eigen::VectorXd& u, double alpha, double b,
                   bool subdivide = false);

/// Ratios for every sweep point (retained first eigenvectors required).
AgmonReport agmon_report(const SweepResult& sweep, double b);

struct WindowOptions {
  double q = 1.5;
  double length = 1.0;
  std::vector<double> eps = {0.2, 0.1, 0.05, 0.025};
  double s0 = 1.0;
  double s1 = 2.0;
  double b = 0.5;
  double B = 1.0;
  int ns = 64;
  int nt = 8;
};

struct WindowReport {
  std::vector<double> eps;
  std::vector<double> lambda1;
  std::vector<double> scaled;  ///< -eps lambda_1
  std::vector<int> certificates;
  double c = 0.0;
  double spread = 0.0;  ///< max / min of scaled
};

/// lambda_1 of the Neumann-ended window (s0, s1) of the peak with
/// cross-section eps * length, alpha = 1.
WindowReport neumann_window(const WindowOptions& options);

struct SectionCoefficient {
  std::string name;
  double area = 0.0;
  double A_omega = 0.0;
  double coefficient = 0.0;
};

struct CompareReport {
  std::vector<SectionCoefficient> sections;
  bool consistent = true;  ///< every ball's coefficient is the least negative
};

/// Predicted coefficients A_omega^{2/(2-q)} lambda_j(L_1) for sections of equal
/// area (to 1e-10).
CompareReport isoperimetric_compare(const std::vector<CrossSection>& sections, double q,
                                    double lambda_L1_j);

}  // namespace peaklab
