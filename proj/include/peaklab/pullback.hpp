#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "peaklab/geometry.hpp"

namespace peaklab {

/// Polynomial u(s, t) in the cylinder variables, t in R^{d-1} (d = 2 or 3).
struct TrialPolynomial {
  struct Term {
    double coef = 0.0;
    int ps = 0;  ///< power of s
    int p1 = 0;  ///< power of t_1
    int p2 = 0;  ///< power of t_2 (d = 3 only)
  };
  int d = 2;
  std::vector<Term> terms;

  int degree() const;
  double value(double s, const Eigen::Vector2d& t) const;
  double ds(double s, const Eigen::Vector2d& t) const;
  /// (du/dt_1, du/dt_2); the second entry is 0 for d = 2.
  Eigen::Vector2d dt(double s, const Eigen::Vector2d& t) const;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

struct Sandwich {
  double lower = 0.0;
  double middle = 0.0;
  double upper = 0.0;
  double margin_lower = 0.0;  ///< (middle - lower) / |middle|
  double margin_upper = 0.0;  ///< (upper - middle) / |middle|
  double quadrature_error = 0.0;
  bool holds = false;   ///< both margins >= -budget
  bool strict = false;  ///< both margins > budget
};

struct PullbackResult {
  Sandwich boundary;  ///< lateral integral of |v|
  Sandwich gradient;  ///< Dirichlet integral of v
  int quadrature_points = 0;
};

/// Evaluates both change-of-variables sandwiches on V_{eps,I} for v = u o F^{-1}.
/// The middle terms use the exact surface element and the chain-rule
/// gradient; the bounds use the cylinder expressions with R_omega. The
/// section is an interval (d = 2) or a convex polygon (d = 3). Gauss rules
/// with n and 2n points are compared and n doubled until they agree to
/// `budget`; failure throws.
PullbackResult pullback_check(double q, double eps, double s0, double s1, const CrossSection& section,
                              const TrialPolynomial& trial, int n = 16, double budget = 1e-8);

/// Random polynomial of total degree <= degree, shifted to be positive on
/// [s0, s1] x section so that |u| stays smooth.
TrialPolynomial random_trial(int d, int degree, double s0, double s1, const CrossSection& section,
                             std::mt19937_64& rng);

/// Random convex polygon with `vertices` corners and unit area.
CrossSection random_convex_polygon(int vertices, std::mt19937_64& rng);

struct CampaignRecord {
  double q = 0.0;
  double eps = 0.0;
  PullbackResult result;
};

struct PullbackCampaign {
  int d = 2;
  int trials = 0;
  int held = 0;
  int strict = 0;
  double min_margin = 0.0;
  std::vector<CampaignRecord> records;
};

/// Cycles `trials` random polynomials over the (q, eps) grid on I = (s0, s1).
/// d = 2 uses the unit interval, d = 3 random convex polygons.
PullbackCampaign pullback_campaign(int d, int trials, std::uint64_t seed,
                                   const std::vector<double>& qs = {1.2, 1.5},
                                   const std::vector<double>& eps = {0.1, 0.5}, double s0 = 0.5,
                                   double s1 = 1.5, double budget = 1e-8);

}  // namespace peaklab
