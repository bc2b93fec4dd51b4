#pragma once

#include <Eigen/Core>

namespace peaklab {

enum class SectionKind { interval, ball, polygon };

/// Cross-section of the peak: a bounded Lipschitz set in R^{d-1}.
///
/// Intervals are stored centered, (-l/2, l/2). Polygons are shifted so that
/// their centroid sits at the origin and are oriented counterclockwise. Balls
/// carry closed-form measures only and are never meshed.
class CrossSection {
 public:
  static CrossSection interval(double length);
  static CrossSection ball(double radius, int dim);
  static CrossSection polygon(Eigen::Matrix2Xd vertices);

  SectionKind kind() const { return kind_; }
  /// Dimension of the section itself (d - 1).
  int dim() const { return dim_; }
  /// H^{d-1}(omega).
  double area() const { return area_; }
  /// H^{d-2}(boundary); for an interval the counting measure 2.
  double perimeter() const { return perimeter_; }
  /// sup_{t in omega} |t|.
  double circumradius() const { return circumradius_; }

  double length() const { return length_; }
  double radius() const { return radius_; }
  const Eigen::Matrix2Xd& vertices() const { return vertices_; }

  /// Same section scaled by t > 0.
  CrossSection scaled(double t) const;

 private:
  CrossSection() = default;

  SectionKind kind_ = SectionKind::interval;
  int dim_ = 1;
  double area_ = 0.0;
  double perimeter_ = 0.0;
  double circumradius_ = 0.0;
  double length_ = 0.0;
  double radius_ = 0.0;
  Eigen::Matrix2Xd vertices_;
};

struct PeakGeometry {
  double q = 1.5;
  int d = 2;
  CrossSection cross_section = CrossSection::interval(1.0);
  double a = 1.0;
  double epsilon = 1.0;

  /// Throws unless 1 < q < 2, d >= 2, a > 0, epsilon > 0 and the section
  /// dimension equals d - 1.
  void validate() const;
};

struct Exponents {
  double p = 0.0;          ///< 2 / (2 - q)
  double remainder = 0.0;  ///< p - (q - 1)
};

struct TheoryConstants {
  double A_omega = 0.0;
  double H = 0.0;
  double p = 0.0;
  double remainder_exponent = 0.0;
};

/// Perimeter-to-area ratio H^{d-2}(d omega) / H^{d-1}(omega).
double ratio_A(const CrossSection& section);

/// H = (q^2 (d-1)^2 - 2 q (d-1)) / 4, always >= -1/4.
double hardy_constant(double q, int d);

/// nu = sqrt(H + 1/4) = |q(d-1) - 1| / 2; the Friedrichs solution behaves
/// like s^{1/2 + nu} at the origin.
double hardy_index(double q, int d);

Exponents exponents(double q);

TheoryConstants theory_constants(const PeakGeometry& geometry);

/// A_omega^p * lambda_j(L_1). Requires lambda_L1_j < 0.
double predicted_coefficient(const TheoryConstants& constants, double lambda_L1_j);

}  // namespace peaklab
