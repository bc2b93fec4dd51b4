#include "peaklab/geometry.hpp"

#include <cmath>
#include <numbers>

#include "peaklab/common.hpp"

namespace peaklab {
namespace {

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

bool segments_intersect(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2,
                        const Eigen::Vector2d& q1, const Eigen::Vector2d& q2) {
  const double d1 = cross2(q2 - q1, p1 - q1);
  const double d2 = cross2(q2 - q1, p2 - q1);
  const double d3 = cross2(p2 - p1, q1 - p1);
  const double d4 = cross2(p2 - p1, q2 - p1);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 &&
         d3 != 0 && d4 != 0;
}

// Volume of the unit ball in R^m.
double unit_ball_volume(int m) {
  return std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m + 1.0);
}

}  // namespace

CrossSection CrossSection::interval(double length) {
  require(length > 0.0 && std::isfinite(length), "interval length must be positive");
  CrossSection c;
  c.kind_ = SectionKind::interval;
  c.dim_ = 1;
  c.length_ = length;
  c.area_ = length;
  c.perimeter_ = 2.0;
  c.circumradius_ = 0.5 * length;
  return c;
}

CrossSection CrossSection::ball(double radius, int dim) {
  require(radius > 0.0 && std::isfinite(radius), "ball radius must be positive");
  require(dim >= 1, "ball dimension must be at least 1");
  CrossSection c;
  c.kind_ = SectionKind::ball;
  c.dim_ = dim;
  c.radius_ = radius;
  const double vol = unit_ball_volume(dim);
  c.area_ = vol * std::pow(radius, dim);
  // |S^{m-1}| = m |B^m|; for m = 1 this is the counting measure 2.
  c.perimeter_ = dim * vol * std::pow(radius, dim - 1);
  c.circumradius_ = radius;
  return c;
}

CrossSection CrossSection::polygon(Eigen::Matrix2Xd vertices) {
  const Eigen::Index n = vertices.cols();
  require(n >= 3, "polygon needs at least 3 vertices");
  require(vertices.allFinite(), "polygon vertices must be finite");

  double twice_area = 0.0;
  Eigen::Vector2d moment = Eigen::Vector2d::Zero();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector2d p = vertices.col(i);
    const Eigen::Vector2d r = vertices.col((i + 1) % n);
    const double c = cross2(p, r);
    twice_area += c;
    moment += c * (p + r);
  }
  const double scale = vertices.cwiseAbs().maxCoeff();
  require(std::abs(twice_area) > 1e-14 * scale * scale, "degenerate polygon (zero area)");

  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector2d p1 = vertices.col(i), p2 = vertices.col((i + 1) % n);
    require((p2 - p1).norm() > 0.0, "polygon has repeated consecutive vertices");
    for (Eigen::Index j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_intersect(p1, p2, vertices.col(j), vertices.col((j + 1) % n)))
        throw Error("polygon is self-intersecting");
    }
  }

  const Eigen::Vector2d centroid = moment / (3.0 * twice_area);
  vertices.colwise() -= centroid;
  if (twice_area < 0.0) vertices = vertices.rowwise().reverse().eval();

  CrossSection c;
  c.kind_ = SectionKind::polygon;
  c.dim_ = 2;
  c.area_ = 0.5 * std::abs(twice_area);
  double perimeter = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    perimeter += (vertices.col((i + 1) % n) - vertices.col(i)).norm();
  c.perimeter_ = perimeter;
  c.circumradius_ = vertices.colwise().norm().maxCoeff();
  c.vertices_ = std::move(vertices);
  return c;
}

CrossSection CrossSection::scaled(double t) const {
  require(t > 0.0, "scale factor must be positive");
  switch (kind_) {
    case SectionKind::interval: return interval(length_ * t);
    case SectionKind::ball: return ball(radius_ * t, dim_);
    case SectionKind::polygon: return polygon(vertices_ * t);
  }
  throw Error("unknown cross-section kind");
}

void PeakGeometry::validate() const {
  require(q > 1.0 && q < 2.0, "sharpness order q must satisfy 1 < q < 2");
  require(d >= 2, "ambient dimension d must be >= 2");
  require(a > 0.0, "peak length a must be positive");
  require(epsilon > 0.0, "transverse scale epsilon must be positive");
  require(cross_section.dim() == d - 1, "cross-section dimension must equal d - 1");
}

double ratio_A(const CrossSection& section) {
  if (section.kind() == SectionKind::ball) return section.dim() / section.radius();
  if (section.kind() == SectionKind::interval) return 2.0 / section.length();
  require(section.area() > 0.0, "cross-section has zero area");
  return section.perimeter() / section.area();
}

double hardy_constant(double q, int d) {
  require(q > 1.0 && q < 2.0, "hardy_constant: q must satisfy 1 < q < 2");
  require(d >= 2, "hardy_constant: d must be >= 2");
  const double k = q * (d - 1);
  return (k * k - 2.0 * k) / 4.0;
}

double hardy_index(double q, int d) {
  require(q > 1.0 && q < 2.0, "hardy_index: q must satisfy 1 < q < 2");
  require(d >= 2, "hardy_index: d must be >= 2");
  return 0.5 * std::abs(q * (d - 1) - 1.0);
}

Exponents exponents(double q) {
  require(q > 1.0 && q < 2.0, "exponents: q must satisfy 1 < q < 2");
  const double p = 2.0 / (2.0 - q);
  return {p, p - (q - 1.0)};
}

TheoryConstants theory_constants(const PeakGeometry& geometry) {
  geometry.validate();
  const Exponents e = exponents(geometry.q);
  return {ratio_A(geometry.cross_section), hardy_constant(geometry.q, geometry.d), e.p,
          e.remainder};
}

double predicted_coefficient(const TheoryConstants& constants, double lambda_L1_j) {
  require(lambda_L1_j < 0.0, "lambda_j(L_1) must be negative");
  require(constants.A_omega > 0.0, "A_omega must be positive");
  return std::pow(constants.A_omega, constants.p) * lambda_L1_j;
}

}  // namespace peaklab
