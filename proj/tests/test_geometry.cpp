#include <cmath>
#include <numbers>

#include "doctest.h"
#include "peaklab/common.hpp"
#include "peaklab/geometry.hpp"

using namespace peaklab;
using doctest::Approx;

TEST_CASE("interval measures") {
  const CrossSection c = CrossSection::interval(1.0);
  CHECK(c.dim() == 1);
  CHECK(c.area() == 1.0);
  CHECK(c.perimeter() == 2.0);
  CHECK(c.circumradius() == 0.5);
  CHECK(ratio_A(c) == 2.0);
  CHECK(ratio_A(CrossSection::interval(0.25)) == Approx(8.0));
}

TEST_CASE("ball measures") {
  const CrossSection disk = CrossSection::ball(2.0, 2);
  CHECK(disk.area() == Approx(4.0 * std::numbers::pi));
  CHECK(disk.perimeter() == Approx(4.0 * std::numbers::pi));
  CHECK(ratio_A(disk) == Approx(1.0));
  const CrossSection ball3 = CrossSection::ball(1.0, 3);
  CHECK(ball3.area() == Approx(4.0 * std::numbers::pi / 3.0));
  CHECK(ball3.perimeter() == Approx(4.0 * std::numbers::pi));
}

TEST_CASE("polygon measures and normalization") {
  Eigen::Matrix2Xd V(2, 4);
  V << 0, 0, 1, 1,  // clockwise input
      0, 1, 1, 0;
  const CrossSection sq = CrossSection::polygon(V);
  CHECK(sq.area() == Approx(1.0));
  CHECK(sq.perimeter() == Approx(4.0));
  CHECK(sq.circumradius() == Approx(std::sqrt(0.5)));
  CHECK(sq.vertices().rowwise().mean().norm() < 1e-14);
  const auto& W = sq.vertices();
  double twice_area = 0.0;
  for (int i = 0; i < 4; ++i) twice_area += W(0, i) * W(1, (i + 1) % 4) - W(0, (i + 1) % 4) * W(1, i);
  CHECK(twice_area > 0.0);

  Eigen::Matrix2Xd bow(2, 4);
  bow << 0, 1, 0, 1, 0, 1, 1, 0;
  CHECK_THROWS_AS(CrossSection::polygon(bow), Error);
}

TEST_CASE("scaling of measures") {
  Eigen::Matrix2Xd V(2, 3);
  V << 0, 2, 0, 0, 0, 1;
  const CrossSection t = CrossSection::polygon(V);
  const CrossSection s = t.scaled(3.0);
  CHECK(s.area() == Approx(9.0 * t.area()));
  CHECK(s.perimeter() == Approx(3.0 * t.perimeter()));
  CHECK(s.circumradius() == Approx(3.0 * t.circumradius()));
  CHECK(ratio_A(s) == Approx(ratio_A(t) / 3.0));
}

TEST_CASE("Hardy constant and index") {
  CHECK(hardy_constant(1.5, 2) == Approx(-0.1875));
  CHECK(hardy_index(1.5, 2) == Approx(0.25));
  CHECK(hardy_constant(1.5, 3) == Approx((9.0 - 6.0) / 4.0));
  for (double q = 1.05; q < 2.0; q += 0.1)
    for (int d = 2; d <= 5; ++d) {
      const double H = hardy_constant(q, d);
      CHECK(H >= -0.25);
      CHECK(hardy_index(q, d) * hardy_index(q, d) == Approx(H + 0.25));
    }
}

TEST_CASE("exponents and predicted coefficient") {
  CHECK(exponents(1.5).p == Approx(4.0));
  CHECK(exponents(1.5).remainder == Approx(3.5));
  CHECK(exponents(1.2).p == Approx(2.5));
  PeakGeometry g;
  g.q = 1.5;
  const TheoryConstants c = theory_constants(g);
  CHECK(c.A_omega == 2.0);
  CHECK(predicted_coefficient(c, -1.0) == Approx(-16.0));
  CHECK_THROWS_AS(predicted_coefficient(c, 0.5), Error);
}

TEST_CASE("geometry validation") {
  PeakGeometry g;
  g.q = 1.0;
  CHECK_THROWS_AS(g.validate(), Error);
  g.q = 2.0;
  CHECK_THROWS_AS(g.validate(), Error);
  g.q = 1.5;
  g.d = 3;
  CHECK_THROWS_AS(g.validate(), Error);
  g.cross_section = CrossSection::ball(1.0, 2);
  CHECK_NOTHROW(g.validate());
  g.epsilon = 0.0;
  CHECK_THROWS_AS(g.validate(), Error);
}
