#include "peaklab/pullback.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Geometry>

#include "peaklab/common.hpp"

namespace peaklab {

namespace {

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

}  // namespace

int TrialPolynomial::degree() const {
  int deg = 0;
  for (const Term& t : terms) deg = std::max(deg, t.ps + t.p1 + t.p2);
  return deg;
}

double TrialPolynomial::value(double s, const Eigen::Vector2d& t) const {
  double v = 0.0;
  for (const Term& m : terms) v += m.coef * ipow(s, m.ps) * ipow(t[0], m.p1) * ipow(t[1], m.p2);
  return v;
}

double TrialPolynomial::ds(double s, const Eigen::Vector2d& t) const {
  double v = 0.0;
  for (const Term& m : terms)
    if (m.ps > 0) v += m.coef * m.ps * ipow(s, m.ps - 1) * ipow(t[0], m.p1) * ipow(t[1], m.p2);
  return v;
}

Eigen::Vector2d TrialPolynomial::dt(double s, const Eigen::Vector2d& t) const {
  Eigen::Vector2d g(0.0, 0.0);
  for (const Term& m : terms) {
    const double sp = m.coef * ipow(s, m.ps);
    if (m.p1 > 0) g[0] += sp * m.p1 * ipow(t[0], m.p1 - 1) * ipow(t[1], m.p2);
    if (m.p2 > 0) g[1] += sp * m.p2 * ipow(t[0], m.p1) * ipow(t[1], m.p2 - 1);
  }
  return g;
}

void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  require(n >= 1, "gauss_legendre: n must be >= 1");
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

namespace {

struct Rule {
  std::vector<double> x, w;
};

Rule rule_on(double a, double b, int n) {
  Eigen::VectorXd xs, ws;
  gauss_legendre(n, xs, ws);
  Rule r;
  for (int i = 0; i < n; ++i) {
    r.x.push_back(0.5 * (a + b) + 0.5 * (b - a) * xs[i]);
    r.w.push_back(0.5 * (b - a) * ws[i]);
  }
  return r;
}

struct Point {
  Eigen::Vector2d t;
  double w;
};

// Interior cross-section rule: Gauss on an interval, or a collapsed tensor
// rule on the centroid fan of a convex polygon.
std::vector<Point> section_rule(const CrossSection& omega, int n) {
  std::vector<Point> pts;
  if (omega.kind() == SectionKind::interval) {
    const Rule r = rule_on(-0.5 * omega.length(), 0.5 * omega.length(), n);
    for (int i = 0; i < n; ++i) pts.push_back({Eigen::Vector2d(r.x[i], 0.0), r.w[i]});
    return pts;
  }
  const Eigen::Matrix2Xd& V = omega.vertices();
  const Rule r = rule_on(0.0, 1.0, n);
  for (Eigen::Index k = 0; k < V.cols(); ++k) {
    const Eigen::Vector2d a = V.col(k), b = V.col((k + 1) % V.cols());
    const double jac = std::abs(a.x() * (b - a).y() - a.y() * (b - a).x());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double xi = r.x[i], eta = r.x[j];
        pts.push_back({xi * a + xi * eta * (b - a), r.w[i] * r.w[j] * xi * jac});
      }
  }
  return pts;
}

struct BoundaryPoint {
  Eigen::Vector2d t;
  Eigen::Vector2d tangent;  ///< d psi / dz
  double w;                 ///< weight in z
  double h = 1.0;           ///< d-2 measure density (|tangent| for d=3)
};

std::vector<BoundaryPoint> boundary_rule(const CrossSection& omega, int n) {
  std::vector<BoundaryPoint> pts;
  if (omega.kind() == SectionKind::interval) {
    const double r = 0.5 * omega.length();
    pts.push_back({Eigen::Vector2d(-r, 0.0), Eigen::Vector2d::Zero(), 1.0, 1.0});
    pts.push_back({Eigen::Vector2d(r, 0.0), Eigen::Vector2d::Zero(), 1.0, 1.0});
    return pts;
  }
  const Eigen::Matrix2Xd& V = omega.vertices();
  const Rule r = rule_on(0.0, 1.0, n);
  for (Eigen::Index k = 0; k < V.cols(); ++k) {
    const Eigen::Vector2d a = V.col(k), b = V.col((k + 1) % V.cols());
    for (int i = 0; i < n; ++i)
      pts.push_back({a + r.x[i] * (b - a), b - a, r.w[i], (b - a).norm()});
  }
  return pts;
}

struct Values {
  std::array<double, 6> v{};  // bl, bm, bu, gl, gm, gu
};

Values integrate(double q, double eps, double s0, double s1, const CrossSection& omega,
                 const TrialPolynomial& u, int n) {
  const int d = omega.dim() + 1;
  const double R = omega.circumradius();
  const Rule rs = rule_on(s0, s1, n);
  const std::vector<Point> inner = section_rule(omega, n);
  const std::vector<BoundaryPoint> outer = boundary_rule(omega, n);
  Values out;
  double& bl = out.v[0];
  double& bm = out.v[1];
  double& bu = out.v[2];
  double& gl = out.v[3];
  double& gm = out.v[4];
  double& gu = out.v[5];
  for (size_t i = 0; i < rs.x.size(); ++i) {
    const double s = rs.x[i], ws = rs.w[i];
    const double sq = std::pow(s, q);
    const double stretch = std::sqrt(1.0 + eps * eps * q * q * R * R * std::pow(s, 2.0 * q - 2.0));

    double trace = 0.0, exact = 0.0;
    for (const BoundaryPoint& b : outer) {
      const double val = std::abs(u.value(s, b.t));
      trace += b.w * b.h * val;
      double jac = 0.0;
      if (d == 2) {
        const double slope = eps * q * std::pow(s, q - 1.0) * b.t[0];
        jac = std::sqrt(1.0 + slope * slope);
      } else {
        // |d_s Psi x d_z Psi| with Psi(s, z) = (s, eps s^q psi(z))
        const Eigen::Vector3d es(1.0, eps * q * std::pow(s, q - 1.0) * b.t[0],
                                 eps * q * std::pow(s, q - 1.0) * b.t[1]);
        const Eigen::Vector3d ez(0.0, eps * sq * b.tangent[0], eps * sq * b.tangent[1]);
        jac = es.cross(ez).norm();
      }
      exact += b.w * val * jac;
    }
    const double sd = std::pow(eps * sq, d - 2);
    bl += ws * sd * trace;
    bu += ws * sd * stretch * trace;
    bm += ws * exact;

    double gs = 0.0, gt = 0.0, phys = 0.0;
    for (const Point& p : inner) {
      const double us = u.ds(s, p.t);
      const Eigen::Vector2d ut = u.dt(s, p.t);
      gs += p.w * us * us;
      gt += p.w * ut.squaredNorm();
      const double dx1 = us - q / s * p.t.dot(ut);
      phys += p.w * (dx1 * dx1 + ut.squaredNorm() / (eps * eps * sq * sq));
    }
    const double vol = std::pow(eps * sq, d - 1);
    const double cs = (d - 1) * eps * q * R;
    const double ct = q * R / (s * s * eps) + (d - 1) * q * q * R * R / (s * s);
    const double base = 1.0 / (eps * eps * sq * sq);
    gl += ws * vol * ((1.0 - cs) * gs + (base - ct) * gt);
    gu += ws * vol * ((1.0 + cs) * gs + (base + ct) * gt);
    gm += ws * vol * phys;
  }
  return out;
}

Sandwich make_sandwich(double lo, double mid, double up, double err, double budget) {
  Sandwich s{lo, mid, up};
  const double scale = std::max(std::abs(mid), 1e-300);
  s.margin_lower = (mid - lo) / scale;
  s.margin_upper = (up - mid) / scale;
  s.quadrature_error = err;
  s.holds = s.margin_lower >= -budget && s.margin_upper >= -budget;
  s.strict = s.margin_lower > budget && s.margin_upper > budget;
  return s;
}

}  // namespace

PullbackResult pullback_check(double q, double eps, double s0, double s1, const CrossSection& section,
                              const TrialPolynomial& trial, int n, double budget) {
  require(q > 1.0 && q < 2.0, "pullback_check: q must lie in (1, 2)");
  require(eps > 0.0, "pullback_check: eps must be positive");
  require(s0 > 0.0 && s1 > s0, "pullback_check: need 0 < s0 < s1");
  require(trial.degree() <= 4, "pullback_check: trial degree must be <= 4");
  require(section.kind() == SectionKind::interval || section.kind() == SectionKind::polygon,
          "pullback_check: section must be an interval or a polygon");
  require(trial.d == section.dim() + 1, "pullback_check: trial dimension does not match the section");

  Values coarse = integrate(q, eps, s0, s1, section, trial, n);
  for (;;) {
    const Values fine = integrate(q, eps, s0, s1, section, trial, 2 * n);
    double err = 0.0;
    for (size_t k = 0; k < 6; ++k)
      err = std::max(err, std::abs(fine.v[k] - coarse.v[k]) / std::max(std::abs(fine.v[k]), 1e-300));
    n *= 2;
    if (err <= 0.1 * budget) {
      PullbackResult r;
      r.boundary = make_sandwich(fine.v[0], fine.v[1], fine.v[2], err, budget);
      r.gradient = make_sandwich(fine.v[3], fine.v[4], fine.v[5], err, budget);
      r.quadrature_points = n;
      return r;
    }
    require(n <= 512, "pullback_check: quadrature did not converge to the error budget");
    coarse = fine;
  }
}

TrialPolynomial random_trial(int d, int degree, double s0, double s1, const CrossSection& section,
                             std::mt19937_64& rng) {
  require(d == 2 || d == 3, "random_trial: d must be 2 or 3");
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  TrialPolynomial p;
  p.d = d;
  for (int a = 0; a <= degree; ++a)
    for (int b = 0; a + b <= degree; ++b)
      for (int c = 0; a + b + c <= degree && (d == 3 || c == 0); ++c) p.terms.push_back({coef(rng), a, b, c});

  // Sample the closure of the cylinder and lift the constant term.
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  const std::vector<Point> pts = section_rule(section, 6);
  const std::vector<BoundaryPoint> bpts = boundary_rule(section, 6);
  for (int i = 0; i <= 20; ++i) {
    const double s = s0 + (s1 - s0) * i / 20.0;
    for (const Point& pt : pts) {
      const double v = p.value(s, pt.t);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    for (const BoundaryPoint& pt : bpts) {
      const double v = p.value(s, pt.t);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const double lift = -lo + 0.25 * (hi - lo) + 0.1;
  for (TrialPolynomial::Term& t : p.terms)
    if (t.ps == 0 && t.p1 == 0 && t.p2 == 0) t.coef += lift;
  return p;
}

CrossSection random_convex_polygon(int vertices, std::mt19937_64& rng) {
  require(vertices >= 3, "random_convex_polygon: need at least 3 vertices");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> angles(static_cast<size_t>(vertices));
  for (;;) {
    for (double& a : angles) a = 2.0 * std::numbers::pi * unit(rng);
    std::sort(angles.begin(), angles.end());
    // reject near-degenerate gaps (also keeps the origin inside)
    bool ok = true;
    for (int i = 0; i < vertices; ++i) {
      const double next = i + 1 < vertices ? angles[static_cast<size_t>(i + 1)] : angles[0] + 2.0 * std::numbers::pi;
      const double gap = next - angles[static_cast<size_t>(i)];
      if (gap < 0.2 || gap > 0.9 * std::numbers::pi) ok = false;
    }
    if (ok) break;
  }
  Eigen::Matrix2Xd V(2, vertices);
  for (int i = 0; i < vertices; ++i)
    V.col(i) << std::cos(angles[static_cast<size_t>(i)]), std::sin(angles[static_cast<size_t>(i)]);
  const CrossSection raw = CrossSection::polygon(V);
  return raw.scaled(1.0 / std::sqrt(raw.area()));
}

PullbackCampaign pullback_campaign(int d, int trials, std::uint64_t seed, const std::vector<double>& qs,
                                   const std::vector<double>& eps, double s0, double s1, double budget) {
  require(d == 2 || d == 3, "pullback_campaign: d must be 2 or 3");
  require(!qs.empty() && !eps.empty() && trials >= 1, "pullback_campaign: empty grid");
  std::mt19937_64 rng(seed);
  PullbackCampaign c;
  c.d = d;
  c.trials = trials;
  c.min_margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < trials; ++k) {
    const double q = qs[static_cast<size_t>(k) % qs.size()];
    const double e = eps[(static_cast<size_t>(k) / qs.size()) % eps.size()];
    const CrossSection section = d == 2 ? CrossSection::interval(1.0)
                                        : random_convex_polygon(5 + k % 3, rng);
    const TrialPolynomial trial = random_trial(d, 4, s0, s1, section, rng);
    CampaignRecord rec{q, e, pullback_check(q, e, s0, s1, section, trial, 16, budget)};
    if (rec.result.boundary.holds && rec.result.gradient.holds) ++c.held;
    if (rec.result.boundary.strict && rec.result.gradient.strict) ++c.strict;
    c.min_margin = std::min({c.min_margin, rec.result.boundary.margin_lower, rec.result.boundary.margin_upper,
                             rec.result.gradient.margin_lower, rec.result.gradient.margin_upper});
    c.records.push_back(rec);
  }
  return c;
}

}  // namespace peaklab
