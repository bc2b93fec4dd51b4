#include "peaklab/sturm1d.hpp"

#include <algorithm>
#include <cmath>

#include "peaklab/common.hpp"
#include "peaklab/geometry.hpp"

namespace peaklab {
namespace {

// F(e) = int_1^U u^e du.
double power_integral(double U, double e) {
  if (e == -1.0) return std::log(U);
  return std::expm1((e + 1.0) * std::log(U)) / (e + 1.0);
}

}  // namespace

EffectiveOperatorSpec EffectiveOperatorSpec::make(double q, int d, double mu, double a) {
  require(mu >= 0.0, "coupling mu must be nonnegative");
  require(a > 0.0, "truncation length a must be positive");
  return {q, d, mu, a, hardy_constant(q, d)};
}

Grid1D build_grid(double a, int N, double gamma) {
  require(a > 0.0, "build_grid: a must be positive");
  require(N >= 2, "build_grid: N must be >= 2");
  require(gamma >= 1.0, "build_grid: gamma must be >= 1");
  Grid1D g;
  g.gamma = gamma;
  g.nodes.resize(N + 1);
  for (int i = 0; i <= N; ++i) {
    const double r = static_cast<double>(i) / N;
    g.nodes[i] = gamma == 1.0 ? a * r : a * std::pow(r, gamma);
  }
  g.nodes[N] = a;
  for (int i = 0; i < N; ++i)
    require(g.nodes[i + 1] > g.nodes[i], "build_grid: nodes not strictly increasing (underflow)");
  return g;
}

double default_grading(double q, int d) {
  return std::max(2.0, 1.0 / hardy_index(q, d));
}

HatMoments hat_moments(double s0, double s1, double beta) {
  require(s1 > s0 && s0 >= 0.0, "hat_moments: need 0 <= s0 < s1");
  const double h = s1 - s0;
  HatMoments m;
  if (s0 == 0.0) {
    // Only the right hat survives next to the origin: int_0^h s^{-beta} (s/h)^2.
    require(beta < 3.0, "hat_moments: integral diverges at the origin");
    m.rr = std::pow(h, 1.0 - beta) / (3.0 - beta);
    m.ll = std::numeric_limits<double>::infinity();
    m.lr = std::pow(h, 1.0 - beta) / ((2.0 - beta) * (3.0 - beta));
    if (beta >= 2.0) m.lr = std::numeric_limits<double>::infinity();
    return m;
  }
  const double r = h / s0;
  const double scale = h * std::pow(s0, -beta);
  if (r <= 0.5) {
    // (1 + r xi)^{-beta} = sum_n binom(-beta, n) r^n xi^n, integrated termwise.
    double c = 1.0, rn = 1.0;
    double ll = 0.0, lr = 0.0, rr = 0.0;
    for (int n = 0; n < 200; ++n) {
      const double n1 = n + 1.0, n2 = n + 2.0, n3 = n + 3.0;
      const double t = c * rn;
      ll += t * 2.0 / (n1 * n2 * n3);
      lr += t / (n2 * n3);
      rr += t / n3;
      if (std::abs(t) < 1e-18 * std::abs(rr)) break;
      c *= (-beta - n) / n1;
      rn *= r;
    }
    m.ll = scale * ll;
    m.lr = scale * lr;
    m.rr = scale * rr;
    return m;
  }
  // u = 1 + r xi; moments K_k = int_0^1 (1 + r xi)^{-beta} xi^k.
  const double U = 1.0 + r;
  const double f0 = power_integral(U, -beta);
  const double f1 = power_integral(U, 1.0 - beta);
  const double f2 = power_integral(U, 2.0 - beta);
  const double k0 = f0 / r;
  const double k1 = (f1 - f0) / (r * r);
  const double k2 = (f2 - 2.0 * f1 + f0) / (r * r * r);
  m.rr = scale * k2;
  m.lr = scale * (k1 - k2);
  m.ll = scale * (k0 - 2.0 * k1 + k2);
  return m;
}

TridiagonalPencil assemble_effective(const EffectiveOperatorSpec& spec, const Grid1D& grid) {
  require(spec.q > 1.0 && spec.q < 2.0, "assemble_effective: q must satisfy 1 < q < 2");
  require(spec.mu >= 0.0, "assemble_effective: mu must be nonnegative");
  require(std::abs(grid.a() - spec.a) <= 1e-12 * spec.a, "assemble_effective: grid.a != spec.a");
  const int N = grid.elements();
  require(N >= 2, "assemble_effective: need at least two elements");
  const int n = N - 1;

  TridiagonalPencil p;
  p.spec = spec;
  p.grid = grid;
  p.diag = Eigen::VectorXd::Zero(n);
  p.off = Eigen::VectorXd::Zero(std::max(n - 1, 0));
  p.mass = Eigen::VectorXd::Zero(n);

  // Element e spans nodes e, e+1; interior node i has index i - 1.
  for (int e = 0; e < N; ++e) {
    const double s0 = grid.nodes[e], s1 = grid.nodes[e + 1];
    const double h = s1 - s0;
    HatMoments pot;
    if (spec.H != 0.0) {
      const HatMoments m2 = hat_moments(s0, s1, 2.0);
      pot.ll += spec.H * m2.ll;
      pot.lr += spec.H * m2.lr;
      pot.rr += spec.H * m2.rr;
    }
    if (spec.mu != 0.0) {
      const HatMoments mq = hat_moments(s0, s1, spec.q);
      pot.ll -= spec.mu * mq.ll;
      pot.lr -= spec.mu * mq.lr;
      pot.rr -= spec.mu * mq.rr;
    }
    const int left = e - 1, right = e;  // interior indices, -1 / n mean boundary
    if (left >= 0) {
      p.diag[left] += 1.0 / h + pot.ll;
      p.mass[left] += 0.5 * h;
    }
    if (right < n) {
      p.diag[right] += 1.0 / h + pot.rr;
      p.mass[right] += 0.5 * h;
    }
    if (left >= 0 && right < n) p.off[left] += -1.0 / h + pot.lr;
  }
  return p;
}

SymTridiagonal<double> TridiagonalPencil::standard() const {
  SymTridiagonal<double> t;
  const Eigen::VectorXd inv_sqrt = mass.cwiseSqrt().cwiseInverse();
  t.diag = diag.cwiseProduct(inv_sqrt).cwiseProduct(inv_sqrt);
  t.off = off;
  for (Eigen::Index i = 0; i < off.size(); ++i) t.off[i] *= inv_sqrt[i] * inv_sqrt[i + 1];
  return t;
}

double TridiagonalPencil::form(const Eigen::VectorXd& x) const {
  require(x.size() == dim(), "form: dimension mismatch");
  double v = diag.cwiseProduct(x.cwiseAbs2()).sum();
  for (Eigen::Index i = 0; i < off.size(); ++i) v += 2.0 * off[i] * x[i] * x[i + 1];
  return v;
}

Spectrum eigs_tridiagonal(const TridiagonalPencil& pencil, int k) {
  require(k >= 1, "eigs_tridiagonal: k must be >= 1");
  require(k <= pencil.dim(), "eigs_tridiagonal: k exceeds the pencil dimension");
  const SymTridiagonal<double> t = pencil.standard();
  Spectrum s;
  s.values.resize(k);
  s.error_bounds.resize(k);
  for (int i = 0; i < k; ++i) {
    const Bracket<double> b = bisect_eigenvalue(t, i, 1e-13, 1e-15);
    s.values[i] = b.value();
    s.error_bounds[i] = b.width();
  }
  // Brackets are nested by construction, but guard against ties at the midpoint.
  for (int i = 1; i < k; ++i) s.values[i] = std::max(s.values[i], s.values[i - 1]);
  s.info.method = "sturm-bisection";
  return s;
}

int negative_count(const TridiagonalPencil& pencil, double threshold) {
  return sturm_count<double>(pencil.diag, pencil.off, pencil.mass, threshold);
}

namespace {

double truncated_eigenvalue(int j, double q, int d, double a, int N, double gamma) {
  const TridiagonalPencil p =
      assemble_effective(EffectiveOperatorSpec::make(q, d, 1.0, a), build_grid(a, N, gamma));
  return eigs_tridiagonal(p, j).values[j - 1];
}

}  // namespace

LambdaL1Result lambda_L1(int j, double q, int d, double tol, const LadderOptions& options) {
  require(j >= 1, "lambda_L1: j must be >= 1");
  require(tol > 0.0, "lambda_L1: tol must be positive");
  require(options.a0 > 0.0 && options.n0 > j + 1, "lambda_L1: invalid ladder start");
  const double gamma = options.gamma > 0.0 ? options.gamma : default_grading(q, d);

  LambdaL1Result result;
  double a = options.a0;
  int N = options.n0;
  bool have_prev_level = false;
  double prev_level = 0.0;

  for (int level = 0; level < options.max_levels; ++level) {
    double coarse = truncated_eigenvalue(j, q, d, a, N, gamma);
    result.ladder.push_back({a, N, coarse});
    double fine = coarse;
    double refine_change = 0.0;
    bool refined = false;
    while (2 * N <= options.max_nodes) {
      fine = truncated_eigenvalue(j, q, d, a, 2 * N, gamma);
      result.ladder.push_back({a, 2 * N, fine});
      refine_change = std::abs(fine - coarse);
      if (refine_change <= tol * std::abs(fine)) {
        refined = true;
        break;
      }
      N *= 2;
      coarse = fine;
    }
    if (!refined) {
      result.value = fine;
      result.bracket_width = refine_change;
      return result;
    }
    if (have_prev_level) {
      const double change = fine - prev_level;
      if (change > tol * std::abs(fine))
        throw Error("lambda_L1: truncation monotonicity violated (lambda_" + std::to_string(j) +
                    " increased from " + std::to_string(prev_level) + " to " +
                    std::to_string(fine) + " at a = " + std::to_string(a) + ")");
      if (std::abs(change) <= tol * std::abs(fine)) {
        result.value = fine;
        result.bracket_width = std::max(std::abs(change), refine_change);
        result.converged = true;
        return result;
      }
    }
    have_prev_level = true;
    prev_level = fine;
    result.value = fine;
    result.bracket_width = refine_change;
    a *= 2.0;
  }
  return result;
}

ScalingReport scaling_check(int j, double q, int d, const std::vector<double>& mu_list,
                            const ScalingOptions& options) {
  require(j >= 1, "scaling_check: j must be >= 1");
  require(!mu_list.empty(), "scaling_check: empty mu list");
  const double gamma = options.gamma > 0.0 ? options.gamma : default_grading(q, d);
  const double p = exponents(q).p;
  ScalingReport r;
  for (double mu : mu_list) {
    require(mu > 0.0, "scaling_check: mu must be positive");
    const double c = std::pow(mu, -1.0 / (2.0 - q));
    const double a = options.a * c;
    const TridiagonalPencil pencil = assemble_effective(EffectiveOperatorSpec::make(q, d, mu, a),
                                                        build_grid(a, options.N, gamma));
    const double raw = eigs_tridiagonal(pencil, j).values[j - 1];
    r.mu.push_back(mu);
    r.raw.push_back(raw);
    r.rescaled.push_back(raw / std::pow(mu, p));
  }
  const auto [lo, hi] = std::minmax_element(r.rescaled.begin(), r.rescaled.end());
  double mean = 0.0;
  for (double v : r.rescaled) mean += v;
  mean /= static_cast<double>(r.rescaled.size());
  r.max_relative_spread = (*hi - *lo) / std::abs(mean);
  return r;
}

}  // namespace peaklab
