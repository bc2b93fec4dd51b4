#include "peaklab/xsection.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "peaklab/common.hpp"

namespace peaklab {

namespace {

constexpr int kPositiveBranches = 8;
constexpr double kPi = std::numbers::pi;

struct Root {
  double x = 0.0;
  double width = 0.0;
  double residual = 0.0;
};

// Illinois false position on a sign-changing bracket, falling back to
// bisection whenever the secant step stalls.
Root bracketed_root(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return {lo, 0.0, 0.0};
  if (fhi == 0.0) return {hi, 0.0, 0.0};
  require((flo < 0.0) != (fhi < 0.0), "robin interval: root is not bracketed");
  int side = 0;
  for (int it = 0; it < 400; ++it) {
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(lo) + std::abs(hi))) break;
    double x = (lo * fhi - hi * flo) / (fhi - flo);
    const double w = hi - lo;
    if (!(x > lo + 0.01 * w && x < hi - 0.01 * w) || it % 4 == 3) x = 0.5 * (lo + hi);
    const double fx = f(x);
    if (fx == 0.0) return {x, 0.0, 0.0};
    if ((fx < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = fx;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = x;
      fhi = fx;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
  }
  const double x = 0.5 * (lo + hi);
  return {x, hi - lo, std::abs(f(x))};
}

// tanh(x) / x without cancellation at small x.
double tanhc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 3.0;
  return std::tanh(x) / x;
}

double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

struct Mode {
  double lambda;
  double width;
  double residual;
};

}  // namespace

int robin_interval_max_modes(const RobinIntervalProblem& p) {
  int negatives = 0;
  if (p.alpha > 0.0) negatives = p.alpha > 2.0 / p.length ? 2 : 1;
  return negatives + kPositiveBranches;
}

Spectrum robin_interval_eigs(const RobinIntervalProblem& p, int k) {
  require(p.length > 0.0 && std::isfinite(p.length), "robin_interval_eigs: length must be positive");
  require(std::isfinite(p.alpha), "robin_interval_eigs: alpha must be finite");
  const int max_modes = robin_interval_max_modes(p);
  require(k >= 1 && k <= max_modes, "robin_interval_eigs: k must lie in [1, " +
                                        std::to_string(max_modes) + "] for these parameters");
  const double l = p.length, alpha = p.alpha, c = 0.5 * alpha * l;
  std::vector<Mode> negative, positive;

  // Hyperbolic branches, lambda = -k^2.
  if (alpha > 0.0) {
    const Root sym = bracketed_root(
        [&](double kk) { return kk * std::tanh(0.5 * kk * l) - alpha; }, alpha, alpha + 2.0 / l);
    negative.push_back({-sym.x * sym.x, 2.0 * sym.x * sym.width, sym.residual});
    if (alpha > 2.0 / l) {
      // k coth(kl/2) = alpha  <=>  1 - alpha (l/2) tanhc(kl/2) = 0, root in (0, alpha].
      const Root anti = bracketed_root(
          [&](double kk) { return 1.0 - c * tanhc(0.5 * kk * l); }, 0.0, alpha);
      negative.push_back({-anti.x * anti.x, 2.0 * anti.x * anti.width, anti.residual});
    }
  }

  // Oscillatory branches in theta = kappa l / 2, lambda = (2 theta / l)^2.
  auto push_theta = [&](const Root& r) {
    const double kappa = 2.0 * r.x / l;
    positive.push_back({kappa * kappa, 2.0 * kappa * 2.0 * r.width / l, r.residual});
  };
  if (alpha == 0.0) {
    for (int n = 0; n < kPositiveBranches; ++n) {
      const double kappa = kPi * n / l;
      positive.push_back({kappa * kappa, 0.0, 0.0});
    }
  } else {
    // cos modes: theta sin(theta) + c cos(theta) = 0 on [n pi - pi/2, n pi + pi/2].
    auto sym = [c](double t) { return t * std::sin(t) + c * std::cos(t); };
    if (alpha < 0.0) push_theta(bracketed_root(sym, 0.0, 0.5 * kPi));
    for (int n = 1; n <= kPositiveBranches; ++n)
      push_theta(bracketed_root(sym, n * kPi - 0.5 * kPi, n * kPi + 0.5 * kPi));
    // sin modes: cos(theta) - c sinc(theta) = 0 on [n pi, (n+1) pi].
    auto anti = [c](double t) { return std::cos(t) - c * sinc(t); };
    if (c < 1.0) push_theta(bracketed_root(anti, 0.0, kPi));
    for (int n = 1; n <= kPositiveBranches; ++n)
      push_theta(bracketed_root(anti, n * kPi, (n + 1) * kPi));
  }

  auto by_value = [](const Mode& x, const Mode& y) { return x.lambda < y.lambda; };
  std::sort(negative.begin(), negative.end(), by_value);
  std::sort(positive.begin(), positive.end(), by_value);
  positive.resize(kPositiveBranches);
  std::vector<Mode> all = negative;
  all.insert(all.end(), positive.begin(), positive.end());

  Spectrum out;
  out.values.resize(k);
  out.error_bounds.resize(k);
  out.residuals.resize(k);
  for (int i = 0; i < k; ++i) {
    out.values[i] = all[static_cast<size_t>(i)].lambda;
    out.error_bounds[i] = all[static_cast<size_t>(i)].width;
    out.residuals[i] = all[static_cast<size_t>(i)].residual;
  }
  out.info.method = "robin-interval-secular";
  return out;
}

double robin_rectangle_eig1(double lx, double ly, double alpha) {
  return robin_interval_eigs({lx, alpha}, 1).values[0] +
         robin_interval_eigs({ly, alpha}, 1).values[0];
}

}  // namespace peaklab
