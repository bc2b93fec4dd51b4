#include "peaklab/reproduce.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

#include "peaklab/common.hpp"
#include "peaklab/eigsolve.hpp"
#include "peaklab/experiments.hpp"
#include "peaklab/femrobin.hpp"
#include "peaklab/geometry.hpp"
#include "peaklab/mesh2d.hpp"
#include "peaklab/pullback.hpp"
#include "peaklab/sturm1d.hpp"
#include "peaklab/xsection.hpp"

namespace peaklab {

bool AcceptanceReport::all_passed() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.passed; });
}

std::string format_line(const CriterionResult& r) {
  std::ostringstream out;
  out << (r.passed ? "PASS" : "FAIL") << "  " << r.id << "  " << r.title << "  " << r.summary;
  char buf[32];
  std::snprintf(buf, sizeof buf, "  (%.1fs)", r.seconds);
  out << buf;
  return out.str();
}

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

CriterionResult start(int id, const std::string& title) {
  CriterionResult r;
  r.id = id;
  r.title = title;
  return r;
}

struct Certificates {
  int solves = 0;
  int certified = 0;
  std::vector<std::string> failures;

  void add(const std::string& where, int expected, int inertia) {
    ++solves;
    if (inertia == expected)
      ++certified;
    else
      failures.push_back(where + ": inertia " + std::to_string(inertia) + ", expected " + std::to_string(expected));
  }
};

struct Context {
  AcceptanceOptions options;
  Certificates certificates;
  std::optional<SweepResult> sweep15, sweep12;
  std::optional<double> L1_15, L1_12;
  bool ran5 = false, ran6 = false, ran9 = false;

  SweepResult& sweep(double q) {
    std::optional<SweepResult>& slot = q == 1.5 ? sweep15 : sweep12;
    if (!slot) {
      SweepOptions o;
      o.q = q;
      o.threads = options.threads;
      o.seed = options.seed;
      slot = sweep_alpha(o);
      for (const SweepPoint& p : slot->points)
        certificates.add("sweep q=" + fmt("%g", q) + " alpha=" + fmt("%g", p.alpha), o.J, p.info.inertia_below);
    }
    return *slot;
  }

  double lambda1(double q) {
    std::optional<double>& slot = q == 1.5 ? L1_15 : L1_12;
    if (!slot) slot = lambda_L1(1, q, 2, 1e-4).value;
    return *slot;
  }
};

CriterionResult criterion1(Context&) {
  CriterionResult r = start(1, "scaling identity");
  double worst = 0.0;
  for (int j = 1; j <= 3; ++j) {
    const ScalingReport s = scaling_check(j, 1.5, 2, {1.0, 2.0, 4.0});
    r.metrics.push_back({"spread_j" + std::to_string(j), s.max_relative_spread});
    worst = std::max(worst, s.max_relative_spread);
  }
  r.passed = worst <= acceptance::scaling_spread;
  r.summary = "max spread of lambda_j(L_mu)/mu^4 over j=1..3, mu=1,2,4: " + fmt("%.2e", worst) + " (<= 1e-10)";
  return r;
}

CriterionResult criterion2(Context&) {
  CriterionResult r = start(2, "Hardy positivity");
  const std::pair<double, int> cases[] = {{1.2, 2}, {1.5, 2}, {1.5, 3}};
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& [q, d] : cases)
    for (int N : {100, 1000}) {
      EffectiveOperatorSpec spec = EffectiveOperatorSpec::make(q, d, 0.0, 1.0);
      const double l = eigs_tridiagonal(assemble_effective(spec, build_grid(1.0, N, default_grading(q, d))), 1).values[0];
      r.metrics.push_back({"lambda1_q" + fmt("%g", q) + "_d" + std::to_string(d) + "_N" + std::to_string(N), l});
      worst = std::min(worst, l);
    }
  r.passed = worst >= acceptance::hardy_floor;
  r.summary = "min lambda_1 at mu=0 over 6 cases: " + fmt("%.4g", worst) + " (>= -1e-10)";
  return r;
}

CriterionResult criterion3(Context&) {
  CriterionResult r = start(3, "truncation squeeze");
  const double q = 1.5;
  const double L1 = lambda_L1(1, q, 2, 1e-8).value;
  r.metrics.push_back({"lambda1_L1", L1});
  bool ok = true;
  double dmax = 0.0, worst_rel = std::numeric_limits<double>::infinity();
  for (double mu : {4.0, 16.0, 64.0}) {
    const TridiagonalPencil p =
        assemble_effective(EffectiveOperatorSpec::make(q, 2, mu, 1.0), build_grid(1.0, 64000, default_grading(q, 2)));
    const double l = eigs_tridiagonal(p, 1).values[0];
    const double scale = std::pow(mu, exponents(q).p) * std::abs(L1);
    const double diff = l - std::pow(mu, exponents(q).p) * L1;
    r.metrics.push_back({"difference_mu" + fmt("%g", mu), diff});
    ok = ok && diff >= acceptance::squeeze_floor * scale && std::isfinite(diff);
    dmax = std::max(dmax, diff);
    worst_rel = std::min(worst_rel, diff / scale);
  }
  r.metrics.push_back({"max_difference", dmax});
  r.passed = ok;
  r.summary = "min (lambda_1(L_mu,1) - mu^4 lambda_1(L_1)) / (mu^4 |lambda_1(L_1)|) over mu=4,16,64: " +
              fmt("%.3g", worst_rel) + " (>= -1e-6), max difference " + fmt("%.3g", dmax);
  return r;
}

CriterionResult criterion4(Context&) {
  CriterionResult r = start(4, "negative spectrum counts");
  const double q = 1.5;
  std::vector<int> counts;
  double min_gap = std::numeric_limits<double>::infinity();
  for (double a : {10.0, 40.0, 160.0}) {
    const int N = static_cast<int>(400 * a);
    const TridiagonalPencil p =
        assemble_effective(EffectiveOperatorSpec::make(q, 2, 1.0, a), build_grid(a, N, default_grading(q, 2)));
    const int n = negative_count(p, 0.0);
    counts.push_back(n);
    r.metrics.push_back({"count_a" + fmt("%g", a), n});
    if (n >= 1) {
      const Spectrum s = eigs_tridiagonal(p, n + 1);
      r.metrics.push_back({"first_nonnegative_a" + fmt("%g", a), s.values[n]});
      for (int i = 1; i < n; ++i) min_gap = std::min(min_gap, (s.values[i] - s.values[i - 1]) / std::abs(s.values[0]));
    }
  }
  r.metrics.push_back({"min_relative_gap", min_gap});
  const bool increasing = counts[0] < counts[1] && counts[1] < counts[2];
  r.passed = increasing && min_gap > acceptance::simplicity_gap;
  r.summary = "counts below 0 at a=10,40,160: " + std::to_string(counts[0]) + ", " + std::to_string(counts[1]) + ", " +
              std::to_string(counts[2]) + "; min relative gap " + fmt("%.3g", min_gap) + " (> 1e-8)";
  return r;
}

CriterionResult criterion5(Context& ctx) {
  CriterionResult r = start(5, "interval and rectangle oracles");
  ctx.ran5 = true;
  bool lip = true;
  for (double a : {0.5, 1.0, 2.0, 5.0, 10.0}) {
    const double l = robin_interval_eigs({1.0, a}, 1).values[0];
    r.metrics.push_back({"lambda1_alpha" + fmt("%g", a), l});
    lip = lip && l <= -a * a;
  }
  double worst_small = 0.0;
  for (double a : {0.1, 0.01, 0.001}) {
    const double l = robin_interval_eigs({1.0, a}, 1).values[0];
    worst_small = std::max(worst_small, std::abs(l + 2.0 * a) / (a * a));
  }
  r.metrics.push_back({"max_small_alpha_ratio", worst_small});

  const double alpha = 0.01;
  const SymmetricPencil pencil = assemble(build_rectangle_mesh(1.0, 1.0, 64, 64), alpha);
  EigOptions eo;
  eo.seed = ctx.options.seed;
  eo.vectors = false;
  const Spectrum s = smallest_eigs(pencil, eo);
  ctx.certificates.add("unit square alpha=0.01", 1, s.info.inertia_below);
  const double oracle = robin_rectangle_eig1(1.0, 1.0, alpha);
  const double rel = std::abs(s.values[0] - oracle) / std::abs(oracle);
  r.metrics.push_back({"square_fem", s.values[0]});
  r.metrics.push_back({"square_oracle", oracle});
  r.metrics.push_back({"square_rel_error", rel});

  r.passed = lip && worst_small <= acceptance::small_alpha_constant && rel <= acceptance::square_fem_rel;
  r.summary = std::string("lambda_1 <= -alpha^2: ") + (lip ? "yes" : "no") + "; max |lambda_1+2alpha|/alpha^2 " +
              fmt("%.3g", worst_small) + " (<= 3); square FEM vs oracle " + fmt("%.2e", rel) + " (<= 1e-2)";
  return r;
}

CriterionResult criterion6(Context& ctx) {
  CriterionResult r = start(6, "main asymptotics");
  ctx.ran6 = true;
  bool ok = true;
  std::string summary;
  for (double q : {1.5, 1.2}) {
    const SweepResult& sw = ctx.sweep(q);
    const double c = std::abs(predicted_coefficient(sw.constants, ctx.lambda1(q)));
    const int window = static_cast<int>(sw.points.size()) / 2;
    const AsymptoticFit f = fit_power_law(sw.alphas(), sw.lambdas(1), window, q - 1.0, sw.constants.p, c);
    const std::string tag = "_q" + fmt("%g", q);
    r.metrics.push_back({"extrapolated_slope" + tag, f.extrapolated_slope});
    r.metrics.push_back({"fitted_slope" + tag, f.slope});
    r.metrics.push_back({"slope_rel_error" + tag, f.slope_rel_error});
    r.metrics.push_back({"coefficient" + tag, f.coefficient});
    r.metrics.push_back({"coefficient_theory" + tag, c});
    r.metrics.push_back({"coefficient_rel_error" + tag, f.coefficient_rel_error});
    r.metrics.push_back({"coefficient_fixed_exponent" + tag, f.coefficient_fixed_exponent});
    r.metrics.push_back({"coefficient_fixed_rel_error" + tag, f.coefficient_fixed_rel_error});
    const bool pass_q = f.slope_rel_error <= acceptance::slope_rel && f.coefficient_rel_error <= acceptance::coefficient_rel &&
                        sw.monotone;
    ok = ok && pass_q;
    if (!summary.empty()) summary += "; ";
    summary += "q=" + fmt("%g", q) + ": slope " + fmt("%.4g", f.extrapolated_slope) + " vs " + fmt("%g", f.p_theory) +
               " (" + fmt("%.2e", f.slope_rel_error) + " <= 5e-2), coefficient " + fmt("%.4g", f.coefficient) + " vs " +
               fmt("%.4g", c) + " (" + fmt("%.2e", f.coefficient_rel_error) + " <= 0.15)";
  }
  r.passed = ok;
  r.summary = summary;
  return r;
}

CriterionResult criterion7(Context& ctx) {
  CriterionResult r = start(7, "Agmon localization");
  const SweepResult& sw = ctx.sweep(1.5);
  const AgmonReport zero = agmon_report(sw, 0.0);
  const bool exact_one = std::all_of(zero.ratios.begin(), zero.ratios.end(), [](double v) { return v == 1.0; });
  const AgmonReport rep = agmon_report(sw, 0.1);
  for (size_t i = 0; i < rep.ratios.size(); ++i) r.metrics.push_back({"ratio_alpha" + fmt("%.4g", rep.alphas[i]), rep.ratios[i]});
  r.metrics.push_back({"max_over_min_top4", rep.max_over_min});
  r.passed = exact_one && rep.max_over_min <= acceptance::agmon_max_over_min;
  r.summary = "b=0.1 max/min over top four alpha " + fmt("%.5g", rep.max_over_min) + " (<= 2); ratio(b=0) == 1: " +
              (exact_one ? "yes" : "no");
  return r;
}

CriterionResult criterion8(Context& ctx) {
  CriterionResult r = start(8, "change-of-variables sandwiches");
  const PullbackCampaign c3 = pullback_campaign(3, 20, ctx.options.seed, {1.2, 1.5}, {0.1, 0.5}, 0.5, 1.5,
                                                acceptance::pullback_budget);
  const PullbackCampaign c2 = pullback_campaign(2, 20, ctx.options.seed, {1.2, 1.5}, {0.1, 0.5}, 0.5, 1.5,
                                                acceptance::pullback_budget);
  r.metrics.push_back({"d3_strict", c3.strict});
  r.metrics.push_back({"d3_min_margin", c3.min_margin});
  r.metrics.push_back({"d2_held", c2.held});
  r.metrics.push_back({"d2_min_margin", c2.min_margin});
  r.passed = c3.strict == c3.trials;
  r.summary = "d=3 polygons: " + std::to_string(c3.strict) + "/20 with margins > 1e-8 (min " + fmt("%.3g", c3.min_margin) +
              "); d=2 interval: " + std::to_string(c2.held) + "/20 hold, boundary upper bound is an identity";
  return r;
}

CriterionResult criterion9(Context& ctx) {
  CriterionResult r = start(9, "Neumann window");
  ctx.ran9 = true;
  const WindowReport w = neumann_window(WindowOptions{});
  for (size_t i = 0; i < w.eps.size(); ++i) {
    r.metrics.push_back({"scaled_eps" + fmt("%g", w.eps[i]), w.scaled[i]});
    ctx.certificates.add("window eps=" + fmt("%g", w.eps[i]), 1, w.certificates[i]);
  }
  r.metrics.push_back({"c", w.c});
  r.metrics.push_back({"spread", w.spread});
  const bool negative = std::all_of(w.lambda1.begin(), w.lambda1.end(), [](double l) { return l < 0.0; });
  r.passed = negative && w.spread <= acceptance::window_spread;
  r.summary = "c = max(-eps lambda_1) " + fmt("%.4g", w.c) + ", spread " + fmt("%.4g", w.spread) + " (<= 3)";
  return r;
}

CriterionResult criterion10(Context& ctx) {
  CriterionResult r = start(10, "solver certificates");
  if (!ctx.ran5) criterion5(ctx);
  if (!ctx.ran6) criterion6(ctx);
  if (!ctx.ran9) criterion9(ctx);

  // n = 200 fixture: 20 x 10 vertex Robin rectangle
  const SymmetricPencil pencil = assemble(build_rectangle_mesh(2.0, 1.0, 19, 9), 1.0);
  require(pencil.dim() == 200, "criterion 10: fixture size");
  EigOptions eo;
  eo.k = 6;
  eo.method = EigMethod::lanczos;
  eo.seed = ctx.options.seed;
  const Spectrum lz = smallest_eigs(pencil, eo);
  const Spectrum de = dense_eigs(pencil, eo.k, false);
  ctx.certificates.add("fixture lanczos", eo.k, lz.info.inertia_below);
  ctx.certificates.add("fixture dense", eo.k, de.info.inertia_below);
  double agree = 0.0;
  for (int i = 0; i < eo.k; ++i)
    agree = std::max(agree, std::abs(lz.values[i] - de.values[i]) / std::max(std::abs(de.values[i]), 1e-300));
  r.metrics.push_back({"dense_lanczos_rel", agree});
  r.metrics.push_back({"solves", ctx.certificates.solves});
  r.metrics.push_back({"certified", ctx.certificates.certified});
  r.passed = agree <= acceptance::dense_lanczos_rel && ctx.certificates.certified == ctx.certificates.solves;
  r.summary = std::to_string(ctx.certificates.certified) + "/" + std::to_string(ctx.certificates.solves) +
              " solves certified by inertia; dense vs Lanczos on n=200: " + fmt("%.2e", agree) + " (<= 1e-8)";
  for (const std::string& f : ctx.certificates.failures) r.summary += "; " + f;
  return r;
}

}  // namespace

AcceptanceReport run_acceptance(const AcceptanceOptions& options) {
  Context ctx;
  ctx.options = options;
  const std::function<CriterionResult(Context&)> all[] = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                          criterion6, criterion7, criterion8, criterion9, criterion10};
  AcceptanceReport rep;
  for (int id = 1; id <= 10; ++id) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), id) == options.only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = all[id - 1](ctx);
    } catch (const std::exception& e) {
      r.id = id;
      r.title = "criterion " + std::to_string(id);
      r.passed = false;
      r.summary = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.criteria.push_back(r);
  }
  return rep;
}

}  // namespace peaklab
