#include "peaklab/experiments.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "peaklab/common.hpp"
#include "peaklab/eigsolve.hpp"
#include "peaklab/femrobin.hpp"

namespace peaklab {

std::vector<double> log_spaced(double lo, double hi, int n) {
  require(lo > 0.0 && hi >= lo && n >= 1, "log_spaced: need 0 < lo <= hi and n >= 1");
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    out[static_cast<size_t>(i)] = n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  out.back() = hi;
  return out;
}

int default_threads() {
  if (const char* env = std::getenv("PEAKLAB_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the first
// exception after all workers stop.
template <typename Fn>
void parallel_for(int n, int threads, Fn fn) {
  threads = std::clamp(threads, 1, std::max(1, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<double> SweepResult::alphas() const {
  std::vector<double> out;
  for (const SweepPoint& p : points) out.push_back(p.alpha);
  return out;
}

std::vector<double> SweepResult::lambdas(int j) const {
  std::vector<double> out;
  for (const SweepPoint& p : points) out.push_back(p.lambda[j - 1]);
  return out;
}

SweepResult sweep_alpha(const SweepOptions& o) {
  require(!o.alphas.empty(), "sweep_alpha: empty alpha list");
  for (size_t i = 0; i < o.alphas.size(); ++i) {
    require(o.alphas[i] > 0.0, "sweep_alpha: alpha values must be positive");
    if (i > 0) require(o.alphas[i] > o.alphas[i - 1], "sweep_alpha: alpha values must increase");
  }
  require(o.J >= 1, "sweep_alpha: J must be >= 1");
  require(o.smin_factor > 0.0, "sweep_alpha: smin_factor must be positive");
  require(static_cast<long>(o.ns) * (o.nt + 1) <= o.max_dofs,
          "sweep_alpha: mesh exceeds the dof budget");

  PeakGeometry geometry{o.q, 2, CrossSection::interval(o.length), o.a, 1.0};
  geometry.validate();
  SweepResult result{o, theory_constants(geometry), {}, true};
  result.points.resize(o.alphas.size());

  auto solve = [&](double alpha, double s_min, int k, bool vectors, Mesh2D* keep) {
    Mesh2D mesh = build_peak_mesh(
        {o.q, o.length, o.a, s_min, o.ns, o.nt, o.grading, o.tip, BoundaryTag::dirichlet});
    const SymmetricPencil pencil = assemble(mesh, alpha);
    EigOptions eo;
    eo.k = k;
    eo.tol = o.tol;
    eo.seed = o.seed;
    eo.vectors = vectors;
    eo.method = EigMethod::lanczos;
    Spectrum s = smallest_eigs(pencil, eo);
    if (vectors) s.vectors = [&] {
      Eigen::MatrixXd full(mesh.num_vertices(), s.vectors.cols());
      for (Eigen::Index c = 0; c < s.vectors.cols(); ++c) full.col(c) = pencil.expand(s.vectors.col(c));
      return full;
    }();
    if (keep) *keep = std::move(mesh);
    return std::make_pair(s, static_cast<long>(pencil.dim()));
  };

  parallel_for(static_cast<int>(o.alphas.size()), o.threads, [&](int i) {
    SweepPoint& pt = result.points[static_cast<size_t>(i)];
    pt.alpha = o.alphas[static_cast<size_t>(i)];
    try {
      const double X = std::pow(result.constants.A_omega * pt.alpha, -1.0 / (2.0 - o.q));
      pt.s_min = std::min(1e-3 * o.a, o.smin_factor * X);
      pt.ns = o.ns;
      pt.nt = o.nt;
      auto [spec, dofs] = solve(pt.alpha, pt.s_min, o.J, o.keep_vectors, &pt.mesh);
      pt.dofs = dofs;
      pt.lambda = spec.values;
      pt.residuals = spec.residuals;
      pt.info = spec.info;
      pt.certified = spec.info.inertia_below == o.J;
      if (o.keep_vectors) {
        Eigen::VectorXd u = spec.vectors.col(0);
        Eigen::Index imax = 0;
        u.cwiseAbs().maxCoeff(&imax);
        u /= u[imax];
        pt.u1_min = u.minCoeff();
        pt.sign_flag = pt.u1_min < -1e-8;
        pt.u1 = std::move(u);
      }
      if (o.check_smin) {
        pt.lambda_half_smin = solve(pt.alpha, 0.5 * pt.s_min, 1, false, nullptr).first.values[0];
        pt.smin_sensitivity = std::abs(pt.lambda_half_smin - pt.lambda[0]) / std::abs(pt.lambda[0]);
        pt.smin_flag = pt.smin_sensitivity > 1e-3;
      }
    } catch (const Error& e) {
      throw Error("sweep at alpha = " + std::to_string(pt.alpha) + ": " + e.what());
    }
  });

  for (size_t i = 1; i < result.points.size(); ++i)
    for (int j = 0; j < o.J; ++j)
      if (result.points[i].lambda[j] > result.points[i - 1].lambda[j]) result.monotone = false;
  return result;
}

AsymptoticFit fit_power_law(const std::vector<double>& alphas, const std::vector<double>& lambdas,
                            int window, double remainder_order, double p_theory, double c_theory) {
  require(alphas.size() == lambdas.size(), "fit_power_law: size mismatch");
  const int n = static_cast<int>(alphas.size());
  if (window <= 0) window = n;
  require(window >= 3 && window <= n, "fit_power_law: window must hold at least 3 points");
  const int first = n - window;
  for (int i = first; i < n; ++i) {
    require(lambdas[static_cast<size_t>(i)] < 0.0, "fit_power_law: nonnegative eigenvalue on the window");
    require(alphas[static_cast<size_t>(i)] > 0.0, "fit_power_law: alpha must be positive");
  }

  AsymptoticFit fit;
  fit.window = window;
  fit.p_theory = p_theory;
  fit.c_theory = c_theory;
  Eigen::VectorXd x(window), y(window);
  for (int i = 0; i < window; ++i) {
    x[i] = std::log(alphas[static_cast<size_t>(first + i)]);
    y[i] = std::log(-lambdas[static_cast<size_t>(first + i)]);
  }
  Eigen::MatrixXd design(window, 2);
  design.col(0) = x;
  design.col(1).setOnes();
  const Eigen::Vector2d beta = design.colPivHouseholderQr().solve(y);
  fit.slope = beta[0];
  fit.coefficient = std::exp(beta[1]);
  fit.rms_log_residual = std::sqrt((design * beta - y).squaredNorm() / window);

  for (int i = 0; i + 1 < window; ++i) fit.local_slopes.push_back((y[i + 1] - y[i]) / (x[i + 1] - x[i]));
  const size_t m = fit.local_slopes.size();
  if (m >= 2 && remainder_order > 0.0) {
    // abscissae at the geometric midpoints of each pair
    auto h = [&](int i) { return std::exp(-remainder_order * 0.5 * (x[i] + x[i + 1])); };
    const double h1 = h(static_cast<int>(m) - 2), h2 = h(static_cast<int>(m) - 1);
    const double s1 = fit.local_slopes[m - 2], s2 = fit.local_slopes[m - 1];
    fit.extrapolated_slope = s2 + (s2 - s1) * h2 / (h1 - h2);
  } else {
    fit.extrapolated_slope = fit.local_slopes.back();
  }

  if (p_theory > 0.0) {
    fit.coefficient_fixed_exponent = std::exp((y - p_theory * x).mean());
    fit.slope_rel_error = std::abs(fit.extrapolated_slope - p_theory) / p_theory;
  }
  if (c_theory > 0.0) {
    fit.coefficient_rel_error = std::abs(fit.coefficient - c_theory) / c_theory;
    if (p_theory > 0.0)
      fit.coefficient_fixed_rel_error = std::abs(fit.coefficient_fixed_exponent - c_theory) / c_theory;
  }
  return fit;
}

double agmon_ratio(const Mesh2D& mesh, const Eigen::VectorXd& u, double alpha, double b,
                   bool subdivide) {
  require(u.size() == mesh.num_vertices(), "agmon_ratio: vector must live on all vertices");
  require(b >= 0.0 && alpha > 0.0, "agmon_ratio: need b >= 0 and alpha > 0");
  double max_norm = 0.0;
  for (Eigen::Index v = 0; v < mesh.num_vertices(); ++v) max_norm = std::max(max_norm, mesh.vertices.col(v).norm());
  require(2.0 * b * alpha * max_norm < 700.0,
          "agmon_ratio: exponential weight overflows; use a smaller b");

  // exact int_T u^2 for linear u with vertex values (a, b, c)
  auto mass = [](double area, double a, double bb, double c) {
    return area / 6.0 * (a * a + bb * bb + c * c + a * bb + bb * c + a * c);
  };
  double weighted = 0.0, plain = 0.0;
  for (Eigen::Index t = 0; t < mesh.num_triangles(); ++t) {
    const Eigen::Vector3i tri = mesh.triangles.col(t);
    const Eigen::Vector2d p0 = mesh.vertices.col(tri[0]), p1 = mesh.vertices.col(tri[1]),
                          p2 = mesh.vertices.col(tri[2]);
    const double u0 = u[tri[0]], u1 = u[tri[1]], u2 = u[tri[2]];
    const double area = mesh.signed_area(t);
    if (!subdivide) {
      const double I = mass(area, u0, u1, u2);
      weighted += std::exp(2.0 * b * alpha * ((p0 + p1 + p2) / 3.0).norm()) * I;
      plain += I;
      continue;
    }
    const Eigen::Vector2d m01 = 0.5 * (p0 + p1), m12 = 0.5 * (p1 + p2), m02 = 0.5 * (p0 + p2);
    const double w01 = 0.5 * (u0 + u1), w12 = 0.5 * (u1 + u2), w02 = 0.5 * (u0 + u2);
    const std::array<std::pair<Eigen::Vector2d, std::array<double, 3>>, 4> parts = {{
        {(p0 + m01 + m02) / 3.0, {u0, w01, w02}},
        {(p1 + m01 + m12) / 3.0, {u1, w01, w12}},
        {(p2 + m12 + m02) / 3.0, {u2, w12, w02}},
        {(m01 + m12 + m02) / 3.0, {w01, w12, w02}},
    }};
    for (const auto& [centroid, vals] : parts) {
      const double I = mass(0.25 * area, vals[0], vals[1], vals[2]);
      weighted += std::exp(2.0 * b * alpha * centroid.norm()) * I;
      plain += I;
    }
  }
  require(plain > 0.0, "agmon_ratio: zero function");
  if (b == 0.0) return 1.0;
  return weighted / plain;
}

AgmonReport agmon_report(const SweepResult& sweep, double b) {
  AgmonReport rep;
  rep.b = b;
  for (const SweepPoint& p : sweep.points) {
    require(p.u1.size() == p.mesh.num_vertices() && p.u1.size() > 0,
            "agmon_report: sweep did not retain eigenvectors");
    const double r = agmon_ratio(p.mesh, p.u1, p.alpha, b, false);
    const double rr = agmon_ratio(p.mesh, p.u1, p.alpha, b, true);
    rep.alphas.push_back(p.alpha);
    rep.ratios.push_back(r);
    rep.ratios_refined.push_back(rr);
    rep.refinement_change.push_back(std::abs(rr - r) / r);
  }
  const size_t n = rep.ratios.size();
  if (n > 0) {
    const size_t half = n / 2;
    const auto [lo_it, hi_it] = std::minmax_element(rep.ratios.begin() + static_cast<long>(half), rep.ratios.end());
    rep.max_over_min = *hi_it / *lo_it;
    rep.growth_flag = rep.ratios.back() > 2.0 * rep.ratios[half];
  }
  return rep;
}

WindowReport neumann_window(const WindowOptions& o) {
  require(o.q > 1.0 && o.q < 2.0, "neumann_window: q must lie in (1, 2)");
  require(!o.eps.empty(), "neumann_window: empty eps list");
  require(o.s0 < o.s1, "neumann_window: empty window");
  WindowReport rep;
  for (double eps : o.eps) {
    require(eps > 0.0, "neumann_window: eps must be positive");
    const double upper = o.B * std::pow(eps, -1.0 / (o.q - 1.0));
    require(o.s0 >= o.b && o.s1 <= upper,
            "neumann_window: window (" + std::to_string(o.s0) + ", " + std::to_string(o.s1) +
                ") is not inside (b, B eps^{-1/(q-1)}) = (" + std::to_string(o.b) + ", " +
                std::to_string(upper) + ")");
    const Mesh2D mesh = build_peak_mesh({o.q, eps * o.length, o.s1, o.s0, o.ns, o.nt, 1.0,
                                         BoundaryTag::neumann, BoundaryTag::neumann});
    const SymmetricPencil pencil = assemble(mesh, 1.0);
    EigOptions eo;
    eo.k = 1;
    eo.vectors = false;
    eo.method = EigMethod::lanczos;
    const Spectrum s = smallest_eigs(pencil, eo);
    rep.eps.push_back(eps);
    rep.lambda1.push_back(s.values[0]);
    rep.scaled.push_back(-eps * s.values[0]);
    rep.certificates.push_back(s.info.inertia_below);
  }
  const auto [lo, hi] = std::minmax_element(rep.scaled.begin(), rep.scaled.end());
  rep.c = *hi;
  rep.spread = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
  return rep;
}

CompareReport isoperimetric_compare(const std::vector<CrossSection>& sections, double q,
                                    double lambda_L1_j) {
  require(!sections.empty(), "isoperimetric_compare: no sections");
  const double area = sections.front().area();
  CompareReport rep;
  const double p = exponents(q).p;
  for (const CrossSection& s : sections) {
    require(std::abs(s.area() - area) <= 1e-10 * area, "isoperimetric_compare: areas differ");
    TheoryConstants c;
    c.A_omega = ratio_A(s);
    c.p = p;
    std::string name = s.kind() == SectionKind::ball      ? "ball"
                       : s.kind() == SectionKind::polygon ? "polygon-" + std::to_string(s.vertices().cols())
                                                          : "interval";
    rep.sections.push_back({name, s.area(), c.A_omega, predicted_coefficient(c, lambda_L1_j)});
  }
  for (const SectionCoefficient& s : rep.sections)
    if (s.name == "ball")
      for (const SectionCoefficient& other : rep.sections)
        if (other.name != "ball" && other.coefficient > s.coefficient) rep.consistent = false;
  return rep;
}

}  // namespace peaklab
