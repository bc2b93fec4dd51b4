#include "peaklab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "peaklab/common.hpp"
#include "peaklab/experiments.hpp"
#include "peaklab/geometry.hpp"
#include "peaklab/mesh2d.hpp"
#include "peaklab/pullback.hpp"
#include "peaklab/reproduce.hpp"
#include "peaklab/sturm1d.hpp"
#include "peaklab/xsection.hpp"

namespace peaklab {

namespace {

using nlohmann::json;

const std::vector<std::string> kSubcommands = {"lambda1d", "xsection", "mesh",   "sweep",   "fit",
                                               "agmon",    "pullback", "window", "compare", "reproduce"};

std::string usage() {
  std::string u = "usage: peaklab <subcommand> [options]\nsubcommands:";
  for (const std::string& s : kSubcommands) u += " " + s;
  u += "\nrun 'peaklab <subcommand> --help' for options\n";
  return u;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

/// Tabular artifact: header row plus numeric rows.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::string csv() const {
    std::ostringstream s;
    s << std::setprecision(17);
    for (size_t i = 0; i < columns.size(); ++i) s << (i ? "," : "") << columns[i];
    s << "\n";
    for (const auto& r : rows) {
      for (size_t i = 0; i < r.size(); ++i) s << (i ? "," : "") << r[i];
      s << "\n";
    }
    return s.str();
  }
};

struct Outcome {
  std::string report;
  json payload;
  Table table;
  std::string summary;
  bool passed = true;
};

json load_config(const std::string& path, const std::set<std::string>& allowed) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("config " + path + " is not valid JSON: " + e.what());
  }
  require(j.is_object(), "config " + path + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    require(allowed.count(key) > 0, "config " + path + ": unknown key '" + key + "'");
  return j;
}

template <class T>
void read(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

const std::set<std::string> kSweepKeys = {"q",    "length",     "a",          "alphas",   "J",        "ns",
                                          "nt",   "grading",    "smin_factor", "tip",     "check_smin",
                                          "tol",  "max_dofs",   "threads",    "seed"};

SweepOptions sweep_from(const json& j) {
  SweepOptions o;
  read(j, "q", o.q);
  read(j, "length", o.length);
  read(j, "a", o.a);
  read(j, "alphas", o.alphas);
  read(j, "J", o.J);
  read(j, "ns", o.ns);
  read(j, "nt", o.nt);
  read(j, "grading", o.grading);
  read(j, "smin_factor", o.smin_factor);
  if (j.contains("tip")) o.tip = boundary_tag_from_string(j.at("tip").get<std::string>());
  read(j, "check_smin", o.check_smin);
  read(j, "tol", o.tol);
  read(j, "max_dofs", o.max_dofs);
  read(j, "threads", o.threads);
  read(j, "seed", o.seed);
  require(o.max_dofs > 0, "max_dofs must be positive");
  require(o.threads >= 1, "threads must be >= 1");
  return o;
}

json sweep_options_json(const SweepOptions& o) {
  return {{"q", o.q},         {"length", o.length},     {"a", o.a},
          {"alphas", o.alphas}, {"J", o.J},             {"ns", o.ns},
          {"nt", o.nt},       {"grading", o.grading},   {"smin_factor", o.smin_factor},
          {"tip", to_string(o.tip)}, {"check_smin", o.check_smin}, {"tol", o.tol},
          {"max_dofs", o.max_dofs}, {"seed", o.seed}};
}

json solver_json(const SolverInfo& info) {
  return {{"method", info.method},
          {"shift", info.shift},
          {"iterations", info.iterations},
          {"restarts", info.restarts},
          {"inertia_below", info.inertia_below},
          {"certificate_shift", info.certificate_shift}};
}

json sweep_json(const SweepResult& r) {
  json pts = json::array();
  for (const SweepPoint& p : r.points)
    pts.push_back({{"alpha", p.alpha},
                   {"s_min", p.s_min},
                   {"ns", p.ns},
                   {"nt", p.nt},
                   {"dofs", p.dofs},
                   {"lambda", vec(p.lambda)},
                   {"residuals", vec(p.residuals)},
                   {"certified", p.certified},
                   {"lambda_half_smin", p.lambda_half_smin},
                   {"smin_sensitivity", p.smin_sensitivity},
                   {"smin_flag", p.smin_flag},
                   {"u1_min", p.u1_min},
                   {"sign_flag", p.sign_flag},
                   {"solver", solver_json(p.info)}});
  return {{"options", sweep_options_json(r.options)},
          {"A_omega", r.constants.A_omega},
          {"H", r.constants.H},
          {"p", r.constants.p},
          {"remainder_exponent", r.constants.remainder_exponent},
          {"monotone", r.monotone},
          {"points", pts}};
}

Table sweep_table(const SweepResult& r) {
  Table t;
  t.columns = {"alpha", "s_min", "dofs"};
  for (int j = 1; j <= r.options.J; ++j) {
    t.columns.push_back("lambda" + std::to_string(j));
    t.columns.push_back("residual" + std::to_string(j));
  }
  t.columns.insert(t.columns.end(), {"smin_sensitivity", "certified"});
  for (const SweepPoint& p : r.points) {
    std::vector<double> row = {p.alpha, p.s_min, static_cast<double>(p.dofs)};
    for (int j = 0; j < r.options.J; ++j) {
      row.push_back(p.lambda[j]);
      row.push_back(p.residuals[j]);
    }
    row.push_back(p.smin_sensitivity);
    row.push_back(p.certified ? 1.0 : 0.0);
    t.rows.push_back(row);
  }
  return t;
}

json fit_json(const AsymptoticFit& f) {
  return {{"j", f.j},
          {"window", f.window},
          {"slope", f.slope},
          {"coefficient", f.coefficient},
          {"rms_log_residual", f.rms_log_residual},
          {"coefficient_fixed_exponent", f.coefficient_fixed_exponent},
          {"local_slopes", f.local_slopes},
          {"extrapolated_slope", f.extrapolated_slope},
          {"p_theory", f.p_theory},
          {"c_theory", f.c_theory},
          {"slope_rel_error", f.slope_rel_error},
          {"coefficient_rel_error", f.coefficient_rel_error},
          {"coefficient_fixed_rel_error", f.coefficient_fixed_rel_error}};
}

std::string num(double v, int digits = 6) {
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

// ---- subcommands ----------------------------------------------------------

struct Lambda1dArgs {
  double q = 1.5;
  int d = 2;
  int j = 1;
  double tol = 1e-4;
  double a0 = 10.0;
  int n0 = 2000;
};

Outcome cmd_lambda1d(const Lambda1dArgs& a) {
  LadderOptions lo;
  lo.a0 = a.a0;
  lo.n0 = a.n0;
  const LambdaL1Result r = lambda_L1(a.j, a.q, a.d, a.tol, lo);
  Outcome o;
  o.report = "lambda1d";
  json ladder = json::array();
  for (const LadderStep& s : r.ladder) {
    ladder.push_back({{"a", s.a}, {"N", s.N}, {"lambda", s.lambda}});
    o.table.rows.push_back({s.a, static_cast<double>(s.N), s.lambda});
  }
  o.table.columns = {"a", "N", "lambda"};
  o.payload = {{"q", a.q},   {"d", a.d},
               {"j", a.j},   {"tol", a.tol},
               {"H", hardy_constant(a.q, a.d)},
               {"value", r.value},
               {"bracket_width", r.bracket_width},
               {"converged", r.converged},
               {"ladder", ladder}};
  o.passed = r.converged && r.value < 0.0;
  o.summary = "lambda_" + std::to_string(a.j) + "(L_1) = " + num(r.value, 10) + " (bracket " + num(r.bracket_width, 3) +
              (r.converged ? ", converged)" : ", NOT converged)");
  return o;
}

struct XsectionArgs {
  double length = 1.0;
  double alpha = 1.0;
  int k = 3;
  double ly = 0.0;
};

Outcome cmd_xsection(const XsectionArgs& a) {
  Outcome o;
  o.report = "xsection";
  const Spectrum s = robin_interval_eigs({a.length, a.alpha}, a.k);
  o.table.columns = {"index", "lambda"};
  for (int i = 0; i < s.size(); ++i) o.table.rows.push_back({static_cast<double>(i + 1), s.values[i]});
  o.payload = {{"length", a.length}, {"alpha", a.alpha}, {"eigenvalues", vec(s.values)}};
  o.summary = "interval l=" + num(a.length) + " alpha=" + num(a.alpha) + ": lambda_1 = " + num(s.values[0], 12);
  if (a.ly > 0.0) {
    const double r = robin_rectangle_eig1(a.length, a.ly, a.alpha);
    o.payload["rectangle_ly"] = a.ly;
    o.payload["rectangle_lambda1"] = r;
    o.summary += "; rectangle " + num(a.length) + "x" + num(a.ly) + ": lambda_1 = " + num(r, 12);
  }
  return o;
}

struct MeshArgs {
  double q = 1.5;
  double length = 1.0;
  double a = 1.0;
  double s_min = 1e-3;
  int ns = 64;
  int nt = 8;
  double grading = 2.0;
  std::string tip = "neumann";
  std::string far = "dirichlet";
  std::vector<double> rectangle;
  std::string mesh_out;
};

Outcome cmd_mesh(MeshArgs a, const std::string& prefix) {
  if (a.mesh_out.empty() && !prefix.empty()) a.mesh_out = prefix + ".mesh";
  Mesh2D mesh;
  if (!a.rectangle.empty()) {
    require(a.rectangle.size() == 2, "--rectangle takes lx ly");
    mesh = build_rectangle_mesh(a.rectangle[0], a.rectangle[1], a.ns, a.nt);
  } else {
    PeakMeshOptions po;
    po.q = a.q;
    po.length = a.length;
    po.a = a.a;
    po.s_min = a.s_min;
    po.ns = a.ns;
    po.nt = a.nt;
    po.grading = a.grading;
    po.tip = boundary_tag_from_string(a.tip);
    po.far = boundary_tag_from_string(a.far);
    mesh = build_peak_mesh(po);
  }
  check_mesh(mesh);
  if (!a.mesh_out.empty()) {
    std::ofstream f(a.mesh_out);
    require(static_cast<bool>(f), "cannot write " + a.mesh_out);
    write_mesh(f, mesh);
  }
  const MeshQuality q = mesh_quality(mesh);
  Outcome o;
  o.report = "mesh";
  o.payload = {{"vertices", mesh.num_vertices()},
               {"triangles", mesh.num_triangles()},
               {"area", mesh.area()},
               {"robin_length", mesh.boundary_length(BoundaryTag::robin)},
               {"min_angle_deg", q.min_angle_deg},
               {"max_angle_deg", q.max_angle_deg},
               {"max_aspect", q.max_aspect},
               {"small_angle_triangles", q.small_angle_triangles}};
  o.table.columns = {"vertices", "triangles", "area", "min_angle_deg", "max_angle_deg", "max_aspect"};
  o.table.rows.push_back({static_cast<double>(mesh.num_vertices()), static_cast<double>(mesh.num_triangles()),
                          mesh.area(), q.min_angle_deg, q.max_angle_deg, q.max_aspect});
  o.summary = std::to_string(mesh.num_vertices()) + " vertices, " + std::to_string(mesh.num_triangles()) +
              " triangles, min angle " + num(q.min_angle_deg, 4) + " deg";
  return o;
}

Outcome cmd_sweep(const json& cfg) {
  const SweepResult r = sweep_alpha(sweep_from(cfg));
  Outcome o;
  o.report = "sweep";
  o.payload = sweep_json(r);
  o.table = sweep_table(r);
  const bool certified = std::all_of(r.points.begin(), r.points.end(), [](const SweepPoint& p) { return p.certified; });
  const long flagged = std::count_if(r.points.begin(), r.points.end(), [](const SweepPoint& p) { return p.smin_flag; });
  o.passed = r.monotone && certified;
  o.summary = std::to_string(r.points.size()) + " alphas, monotone " + (r.monotone ? "yes" : "no") + ", certified " +
              (certified ? "yes" : "no") + ", s_min flags " + std::to_string(flagged) + ", lambda_1(alpha_max) = " +
              num(r.points.back().lambda[0], 10);
  return o;
}

Outcome cmd_fit(const json& cfg) {
  std::vector<double> alphas, lambdas;
  double q = 1.5, c_theory = 0.0;
  int window = 0, j = 1;
  read(cfg, "alphas", alphas);
  read(cfg, "lambdas", lambdas);
  read(cfg, "q", q);
  read(cfg, "window", window);
  read(cfg, "j", j);
  read(cfg, "c_theory", c_theory);
  json sweep_payload;
  if (alphas.empty()) {
    const json sc = cfg.value("sweep", json::object());
    for (const auto& [key, value] : sc.items()) require(kSweepKeys.count(key) > 0, "fit: unknown sweep key '" + key + "'");
    SweepOptions so = sweep_from(sc);
    so.q = q;
    so.J = std::max(so.J, j);
    const SweepResult r = sweep_alpha(so);
    alphas = r.alphas();
    lambdas = r.lambdas(j);
    if (!cfg.contains("c_theory")) c_theory = std::abs(predicted_coefficient(r.constants, lambda_L1(j, q, 2, 1e-4).value));
    if (window == 0) window = static_cast<int>(alphas.size()) / 2;
    sweep_payload = sweep_json(r);
  }
  require(alphas.size() == lambdas.size(), "fit: alphas and lambdas differ in length");
  const AsymptoticFit f = fit_power_law(alphas, lambdas, window, q - 1.0, exponents(q).p, c_theory);
  Outcome o;
  o.report = "fit";
  o.payload = fit_json(f);
  o.payload["j"] = j;
  o.payload["alphas"] = alphas;
  o.payload["lambdas"] = lambdas;
  if (!sweep_payload.is_null()) o.payload["sweep"] = sweep_payload;
  o.table.columns = {"alpha", "lambda", "local_slope"};
  for (size_t i = 0; i < alphas.size(); ++i)
    o.table.rows.push_back({alphas[i], lambdas[i], i == 0 ? std::nan("") : f.local_slopes[i - 1]});
  o.summary = "slope " + num(f.slope, 8) + " (extrapolated " + num(f.extrapolated_slope, 8) + ", theory " +
              num(f.p_theory) + "), coefficient " + num(f.coefficient, 8);
  if (c_theory > 0.0) o.summary += " (theory " + num(c_theory, 8) + ")";
  return o;
}

Outcome cmd_agmon(const json& cfg) {
  std::vector<double> bs = {0.0, 0.05, 0.1, 0.2};
  read(cfg, "b", bs);
  json sc = cfg;
  sc.erase("b");
  SweepOptions so = sweep_from(sc);
  so.keep_vectors = true;
  const SweepResult r = sweep_alpha(so);
  Outcome o;
  o.report = "agmon";
  json reports = json::array();
  o.table.columns = {"b", "alpha", "ratio", "ratio_refined"};
  std::string summary;
  bool ok = true;
  for (double b : bs) {
    const AgmonReport a = agmon_report(r, b);
    reports.push_back({{"b", b},
                       {"alphas", a.alphas},
                       {"ratios", a.ratios},
                       {"ratios_refined", a.ratios_refined},
                       {"refinement_change", a.refinement_change},
                       {"growth_flag", a.growth_flag},
                       {"max_over_min", a.max_over_min}});
    for (size_t i = 0; i < a.ratios.size(); ++i) o.table.rows.push_back({b, a.alphas[i], a.ratios[i], a.ratios_refined[i]});
    for (double v : a.ratios) ok = ok && v >= 1.0 && (b != 0.0 || v == 1.0);
    summary += (summary.empty() ? "" : "; ") + std::string("b=") + num(b) + " max/min " + num(a.max_over_min, 6) +
               (a.growth_flag ? " (growth)" : "");
  }
  o.payload = {{"sweep", sweep_json(r)}, {"reports", reports}};
  o.passed = ok;
  o.summary = summary;
  return o;
}

struct PullbackArgs {
  int d = 3;
  int trials = 20;
  std::uint64_t seed = 20240611;
  std::vector<double> qs = {1.2, 1.5};
  std::vector<double> eps = {0.1, 0.5};
  double s0 = 0.5;
  double s1 = 1.5;
  double budget = 1e-8;
};

json sandwich_json(const Sandwich& s) {
  return {{"lower", s.lower},
          {"middle", s.middle},
          {"upper", s.upper},
          {"margin_lower", s.margin_lower},
          {"margin_upper", s.margin_upper},
          {"quadrature_error", s.quadrature_error},
          {"holds", s.holds},
          {"strict", s.strict}};
}

Outcome cmd_pullback(const PullbackArgs& a) {
  const PullbackCampaign c = pullback_campaign(a.d, a.trials, a.seed, a.qs, a.eps, a.s0, a.s1, a.budget);
  Outcome o;
  o.report = "pullback";
  json recs = json::array();
  o.table.columns = {"q", "eps", "boundary_margin_lower", "boundary_margin_upper", "gradient_margin_lower",
                     "gradient_margin_upper", "quadrature_points"};
  for (const CampaignRecord& r : c.records) {
    recs.push_back({{"q", r.q},
                    {"eps", r.eps},
                    {"boundary", sandwich_json(r.result.boundary)},
                    {"gradient", sandwich_json(r.result.gradient)},
                    {"quadrature_points", r.result.quadrature_points}});
    o.table.rows.push_back({r.q, r.eps, r.result.boundary.margin_lower, r.result.boundary.margin_upper,
                            r.result.gradient.margin_lower, r.result.gradient.margin_upper,
                            static_cast<double>(r.result.quadrature_points)});
  }
  o.payload = {{"d", c.d},       {"trials", c.trials}, {"held", c.held},  {"strict", c.strict},
               {"min_margin", c.min_margin}, {"seed", a.seed}, {"budget", a.budget}, {"records", recs}};
  o.passed = c.held == c.trials;
  o.summary = "d=" + std::to_string(c.d) + ": " + std::to_string(c.held) + "/" + std::to_string(c.trials) + " hold, " +
              std::to_string(c.strict) + " strict, min margin " + num(c.min_margin, 4);
  return o;
}

Outcome cmd_window(const json& cfg) {
  WindowOptions w;
  read(cfg, "q", w.q);
  read(cfg, "length", w.length);
  read(cfg, "eps", w.eps);
  read(cfg, "s0", w.s0);
  read(cfg, "s1", w.s1);
  read(cfg, "b", w.b);
  read(cfg, "B", w.B);
  read(cfg, "ns", w.ns);
  read(cfg, "nt", w.nt);
  const WindowReport r = neumann_window(w);
  Outcome o;
  o.report = "window";
  o.payload = {{"q", w.q},        {"length", w.length},   {"s0", w.s0},     {"s1", w.s1},
               {"eps", r.eps},    {"lambda1", r.lambda1}, {"scaled", r.scaled},
               {"certificates", r.certificates}, {"c", r.c}, {"spread", r.spread}};
  o.table.columns = {"eps", "lambda1", "minus_eps_lambda1"};
  for (size_t i = 0; i < r.eps.size(); ++i) o.table.rows.push_back({r.eps[i], r.lambda1[i], r.scaled[i]});
  const bool negative = std::all_of(r.lambda1.begin(), r.lambda1.end(), [](double l) { return l < 0.0; });
  o.passed = negative && r.spread <= acceptance::window_spread;
  o.summary = "c = " + num(r.c, 6) + ", spread " + num(r.spread, 6);
  return o;
}

CrossSection section_from(const json& s, std::mt19937_64& rng) {
  const std::string type = s.at("type").get<std::string>();
  if (type == "ball") return CrossSection::ball(s.at("radius").get<double>(), s.value("dim", 2));
  if (type == "interval") return CrossSection::interval(s.at("length").get<double>());
  if (type == "polygon") {
    const auto pts = s.at("vertices").get<std::vector<std::vector<double>>>();
    Eigen::Matrix2Xd V(2, static_cast<Eigen::Index>(pts.size()));
    for (size_t i = 0; i < pts.size(); ++i) {
      require(pts[i].size() == 2, "polygon vertices must be [x, y] pairs");
      V.col(static_cast<Eigen::Index>(i)) << pts[i][0], pts[i][1];
    }
    return CrossSection::polygon(V);
  }
  if (type == "random_polygon") return random_convex_polygon(s.value("vertices", 5), rng);
  throw Error("unknown section type '" + type + "'");
}

Outcome cmd_compare(const json& cfg) {
  double q = 1.5;
  int j = 1;
  std::uint64_t seed = 20240611;
  read(cfg, "q", q);
  read(cfg, "j", j);
  read(cfg, "seed", seed);
  std::mt19937_64 rng(seed);
  json list = cfg.value("sections", json::array({{{"name", "disk"}, {"type", "ball"}, {"radius", 1.0 / std::sqrt(M_PI)}},
                                                 {{"name", "square"},
                                                  {"type", "polygon"},
                                                  {"vertices", {{0, 0}, {1, 0}, {1, 1}, {0, 1}}}},
                                                 {{"name", "pentagon"}, {"type", "random_polygon"}, {"vertices", 5}}}));
  std::vector<CrossSection> sections;
  std::vector<std::string> names;
  for (const json& s : list) {
    sections.push_back(section_from(s, rng));
    names.push_back(s.value("name", s.at("type").get<std::string>()));
  }
  require(!sections.empty(), "compare: no sections");
  const int d = sections.front().dim() + 1;
  double lambda = 0.0;
  if (cfg.contains("lambda_L1"))
    lambda = cfg.at("lambda_L1").get<double>();
  else
    lambda = lambda_L1(j, q, d, 1e-4).value;
  CompareReport r = isoperimetric_compare(sections, q, lambda);
  Outcome o;
  o.report = "compare";
  json secs = json::array();
  o.table.columns = {"index", "area", "A_omega", "coefficient"};
  for (size_t i = 0; i < r.sections.size(); ++i) {
    secs.push_back({{"name", names[i]},
                    {"area", r.sections[i].area},
                    {"A_omega", r.sections[i].A_omega},
                    {"coefficient", r.sections[i].coefficient}});
    o.table.rows.push_back({static_cast<double>(i), r.sections[i].area, r.sections[i].A_omega, r.sections[i].coefficient});
  }
  o.payload = {{"q", q}, {"d", d}, {"j", j}, {"lambda_L1", lambda}, {"sections", secs}, {"consistent", r.consistent}};
  o.passed = r.consistent;
  o.summary = std::string("ball coefficient least negative: ") + (r.consistent ? "yes" : "no");
  for (size_t i = 0; i < r.sections.size(); ++i) o.summary += "; " + names[i] + " " + num(r.sections[i].coefficient, 6);
  return o;
}

Outcome cmd_reproduce(const std::vector<int>& only, int threads, std::uint64_t seed, std::ostream& out) {
  AcceptanceOptions ao;
  ao.only = only;
  ao.threads = threads;
  ao.seed = seed;
  const AcceptanceReport rep = run_acceptance(ao);
  Outcome o;
  o.report = "reproduce";
  json crit = json::array();
  o.table.columns = {"criterion", "passed", "seconds"};
  int passed = 0;
  for (const CriterionResult& c : rep.criteria) {
    out << format_line(c) << "\n";
    json metrics = json::object();
    for (const auto& [k, v] : c.metrics) metrics[k] = v;
    crit.push_back({{"id", c.id}, {"title", c.title}, {"passed", c.passed}, {"summary", c.summary}, {"metrics", metrics}});
    o.table.rows.push_back({static_cast<double>(c.id), c.passed ? 1.0 : 0.0, c.seconds});
    passed += c.passed ? 1 : 0;
  }
  o.payload = {{"criteria", crit}, {"seed", seed}};
  o.passed = rep.all_passed();
  o.summary = std::to_string(passed) + "/" + std::to_string(rep.criteria.size()) + " criteria passed";
  return o;
}

void write_outputs(const Outcome& o, const std::string& prefix) {
  if (prefix.empty()) return;
  json doc = {{"report", o.report},
              {"csv_columns", o.table.columns},
              {"passed", o.passed},
              {"payload", o.payload},
              {"metadata", {{"timestamp", timestamp()}, {"program", "peaklab"}}}};
  std::ofstream j(prefix + ".json");
  require(static_cast<bool>(j), "cannot write " + prefix + ".json");
  j << doc.dump(2) << "\n";
  std::ofstream c(prefix + ".csv");
  require(static_cast<bool>(c), "cannot write " + prefix + ".csv");
  c << o.table.csv();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.size() < 2) {
    err << usage();
    return 2;
  }
  const std::string& sub = args[1];
  if (sub == "-h" || sub == "--help") {
    out << usage();
    return 0;
  }
  if (std::find(kSubcommands.begin(), kSubcommands.end(), sub) == kSubcommands.end()) {
    err << "unknown subcommand '" << sub << "'\n" << usage();
    return 2;
  }

  CLI::App app{"peaklab " + sub};
  std::string config, prefix;
  int threads = default_threads();
  std::uint64_t seed = 20240611;
  app.add_option("--out", prefix, "Write <prefix>.json and <prefix>.csv");

  Lambda1dArgs l1;
  XsectionArgs xs;
  MeshArgs me;
  PullbackArgs pb;
  std::vector<int> only;

  if (sub == "lambda1d") {
    app.add_option("--q", l1.q);
    app.add_option("--d", l1.d);
    app.add_option("--j", l1.j);
    app.add_option("--tol", l1.tol);
    app.add_option("--a0", l1.a0);
    app.add_option("--n0", l1.n0);
  } else if (sub == "xsection") {
    app.add_option("--length", xs.length);
    app.add_option("--alpha", xs.alpha);
    app.add_option("--k", xs.k);
    app.add_option("--rectangle-ly", xs.ly, "Also report the rectangle length x ly");
  } else if (sub == "mesh") {
    app.add_option("--q", me.q);
    app.add_option("--length", me.length);
    app.add_option("--a", me.a);
    app.add_option("--smin", me.s_min);
    app.add_option("--ns", me.ns);
    app.add_option("--nt", me.nt);
    app.add_option("--grading", me.grading);
    app.add_option("--tip", me.tip);
    app.add_option("--far", me.far);
    app.add_option("--rectangle", me.rectangle, "lx ly: build a Robin rectangle instead")->expected(2);
    app.add_option("--mesh-out", me.mesh_out, "Mesh file (default <out>.mesh)");
  } else if (sub == "pullback") {
    app.add_option("--d", pb.d);
    app.add_option("--trials", pb.trials);
    app.add_option("--seed", pb.seed);
    app.add_option("--q", pb.qs);
    app.add_option("--eps", pb.eps);
    app.add_option("--s0", pb.s0);
    app.add_option("--s1", pb.s1);
    app.add_option("--budget", pb.budget);
  } else if (sub == "reproduce") {
    app.add_option("--only", only, "Criteria to run");
    app.add_option("--threads", threads);
    app.add_option("--seed", seed);
  } else {
    app.add_option("--config", config, "JSON config file");
    app.add_option("--threads", threads);
  }

  std::vector<const char*> argv;
  argv.push_back(args[0].c_str());
  for (size_t i = 2; i < args.size(); ++i) argv.push_back(args[i].c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << json{{"error", e.what()}, {"subcommand", sub}}.dump() << "\n";
    return 1;
  }

  try {
    require(threads >= 1, "threads must be >= 1");
    Outcome o;
    if (sub == "lambda1d") {
      o = cmd_lambda1d(l1);
    } else if (sub == "xsection") {
      o = cmd_xsection(xs);
    } else if (sub == "mesh") {
      o = cmd_mesh(me, prefix);
    } else if (sub == "pullback") {
      o = cmd_pullback(pb);
    } else if (sub == "reproduce") {
      o = cmd_reproduce(only, threads, seed, out);
    } else {
      std::set<std::string> keys = kSweepKeys;
      if (sub == "fit") keys = {"alphas", "lambdas", "q", "window", "j", "c_theory", "sweep"};
      if (sub == "agmon") keys.insert("b");
      if (sub == "window") keys = {"q", "length", "eps", "s0", "s1", "b", "B", "ns", "nt"};
      if (sub == "compare") keys = {"q", "j", "seed", "sections", "lambda_L1"};
      json cfg = load_config(config, keys);
      if ((sub == "sweep" || sub == "agmon") && !cfg.contains("threads")) cfg["threads"] = threads;
      if (sub == "sweep") o = cmd_sweep(cfg);
      if (sub == "fit") o = cmd_fit(cfg);
      if (sub == "agmon") o = cmd_agmon(cfg);
      if (sub == "window") o = cmd_window(cfg);
      if (sub == "compare") o = cmd_compare(cfg);
    }
    write_outputs(o, prefix);
    out << sub << ": " << o.summary << "\n";
    return o.passed ? 0 : 1;
  } catch (const std::exception& e) {
    err << json{{"error", e.what()}, {"subcommand", sub}}.dump() << "\n";
    return 1;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace peaklab
