#include "peaklab/mesh2d.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "peaklab/common.hpp"

namespace peaklab {

std::string to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::robin: return "ROBIN";
    case BoundaryTag::dirichlet: return "DIRICHLET";
    case BoundaryTag::neumann: return "NEUMANN";
  }
  return "UNKNOWN";
}

BoundaryTag boundary_tag_from_string(const std::string& name) {
  std::string upper = name;
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "ROBIN") return BoundaryTag::robin;
  if (upper == "DIRICHLET") return BoundaryTag::dirichlet;
  if (upper == "NEUMANN") return BoundaryTag::neumann;
  throw Error("unknown boundary tag '" + name + "'");
}

double Mesh2D::signed_area(Eigen::Index t) const {
  const Eigen::Vector2d p0 = vertices.col(triangles(0, t));
  const Eigen::Vector2d e1 = vertices.col(triangles(1, t)) - p0;
  const Eigen::Vector2d e2 = vertices.col(triangles(2, t)) - p0;
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

double Mesh2D::area() const {
  double total = 0.0;
  for (Eigen::Index t = 0; t < num_triangles(); ++t) total += signed_area(t);
  return total;
}

double Mesh2D::boundary_length(BoundaryTag tag) const {
  double total = 0.0;
  for (const BoundaryEdge& e : boundary)
    if (e.tag == tag) total += (vertices.col(e.b) - vertices.col(e.a)).norm();
  return total;
}

namespace {

using MapFn = std::function<Eigen::Vector2d(double, double)>;

// Structured grid over s-values x t-values, mapped by `map`. Vertex (i, j)
// has index i * (t.size()) + j.
Mesh2D structured_mesh(const Eigen::VectorXd& s, const Eigen::VectorXd& t, const MapFn& map,
                       BoundaryTag bottom, BoundaryTag right, BoundaryTag top,
                       BoundaryTag left) {
  const int ns = static_cast<int>(s.size()) - 1;
  const int nt = static_cast<int>(t.size()) - 1;
  auto idx = [nt](int i, int j) { return i * (nt + 1) + j; };

  Mesh2D m;
  m.vertices.resize(2, (ns + 1) * (nt + 1));
  for (int i = 0; i <= ns; ++i)
    for (int j = 0; j <= nt; ++j) m.vertices.col(idx(i, j)) = map(s[i], t[j]);

  m.triangles.resize(3, 2 * ns * nt);
  int k = 0;
  for (int i = 0; i < ns; ++i) {
    for (int j = 0; j < nt; ++j) {
      const int p00 = idx(i, j), p10 = idx(i + 1, j), p01 = idx(i, j + 1), p11 = idx(i + 1, j + 1);
      const double d1 = (m.vertices.col(p11) - m.vertices.col(p00)).squaredNorm();
      const double d2 = (m.vertices.col(p01) - m.vertices.col(p10)).squaredNorm();
      if (d1 <= d2) {
        m.triangles.col(k++) << p00, p10, p11;
        m.triangles.col(k++) << p00, p11, p01;
      } else {
        m.triangles.col(k++) << p00, p10, p01;
        m.triangles.col(k++) << p10, p11, p01;
      }
    }
  }

  for (int i = 0; i < ns; ++i) m.boundary.push_back({idx(i, 0), idx(i + 1, 0), bottom});
  for (int j = 0; j < nt; ++j) m.boundary.push_back({idx(ns, j), idx(ns, j + 1), right});
  for (int i = ns; i > 0; --i) m.boundary.push_back({idx(i, nt), idx(i - 1, nt), top});
  for (int j = nt; j > 0; --j) m.boundary.push_back({idx(0, j), idx(0, j - 1), left});

  for (Eigen::Index tri = 0; tri < m.num_triangles(); ++tri)
    if (!(m.signed_area(tri) > 0.0)) throw Error("degenerate cell in structured mesh");
  return m;
}

// Symmetric nodes on (-l/2, l/2): t_j = (2j - n) l / (2n).
Eigen::VectorXd symmetric_nodes(double l, int n) {
  Eigen::VectorXd t(n + 1);
  for (int j = 0; j <= n; ++j) t[j] = (2.0 * j - n) * l / (2.0 * n);
  t[0] = -0.5 * l;
  t[n] = 0.5 * l;
  return t;
}

}  // namespace

Mesh2D build_peak_mesh(const PeakMeshOptions& o) {
  require(o.q > 0.0, "build_peak_mesh: q must be positive");
  require(o.length > 0.0, "build_peak_mesh: cross-section length must be positive");
  require(o.s_min > 0.0, "build_peak_mesh: s_min must be positive (the tip itself is excluded)");
  require(o.s_min < o.a, "build_peak_mesh: need s_min < a");
  require(o.ns >= 1 && o.nt >= 1, "build_peak_mesh: ns, nt must be >= 1");
  require(o.grading >= 1.0, "build_peak_mesh: grading must be >= 1");
  require(o.tip != BoundaryTag::robin && o.far != BoundaryTag::robin,
          "build_peak_mesh: end conditions must be Dirichlet or Neumann");

  Eigen::VectorXd s(o.ns + 1);
  for (int i = 0; i <= o.ns; ++i)
    s[i] = o.s_min + (o.a - o.s_min) * std::pow(static_cast<double>(i) / o.ns, o.grading);
  s[0] = o.s_min;
  s[o.ns] = o.a;
  for (int i = 0; i < o.ns; ++i)
    require(s[i + 1] > s[i], "build_peak_mesh: degenerate cells (s-nodes coincide)");

  const double q = o.q;
  Mesh2D m = structured_mesh(
      s, symmetric_nodes(o.length, o.nt),
      [q](double si, double tj) { return Eigen::Vector2d(si, std::pow(si, q) * tj); },
      BoundaryTag::robin, o.far, BoundaryTag::robin, o.tip);
  m.provenance = {MeshProvenance::Kind::peak, o.q, o.length, o.a, o.s_min, o.ns, o.nt,
                  o.grading, o.tip, o.far};
  return m;
}

Mesh2D build_rectangle_mesh(double lx, double ly, int nx, int ny) {
  require(lx > 0.0 && ly > 0.0, "build_rectangle_mesh: side lengths must be positive");
  require(nx >= 1 && ny >= 1, "build_rectangle_mesh: nx, ny must be >= 1");
  Eigen::VectorXd s = Eigen::VectorXd::LinSpaced(nx + 1, 0.0, lx);
  s[nx] = lx;
  Mesh2D m = structured_mesh(
      s, symmetric_nodes(ly, ny), [](double x, double y) { return Eigen::Vector2d(x, y); },
      BoundaryTag::robin, BoundaryTag::robin, BoundaryTag::robin, BoundaryTag::robin);
  m.provenance.kind = MeshProvenance::Kind::rectangle;
  m.provenance.q = 0.0;
  m.provenance.length = ly;
  m.provenance.a = lx;
  m.provenance.s_min = 0.0;
  m.provenance.ns = nx;
  m.provenance.nt = ny;
  m.provenance.grading = 1.0;
  m.provenance.tip = BoundaryTag::robin;
  m.provenance.far = BoundaryTag::robin;
  return m;
}

Mesh2D refine(const Mesh2D& mesh) {
  const MeshProvenance& p = mesh.provenance;
  if (p.kind == MeshProvenance::Kind::rectangle)
    return build_rectangle_mesh(p.a, p.length, 2 * p.ns, 2 * p.nt);
  return build_peak_mesh({p.q, p.length, p.a, p.s_min, 2 * p.ns, 2 * p.nt, p.grading, p.tip, p.far});
}

MeshQuality mesh_quality(const Mesh2D& mesh) {
  MeshQuality q;
  q.min_angle_deg = 180.0;
  for (Eigen::Index t = 0; t < mesh.num_triangles(); ++t) {
    std::array<Eigen::Vector2d, 3> p;
    for (int k = 0; k < 3; ++k) p[k] = mesh.vertices.col(mesh.triangles(k, t));
    double longest = 0.0;
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector2d u = p[(k + 1) % 3] - p[k];
      const Eigen::Vector2d v = p[(k + 2) % 3] - p[k];
      const double angle =
          std::atan2(std::abs(u.x() * v.y() - u.y() * v.x()), u.dot(v)) * 180.0 / std::numbers::pi;
      q.min_angle_deg = std::min(q.min_angle_deg, angle);
      q.max_angle_deg = std::max(q.max_angle_deg, angle);
      longest = std::max(longest, u.norm());
    }
    const double area = mesh.signed_area(t);
    // longest edge over the height onto it
    q.max_aspect = std::max(q.max_aspect, longest * longest / (2.0 * area));
    double smallest = 180.0;
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector2d u = p[(k + 1) % 3] - p[k];
      const Eigen::Vector2d v = p[(k + 2) % 3] - p[k];
      smallest = std::min(smallest, std::atan2(std::abs(u.x() * v.y() - u.y() * v.x()), u.dot(v)) *
                                        180.0 / std::numbers::pi);
    }
    if (smallest < 5.0) ++q.small_angle_triangles;
  }
  return q;
}

void check_mesh(const Mesh2D& mesh) {
  const Eigen::Index nv = mesh.num_vertices();
  std::map<std::pair<int, int>, int> edge_count;
  for (Eigen::Index t = 0; t < mesh.num_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const int i = mesh.triangles(k, t);
      require(i >= 0 && i < nv, "check_mesh: triangle references a missing vertex");
    }
    require(mesh.signed_area(t) > 0.0,
            "check_mesh: triangle " + std::to_string(t) + " is not positively oriented");
    for (int k = 0; k < 3; ++k) {
      int i = mesh.triangles(k, t), j = mesh.triangles((k + 1) % 3, t);
      if (i > j) std::swap(i, j);
      ++edge_count[{i, j}];
    }
  }
  std::map<std::pair<int, int>, int> boundary_set;
  std::vector<int> degree(static_cast<size_t>(nv), 0);
  for (const BoundaryEdge& e : mesh.boundary) {
    ++boundary_set[{std::min(e.a, e.b), std::max(e.a, e.b)}];
    ++degree[static_cast<size_t>(e.a)];
    ++degree[static_cast<size_t>(e.b)];
  }
  for (const auto& [edge, count] : edge_count) {
    require(count <= 2, "check_mesh: edge shared by more than two triangles");
    const bool on_boundary = boundary_set.count(edge) > 0;
    require((count == 1) == on_boundary, "check_mesh: boundary edges do not match the mesh");
  }
  for (const auto& [edge, count] : boundary_set) {
    require(count == 1, "check_mesh: duplicated boundary edge");
    require(edge_count.count(edge) > 0, "check_mesh: boundary edge not in any triangle");
  }
  for (int d : degree) require(d == 0 || d == 2, "check_mesh: boundary loops are not closed");
}

void write_mesh(std::ostream& out, const Mesh2D& mesh) {
  out << "vertices " << mesh.num_vertices() << " triangles " << mesh.num_triangles() << '\n';
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < mesh.num_vertices(); ++i)
    out << mesh.vertices(0, i) << ' ' << mesh.vertices(1, i) << '\n';
  for (Eigen::Index t = 0; t < mesh.num_triangles(); ++t)
    out << mesh.triangles(0, t) << ' ' << mesh.triangles(1, t) << ' ' << mesh.triangles(2, t)
        << '\n';
  for (const BoundaryEdge& e : mesh.boundary) out << e.a << ' ' << e.b << ' ' << to_string(e.tag) << '\n';
}

Mesh2D read_mesh(std::istream& in) {
  std::string w1, w2;
  Eigen::Index nv = 0, nt = 0;
  require(static_cast<bool>(in >> w1 >> nv >> w2 >> nt) && w1 == "vertices" && w2 == "triangles",
          "read_mesh: bad header");
  Mesh2D m;
  m.vertices.resize(2, nv);
  m.triangles.resize(3, nt);
  for (Eigen::Index i = 0; i < nv; ++i)
    require(static_cast<bool>(in >> m.vertices(0, i) >> m.vertices(1, i)), "read_mesh: bad vertex");
  for (Eigen::Index t = 0; t < nt; ++t)
    require(static_cast<bool>(in >> m.triangles(0, t) >> m.triangles(1, t) >> m.triangles(2, t)),
            "read_mesh: bad triangle");
  int a = 0, b = 0;
  std::string tag;
  while (in >> a >> b >> tag) m.boundary.push_back({a, b, boundary_tag_from_string(tag)});
  return m;
}

}  // namespace peaklab
