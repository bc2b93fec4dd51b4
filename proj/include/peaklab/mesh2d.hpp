#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace peaklab {

enum class BoundaryTag { robin, dirichlet, neumann };

std::string to_string(BoundaryTag tag);
BoundaryTag boundary_tag_from_string(const std::string& name);

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  BoundaryTag tag = BoundaryTag::robin;
};

/// How a structured mesh was produced; refine() regenerates from it.
struct MeshProvenance {
  enum class Kind { peak, rectangle };
  Kind kind = Kind::peak;
  double q = 1.5;
  double length = 1.0;  ///< cross-section length l (peak) or ly (rectangle)
  double a = 1.0;       ///< far end (peak) or lx (rectangle)
  double s_min = 1e-3;
  int ns = 1;
  int nt = 1;
  double grading = 1.0;
  BoundaryTag tip = BoundaryTag::neumann;
  BoundaryTag far = BoundaryTag::dirichlet;
};

/// Conforming P1 triangulation with tagged boundary edges.
struct Mesh2D {
  Eigen::Matrix2Xd vertices;
  Eigen::Matrix3Xi triangles;  ///< counterclockwise
  std::vector<BoundaryEdge> boundary;
  MeshProvenance provenance;

  Eigen::Index num_vertices() const { return vertices.cols(); }
  Eigen::Index num_triangles() const { return triangles.cols(); }

  double signed_area(Eigen::Index t) const;
  double area() const;
  /// Total length of edges carrying `tag`.
  double boundary_length(BoundaryTag tag) const;
};

struct PeakMeshOptions {
  double q = 1.5;
  double length = 1.0;
  double a = 1.0;
  double s_min = 1e-3;
  int ns = 64;
  int nt = 8;
  double grading = 2.0;
  BoundaryTag tip = BoundaryTag::neumann;
  BoundaryTag far = BoundaryTag::dirichlet;
};

/// Maps the structured (s, t) grid on (s_min, a) x (-l/2, l/2) through
/// (s, t) -> (s, s^q t). s-nodes are graded toward s_min with exponent
/// `grading`; each cell is split along its shorter diagonal. Lateral edges
/// are Robin, the two ends carry the requested tags.
Mesh2D build_peak_mesh(const PeakMeshOptions& options);

/// Axis-aligned rectangle (0, lx) x (-ly/2, ly/2); all sides Robin.
Mesh2D build_rectangle_mesh(double lx, double ly, int nx, int ny);

/// Regenerates the mesh with doubled resolution in both directions.
Mesh2D refine(const Mesh2D& mesh);

struct MeshQuality {
  double min_angle_deg = 0.0;
  double max_angle_deg = 0.0;
  double max_aspect = 0.0;
  int small_angle_triangles = 0;  ///< triangles with an angle below 5 degrees
};

MeshQuality mesh_quality(const Mesh2D& mesh);

/// Throws if a triangle is not positively oriented, boundary loops do not
/// close, or interior edges are not shared by exactly two triangles.
void check_mesh(const Mesh2D& mesh);

/// "vertices N triangles M", N lines "x1 x2", M lines "i j k", then one line
/// "i j TAG" per boundary edge.
void write_mesh(std::ostream& out, const Mesh2D& mesh);
Mesh2D read_mesh(std::istream& in);

}  // namespace peaklab
