// Structured triangulations of the unit square, hierarchical refinement and
// vertex classification relative to a sign-changing interface.
#ifndef SIGNLOD_MESH_HPP
#define SIGNLOD_MESH_HPP

#include <array>
#include <ostream>
#include <vector>

namespace signlod {

enum class MeshPattern { crisscross, ne_diagonal };

using Point2 = std::array<double, 2>;

struct Triangulation {
  int level = 0;
  MeshPattern pattern = MeshPattern::crisscross;

  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> elements; // positively oriented vertex triples
  std::vector<char> boundary_vertex;
  std::vector<std::array<int, 3>> element_neighbors; // shared-edge adjacency, -1 at boundary

  // filled by refine(): ancestor element on the coarse mesh, and a flag per
  // fine vertex lying on a coarse element edge
  std::vector<int> parent_map;
  std::vector<char> vertex_on_coarse_edge;

  // vertex -> incident elements, CSR layout
  std::vector<int> vertex_elem_ptr;
  std::vector<int> vertex_elem;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_elements() const { return static_cast<int>(elements.size()); }

  double element_area(int e) const;
  Point2 barycenter(int e) const;
  double element_diameter(int e) const;
  double element_inradius(int e) const;

  /// Barycentric coordinates of p with respect to element e.
  std::array<double, 3> barycentric(int e, const Point2& p) const;

  /// Closed-form point location on the structured block meshes.
  int locate(const Point2& p) const;

  std::vector<int> incident_elements(int vertex) const;

  /// Plain-text export: one `v x y` line per vertex, one `e i j k` line per
  /// element, zero-based indices.
  void export_text(std::ostream& os) const;
};

/// Criss-cross (or single-diagonal) block mesh of [0,1]^2 with 2^level x
/// 2^level blocks. Throws for level < 1 or level > 12.
Triangulation build_block_mesh(int level, MeshPattern pattern = MeshPattern::crisscross);

/// Same-pattern mesh extra_levels finer, with parent_map into `coarse` and
/// vertex_on_coarse_edge flags filled.
Triangulation refine(const Triangulation& coarse, int extra_levels);

struct InterfaceGeometry {
  enum class Kind { flat_horizontal, axis_aligned_rectangle, disk, periodic_checker };
  enum class Side { minus, plus, interface };

  Kind kind = Kind::flat_horizontal;

  double flat_height = 0.5; // interface x2 = l, 0 < l < 1
  bool minus_above = true;  // flat: which side is Omega_-

  Point2 rect_lo{0.25, 0.25};
  Point2 rect_hi{0.75, 0.75};

  Point2 disk_center{0.5, 0.5};
  double disk_radius = 0.2;

  double checker_period = 1.0 / 32.0; // minus square of side eps/2 centered per eps-cell

  static InterfaceGeometry flat(double height, bool minus_above = true);
  static InterfaceGeometry rectangle(Point2 lo, Point2 hi);
  static InterfaceGeometry disk(Point2 center, double radius);
  static InterfaceGeometry checker(double period);

  /// Signed classification of a point; `interface` within tolerance 1e-12.
  Side side(const Point2& p) const;

  /// Distance-like level function, negative strictly inside Omega_-.
  double interface_offset(const Point2& p) const;
};

struct VertexClasses {
  std::vector<int> interior;     // all interior vertices
  std::vector<int> minus_verts;  // V_H^-
  std::vector<int> plus_verts;   // V_H^+
  std::vector<int> interface_verts; // V_H^0
};

VertexClasses classify_vertices(const Triangulation& mesh, const InterfaceGeometry& geom);

/// Exact area of element e intersected with Omega_- (polygon clipping; the
/// disk geometry is approximated by radial subdivision sampling).
double element_minus_area(const Triangulation& mesh, int e, const InterfaceGeometry& geom);

/// Whether the closure of element e intersects the interface.
bool element_touches_interface(const Triangulation& mesh, int e, const InterfaceGeometry& geom);

} // namespace signlod

#endif
