#include "signlod/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace signlod {

namespace {

constexpr double kGeomTol = 1e-12;

int pow2(int k) { return 1 << k; }

} // namespace

double Triangulation::element_area(int e) const
{
  const auto& el = elements[e];
  const Point2& a = vertices[el[0]];
  const Point2& b = vertices[el[1]];
  const Point2& c = vertices[el[2]];
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

Point2 Triangulation::barycenter(int e) const
{
  const auto& el = elements[e];
  return {(vertices[el[0]][0] + vertices[el[1]][0] + vertices[el[2]][0]) / 3.0,
          (vertices[el[0]][1] + vertices[el[1]][1] + vertices[el[2]][1]) / 3.0};
}

double Triangulation::element_diameter(int e) const
{
  const auto& el = elements[e];
  double d = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Point2& p = vertices[el[i]];
    const Point2& q = vertices[el[(i + 1) % 3]];
    d = std::max(d, std::hypot(p[0] - q[0], p[1] - q[1]));
  }
  return d;
}

double Triangulation::element_inradius(int e) const
{
  const auto& el = elements[e];
  double per = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Point2& p = vertices[el[i]];
    const Point2& q = vertices[el[(i + 1) % 3]];
    per += std::hypot(p[0] - q[0], p[1] - q[1]);
  }
  return 2.0 * element_area(e) / per;
}

std::array<double, 3> Triangulation::barycentric(int e, const Point2& p) const
{
  const auto& el = elements[e];
  const Point2& a = vertices[el[0]];
  const Point2& b = vertices[el[1]];
  const Point2& c = vertices[el[2]];
  const double det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
  const double l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (p[1] - a[1]) * (c[0] - a[0])) / det;
  const double l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) / det;
  return {1.0 - l1 - l2, l1, l2};
}

int Triangulation::locate(const Point2& p) const
{
  const int n = pow2(level);
  const double x = std::min(std::max(p[0], 0.0), 1.0);
  const double y = std::min(std::max(p[1], 0.0), 1.0);
  const int ix = std::min(static_cast<int>(x * n), n - 1);
  const int iy = std::min(static_cast<int>(y * n), n - 1);
  const double u = x * n - ix;
  const double v = y * n - iy;
  const int sq = iy * n + ix;
  if (pattern == MeshPattern::ne_diagonal)
    return 2 * sq + (v <= u ? 0 : 1);
  // criss-cross: bottom / right / top / left quadrant of the square
  int k;
  if (v <= u && v <= 1.0 - u)
    k = 0;
  else if (v <= u) // u >= v and v > 1-u  =>  right
    k = 1;
  else if (v >= 1.0 - u)
    k = 2;
  else
    k = 3;
  return 4 * sq + k;
}

std::vector<int> Triangulation::incident_elements(int vertex) const
{
  return std::vector<int>(vertex_elem.begin() + vertex_elem_ptr[vertex],
                          vertex_elem.begin() + vertex_elem_ptr[vertex + 1]);
}

void Triangulation::export_text(std::ostream& os) const
{
  for (const auto& v : vertices)
    os << "v " << v[0] << ' ' << v[1] << '\n';
  for (const auto& e : elements)
    os << "e " << e[0] << ' ' << e[1] << ' ' << e[2] << '\n';
}

namespace {

void build_connectivity(Triangulation& mesh)
{
  const int nv = mesh.n_vertices();
  const int ne = mesh.n_elements();

  std::vector<int> counts(nv, 0);
  for (const auto& el : mesh.elements)
    for (int v : el)
      ++counts[v];
  mesh.vertex_elem_ptr.assign(nv + 1, 0);
  for (int v = 0; v < nv; ++v)
    mesh.vertex_elem_ptr[v + 1] = mesh.vertex_elem_ptr[v] + counts[v];
  mesh.vertex_elem.resize(mesh.vertex_elem_ptr.back());
  std::vector<int> cursor(mesh.vertex_elem_ptr.begin(), mesh.vertex_elem_ptr.end() - 1);
  for (int e = 0; e < ne; ++e)
    for (int v : mesh.elements[e])
      mesh.vertex_elem[cursor[v]++] = e;

  mesh.element_neighbors.assign(ne, {-1, -1, -1});
  std::map<std::pair<int, int>, std::pair<int, int>> edge_owner; // edge -> (element, local edge)
  for (int e = 0; e < ne; ++e) {
    for (int k = 0; k < 3; ++k) {
      int a = mesh.elements[e][k];
      int b = mesh.elements[e][(k + 1) % 3];
      if (a > b)
        std::swap(a, b);
      auto key = std::make_pair(a, b);
      auto it = edge_owner.find(key);
      if (it == edge_owner.end()) {
        edge_owner.emplace(key, std::make_pair(e, k));
      } else {
        mesh.element_neighbors[e][k] = it->second.first;
        mesh.element_neighbors[it->second.first][it->second.second] = e;
        edge_owner.erase(it);
      }
    }
  }
}

} // namespace

Triangulation build_block_mesh(int level, MeshPattern pattern)
{
  if (level < 1 || level > 12)
    throw std::invalid_argument("build_block_mesh: level must be in [1, 12]");

  Triangulation mesh;
  mesh.level = level;
  mesh.pattern = pattern;
  const int n = pow2(level);
  const double h = 1.0 / n;

  mesh.vertices.reserve((n + 1) * (n + 1) + (pattern == MeshPattern::crisscross ? n * n : 0));
  for (int iy = 0; iy <= n; ++iy)
    for (int ix = 0; ix <= n; ++ix)
      mesh.vertices.push_back({ix * h, iy * h});
  const int center_offset = (n + 1) * (n + 1);
  if (pattern == MeshPattern::crisscross)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix)
        mesh.vertices.push_back({(ix + 0.5) * h, (iy + 0.5) * h});

  auto corner = [n](int ix, int iy) { return iy * (n + 1) + ix; };

  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const int bl = corner(ix, iy);
      const int br = corner(ix + 1, iy);
      const int tr = corner(ix + 1, iy + 1);
      const int tl = corner(ix, iy + 1);
      if (pattern == MeshPattern::crisscross) {
        const int c = center_offset + iy * n + ix;
        mesh.elements.push_back({bl, br, c});
        mesh.elements.push_back({br, tr, c});
        mesh.elements.push_back({tr, tl, c});
        mesh.elements.push_back({tl, bl, c});
      } else {
        mesh.elements.push_back({bl, br, tr});
        mesh.elements.push_back({bl, tr, tl});
      }
    }

  mesh.boundary_vertex.assign(mesh.n_vertices(), 0);
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const Point2& p = mesh.vertices[v];
    if (p[0] < kGeomTol || p[0] > 1.0 - kGeomTol || p[1] < kGeomTol || p[1] > 1.0 - kGeomTol)
      mesh.boundary_vertex[v] = 1;
  }

  build_connectivity(mesh);
  return mesh;
}

Triangulation refine(const Triangulation& coarse, int extra_levels)
{
  if (extra_levels < 1)
    throw std::invalid_argument("refine: extra_levels must be >= 1");
  Triangulation fine = build_block_mesh(coarse.level + extra_levels, coarse.pattern);

  fine.parent_map.resize(fine.n_elements());
  for (int e = 0; e < fine.n_elements(); ++e)
    fine.parent_map[e] = coarse.locate(fine.barycenter(e));

  fine.vertex_on_coarse_edge.assign(fine.n_vertices(), 0);
  for (int v = 0; v < fine.n_vertices(); ++v) {
    const int K = coarse.locate(fine.vertices[v]);
    const auto lambda = coarse.barycentric(K, fine.vertices[v]);
    int zeros = 0;
    for (double l : lambda)
      if (std::abs(l) < kGeomTol)
        ++zeros;
    if (zeros == 1)
      fine.vertex_on_coarse_edge[v] = 1;
  }
  return fine;
}

InterfaceGeometry InterfaceGeometry::flat(double height, bool minus_above)
{
  if (!(height > 0.0 && height < 1.0))
    throw std::invalid_argument("InterfaceGeometry::flat: height must be in (0,1)");
  InterfaceGeometry g;
  g.kind = Kind::flat_horizontal;
  g.flat_height = height;
  g.minus_above = minus_above;
  return g;
}

InterfaceGeometry InterfaceGeometry::rectangle(Point2 lo, Point2 hi)
{
  InterfaceGeometry g;
  g.kind = Kind::axis_aligned_rectangle;
  g.rect_lo = lo;
  g.rect_hi = hi;
  return g;
}

InterfaceGeometry InterfaceGeometry::disk(Point2 center, double radius)
{
  InterfaceGeometry g;
  g.kind = Kind::disk;
  g.disk_center = center;
  g.disk_radius = radius;
  if (center[0] - radius <= 0.0 || center[0] + radius >= 1.0 || center[1] - radius <= 0.0 ||
      center[1] + radius >= 1.0)
    throw std::invalid_argument("InterfaceGeometry::disk: disk must be strictly inside the domain");
  return g;
}

InterfaceGeometry InterfaceGeometry::checker(double period)
{
  InterfaceGeometry g;
  g.kind = Kind::periodic_checker;
  g.checker_period = period;
  return g;
}

double InterfaceGeometry::interface_offset(const Point2& p) const
{
  switch (kind) {
  case Kind::flat_horizontal:
    return minus_above ? flat_height - p[1] : p[1] - flat_height;
  case Kind::axis_aligned_rectangle: {
    const double dx = std::max(rect_lo[0] - p[0], p[0] - rect_hi[0]);
    const double dy = std::max(rect_lo[1] - p[1], p[1] - rect_hi[1]);
    return std::max(dx, dy);
  }
  case Kind::disk:
    return std::hypot(p[0] - disk_center[0], p[1] - disk_center[1]) - disk_radius;
  case Kind::periodic_checker: {
    const double eps = checker_period;
    double u = p[0] / eps - std::floor(p[0] / eps);
    double v = p[1] / eps - std::floor(p[1] / eps);
    return eps * (std::max(std::abs(u - 0.5), std::abs(v - 0.5)) - 0.25);
  }
  }
  return 1.0;
}

InterfaceGeometry::Side InterfaceGeometry::side(const Point2& p) const
{
  const double d = interface_offset(p);
  if (d < -kGeomTol)
    return Side::minus;
  if (d > kGeomTol)
    return Side::plus;
  return Side::interface;
}

VertexClasses classify_vertices(const Triangulation& mesh, const InterfaceGeometry& geom)
{
  VertexClasses classes;
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (mesh.boundary_vertex[v])
      continue;
    classes.interior.push_back(v);
    switch (geom.side(mesh.vertices[v])) {
    case InterfaceGeometry::Side::minus:
      classes.minus_verts.push_back(v);
      break;
    case InterfaceGeometry::Side::plus:
      classes.plus_verts.push_back(v);
      break;
    case InterfaceGeometry::Side::interface:
      classes.interface_verts.push_back(v);
      break;
    }
  }
  return classes;
}

} // namespace signlod
