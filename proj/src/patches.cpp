#include "signlod/patches.hpp"

#include "signlod/tcoercivity.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace signlod {

namespace {

constexpr double kGeomTol = 1e-12;

using Polygon = std::vector<Point2>;

double polygon_area(const Polygon& p)
{
  double a = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Point2& u = p[i];
    const Point2& v = p[(i + 1) % p.size()];
    a += u[0] * v[1] - u[1] * v[0];
  }
  return 0.5 * a;
}

// Keeps the part with n.x <= c (Sutherland-Hodgman step).
Polygon clip_halfplane(const Polygon& poly, const Point2& n, double c)
{
  Polygon out;
  const std::size_t sz = poly.size();
  for (std::size_t i = 0; i < sz; ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % sz];
    const double dp = n[0] * p[0] + n[1] * p[1] - c;
    const double dq = n[0] * q[0] + n[1] * q[1] - c;
    if (dp <= 0.0)
      out.push_back(p);
    if ((dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0)) {
      const double t = dp / (dp - dq);
      out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
    }
  }
  return out;
}

Polygon clip_box(Polygon poly, const Point2& lo, const Point2& hi)
{
  poly = clip_halfplane(poly, {1.0, 0.0}, hi[0]);
  if (poly.empty())
    return poly;
  poly = clip_halfplane(poly, {-1.0, 0.0}, -lo[0]);
  if (poly.empty())
    return poly;
  poly = clip_halfplane(poly, {0.0, 1.0}, hi[1]);
  if (poly.empty())
    return poly;
  poly = clip_halfplane(poly, {0.0, -1.0}, -lo[1]);
  return poly;
}

Polygon element_polygon(const Triangulation& mesh, int e)
{
  const auto& el = mesh.elements[e];
  return {mesh.vertices[el[0]], mesh.vertices[el[1]], mesh.vertices[el[2]]};
}

// Separating-axis overlap test for convex polygons; closed sets, so touching
// counts as intersecting.
bool convex_overlap(const Polygon& a, const Polygon& b)
{
  if (a.empty() || b.empty())
    return false;
  auto separated_by_edges = [](const Polygon& p, const Polygon& q) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      const Point2& u = p[i];
      const Point2& v = p[(i + 1) % p.size()];
      const Point2 n{-(v[1] - u[1]), v[0] - u[0]};
      double pmin = 1e300, pmax = -1e300, qmin = 1e300, qmax = -1e300;
      for (const Point2& x : p) {
        const double d = n[0] * x[0] + n[1] * x[1];
        pmin = std::min(pmin, d);
        pmax = std::max(pmax, d);
      }
      for (const Point2& x : q) {
        const double d = n[0] * x[0] + n[1] * x[1];
        qmin = std::min(qmin, d);
        qmax = std::max(qmax, d);
      }
      if (pmax < qmin - kGeomTol || qmax < pmin - kGeomTol)
        return true;
    }
    return false;
  };
  return !separated_by_edges(a, b) && !separated_by_edges(b, a);
}

double disk_minus_area(const Triangulation& mesh, int e, const InterfaceGeometry& geom)
{
  // Midpoint sampling on a subdivided element; only used for diagnostics.
  const Polygon tri = element_polygon(mesh, e);
  const int n = 64;
  double inside = 0.0;
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; i + j < n; ++j)
      for (int up = 0; up < (i + j < n - 1 ? 2 : 1); ++up) {
        const double l1 = (i + (up ? 2.0 / 3.0 : 1.0 / 3.0)) / n;
        const double l2 = (j + (up ? 2.0 / 3.0 : 1.0 / 3.0)) / n;
        const Point2 p{tri[0][0] + l1 * (tri[1][0] - tri[0][0]) + l2 * (tri[2][0] - tri[0][0]),
                       tri[0][1] + l1 * (tri[1][1] - tri[0][1]) + l2 * (tri[2][1] - tri[0][1])};
        total += 1.0;
        if (geom.interface_offset(p) < 0.0)
          inside += 1.0;
      }
  return mesh.element_area(e) * inside / total;
}

} // namespace

double element_minus_area(const Triangulation& mesh, int e, const InterfaceGeometry& geom)
{
  const Polygon tri = element_polygon(mesh, e);
  switch (geom.kind) {
  case InterfaceGeometry::Kind::flat_horizontal: {
    const Polygon part = geom.minus_above ? clip_halfplane(tri, {0.0, -1.0}, -geom.flat_height)
                                          : clip_halfplane(tri, {0.0, 1.0}, geom.flat_height);
    return part.empty() ? 0.0 : std::abs(polygon_area(part));
  }
  case InterfaceGeometry::Kind::axis_aligned_rectangle: {
    const Polygon part = clip_box(tri, geom.rect_lo, geom.rect_hi);
    return part.empty() ? 0.0 : std::abs(polygon_area(part));
  }
  case InterfaceGeometry::Kind::periodic_checker: {
    const double eps = geom.checker_period;
    double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
    for (const Point2& p : tri) {
      lo_x = std::min(lo_x, p[0]);
      hi_x = std::max(hi_x, p[0]);
      lo_y = std::min(lo_y, p[1]);
      hi_y = std::max(hi_y, p[1]);
    }
    double area = 0.0;
    for (int i = static_cast<int>(std::floor(lo_x / eps)); i <= static_cast<int>(std::floor(hi_x / eps)); ++i)
      for (int j = static_cast<int>(std::floor(lo_y / eps)); j <= static_cast<int>(std::floor(hi_y / eps)); ++j) {
        const Point2 lo{(i + 0.25) * eps, (j + 0.25) * eps};
        const Point2 hi{(i + 0.75) * eps, (j + 0.75) * eps};
        const Polygon part = clip_box(tri, lo, hi);
        if (!part.empty())
          area += std::abs(polygon_area(part));
      }
    return area;
  }
  case InterfaceGeometry::Kind::disk:
    return disk_minus_area(mesh, e, geom);
  }
  return 0.0;
}

bool element_touches_interface(const Triangulation& mesh, int e, const InterfaceGeometry& geom)
{
  if (geom.kind == InterfaceGeometry::Kind::disk) {
    const auto& el = mesh.elements[e];
    double dmax = 0.0;
    for (int v : el)
      dmax = std::max(dmax, std::hypot(mesh.vertices[v][0] - geom.disk_center[0],
                                       mesh.vertices[v][1] - geom.disk_center[1]));
    // min distance from the closed triangle to the center
    const Polygon tri = element_polygon(mesh, e);
    const auto lambda = mesh.barycentric(e, geom.disk_center);
    double dmin;
    if (lambda[0] >= -kGeomTol && lambda[1] >= -kGeomTol && lambda[2] >= -kGeomTol) {
      dmin = 0.0;
    } else {
      dmin = 1e300;
      for (int i = 0; i < 3; ++i) {
        const Point2& p = tri[i];
        const Point2& q = tri[(i + 1) % 3];
        const double vx = q[0] - p[0], vy = q[1] - p[1];
        double t = ((geom.disk_center[0] - p[0]) * vx + (geom.disk_center[1] - p[1]) * vy) /
                   (vx * vx + vy * vy);
        t = std::min(std::max(t, 0.0), 1.0);
        dmin = std::min(dmin, std::hypot(geom.disk_center[0] - (p[0] + t * vx),
                                         geom.disk_center[1] - (p[1] + t * vy)));
      }
    }
    return dmin <= geom.disk_radius + kGeomTol && dmax >= geom.disk_radius - kGeomTol;
  }

  const double area = mesh.element_area(e);
  const double minus = element_minus_area(mesh, e, geom);
  if (minus > kGeomTol && minus < area - kGeomTol)
    return true;
  // fully on one side: still touching if a vertex sits on the interface
  for (int v : mesh.elements[e])
    if (geom.side(mesh.vertices[v]) == InterfaceGeometry::Side::interface)
      return true;
  return false;
}

std::vector<int> element_patch(const Triangulation& mesh, const std::vector<int>& seed, int m)
{
  if (seed.empty())
    throw std::invalid_argument("element_patch: empty seed");
  std::vector<char> in_patch(mesh.n_elements(), 0);
  std::vector<int> current = seed;
  for (int e : seed)
    in_patch[e] = 1;

  for (int layer = 0; layer < m; ++layer) {
    std::vector<int> added;
    for (int e : current)
      for (int v : mesh.elements[e])
        for (int k = mesh.vertex_elem_ptr[v]; k < mesh.vertex_elem_ptr[v + 1]; ++k) {
          const int other = mesh.vertex_elem[k];
          if (!in_patch[other]) {
            in_patch[other] = 1;
            added.push_back(other);
          }
        }
    if (added.empty())
      break;
    current = std::move(added);
  }

  std::vector<int> out;
  for (int e = 0; e < mesh.n_elements(); ++e)
    if (in_patch[e])
      out.push_back(e);
  return out;
}

PatchStats patch_stats(const Triangulation& mesh, int m)
{
  PatchStats stats;
  stats.m = m;
  stats.element_count = mesh.n_elements();
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto patch = element_patch(mesh, {e}, m);
    stats.overlap_bound = std::max(stats.overlap_bound, static_cast<int>(patch.size()));
  }
  return stats;
}

SymmetricPatch symmetric_patch(const Triangulation& mesh, int K, int m,
                               const InterfaceGeometry& geom, const SymmetrizationMap* sym)
{
  if (m < 0)
    throw std::invalid_argument("symmetric_patch: m must be >= 0");
  if (sym && !sym->consistent_with(geom))
    throw std::invalid_argument("symmetric_patch: symmetrization inconsistent with the geometry");

  SymmetricPatch out;
  std::vector<int> nm = element_patch(mesh, {K}, m);

  for (int e : nm)
    if (element_touches_interface(mesh, e, geom)) {
      out.touches_interface = true;
      break;
    }

  if (!out.touches_interface) {
    out.elements = std::move(nm);
    return out;
  }

  if (sym == nullptr) {
    out.elements = element_patch(mesh, {K}, m + 1);
    out.fallback_used = true;
    return out;
  }

  // Enlarge the Omega_+ side by every element meeting the symmetrized image
  // of the Omega_- part of the patch.
  std::set<int> patch(nm.begin(), nm.end());
  const double l = sym->l;
  const Point2 minus_normal = sym->minus_above ? Point2{0.0, -1.0} : Point2{0.0, 1.0};
  const double minus_offset = sym->minus_above ? -l : l;

  for (int e : nm) {
    Polygon part = clip_halfplane(element_polygon(mesh, e), minus_normal, minus_offset);
    if (part.size() < 2)
      continue;
    Polygon image = part;
    for (Point2& p : image)
      p[1] = sym->push_to(p[1]);
    if (std::abs(polygon_area(image)) < kGeomTol * kGeomTol && image.size() < 3)
      continue;

    double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
    for (const Point2& p : image) {
      lo_x = std::min(lo_x, p[0]);
      hi_x = std::max(hi_x, p[0]);
      lo_y = std::min(lo_y, p[1]);
      hi_y = std::max(hi_y, p[1]);
    }
    const int n = 1 << mesh.level;
    const int per_square = mesh.pattern == MeshPattern::crisscross ? 4 : 2;
    const int ix0 = std::max(0, static_cast<int>(std::floor(lo_x * n - kGeomTol)));
    const int ix1 = std::min(n - 1, static_cast<int>(std::floor(hi_x * n + kGeomTol)));
    const int iy0 = std::max(0, static_cast<int>(std::floor(lo_y * n - kGeomTol)));
    const int iy1 = std::min(n - 1, static_cast<int>(std::floor(hi_y * n + kGeomTol)));
    for (int iy = iy0; iy <= iy1; ++iy)
      for (int ix = ix0; ix <= ix1; ++ix)
        for (int k = 0; k < per_square; ++k) {
          const int cand = per_square * (iy * n + ix) + k;
          if (patch.count(cand))
            continue;
          // only plus-side elements are added; the minus trace of the patch
          // must remain N^m(K) cap Omega_-
          const double plus_area =
              mesh.element_area(cand) - element_minus_area(mesh, cand, geom);
          if (plus_area <= kGeomTol)
            continue;
          if (convex_overlap(image, element_polygon(mesh, cand)))
            patch.insert(cand);
        }
  }

  out.elements.assign(patch.begin(), patch.end());
  return out;
}

} // namespace signlod
