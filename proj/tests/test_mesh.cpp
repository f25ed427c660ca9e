#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "signlod/mesh.hpp"
#include "signlod/patches.hpp"
#include "signlod/tcoercivity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

using namespace signlod;

TEST_CASE("level-1 criss-cross mesh: 4 squares, 16 triangles, 13 vertices")
{
  const Triangulation mesh = build_block_mesh(1);
  CHECK(mesh.n_vertices() == 13);
  CHECK(mesh.n_elements() == 16);
}

TEST_CASE("element count is 4 * 4^N")
{
  for (int level : {1, 2, 3, 4})
    CHECK(build_block_mesh(level).n_elements() == 4 * (1 << (2 * level)));
}

TEST_CASE("triangulation invariants: areas, tiling, conformity, shape regularity")
{
  for (MeshPattern pattern : {MeshPattern::crisscross, MeshPattern::ne_diagonal}) {
    const Triangulation mesh = build_block_mesh(3, pattern);
    double total = 0.0;
    double kappa = 0.0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
      CHECK(mesh.element_area(e) > 0.0);
      total += mesh.element_area(e);
      kappa = std::max(kappa, mesh.element_diameter(e) / mesh.element_inradius(e));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(kappa <= 10.0);

    // conforming: every edge is shared by at most 2 elements, and neighbor
    // links are symmetric
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& el : mesh.elements)
      for (int k = 0; k < 3; ++k) {
        int a = el[k], b = el[(k + 1) % 3];
        if (a > b)
          std::swap(a, b);
        ++edge_count[{a, b}];
      }
    for (const auto& [edge, count] : edge_count)
      CHECK(count <= 2);
    for (int e = 0; e < mesh.n_elements(); ++e)
      for (int k = 0; k < 3; ++k) {
        const int nb = mesh.element_neighbors[e][k];
        if (nb >= 0) {
          bool back = false;
          for (int j = 0; j < 3; ++j)
            back |= mesh.element_neighbors[nb][j] == e;
          CHECK(back);
        }
      }
  }
}

TEST_CASE("mirror symmetry across gridlines (criss-cross)")
{
  const Triangulation mesh = build_block_mesh(2);
  // reflect across x1 = 0.25: elements with reflected image inside the domain
  // must map onto elements
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const Point2 bc = mesh.barycenter(e);
    const double rx = 0.5 - bc[0];
    if (rx < 0.0 || rx > 1.0)
      continue;
    const int img = mesh.locate({rx, bc[1]});
    std::multiset<std::pair<double, double>> orig, mapped;
    for (int v : mesh.elements[e])
      orig.insert({0.5 - mesh.vertices[v][0], mesh.vertices[v][1]});
    for (int v : mesh.elements[img])
      mapped.insert({mesh.vertices[v][0], mesh.vertices[v][1]});
    auto close = [](const std::pair<double, double>& a, const std::pair<double, double>& b) {
      return std::abs(a.first - b.first) < 1e-12 && std::abs(a.second - b.second) < 1e-12;
    };
    auto it = orig.begin(), jt = mapped.begin();
    for (; it != orig.end(); ++it, ++jt)
      CHECK(close(*it, *jt));
  }
}

TEST_CASE("level-8 fine mesh is symmetric across the benchmark interface line")
{
  // reflection across x2 = 0.5 - 2^-7 = 63/128, a level-8 gridline, maps mesh
  // elements to mesh elements wherever the image stays inside the domain
  const Triangulation mesh = build_block_mesh(8);
  const double l = 0.5 - 1.0 / 128.0;
  int checked = 0;
  for (int e = 0; e < mesh.n_elements(); e += 17) { // exhaustive up to stride
    const Point2 bc = mesh.barycenter(e);
    const double ry = 2.0 * l - bc[1];
    if (ry < 0.0 || ry > 1.0)
      continue;
    const int img = mesh.locate({bc[0], ry});
    // the image element's reflected barycenter must coincide with bc
    const Point2 ib = mesh.barycenter(img);
    CHECK(std::abs(ib[0] - bc[0]) < 1e-12);
    CHECK(std::abs(2.0 * l - ib[1] - bc[1]) < 1e-12);
    CHECK(std::abs(mesh.element_area(img) - mesh.element_area(e)) < 1e-15);
    ++checked;
  }
  CHECK(checked > 10000);
}

TEST_CASE("refine: 4 children per parent with matching areas")
{
  const Triangulation coarse = build_block_mesh(1);
  const Triangulation fine = refine(coarse, 1);
  CHECK(fine.level == 2);
  std::vector<int> counts(coarse.n_elements(), 0);
  std::vector<double> areas(coarse.n_elements(), 0.0);
  for (int e = 0; e < fine.n_elements(); ++e) {
    ++counts[fine.parent_map[e]];
    areas[fine.parent_map[e]] += fine.element_area(e);
  }
  for (int K = 0; K < coarse.n_elements(); ++K) {
    CHECK(counts[K] == 4);
    CHECK(areas[K] == doctest::Approx(coarse.element_area(K)).epsilon(1e-14));
  }
}

TEST_CASE("refine: multi-level parent map partitions areas")
{
  const Triangulation coarse = build_block_mesh(2);
  const Triangulation fine = refine(coarse, 3);
  std::vector<double> areas(coarse.n_elements(), 0.0);
  for (int e = 0; e < fine.n_elements(); ++e)
    areas[fine.parent_map[e]] += fine.element_area(e);
  for (int K = 0; K < coarse.n_elements(); ++K)
    CHECK(areas[K] == doctest::Approx(coarse.element_area(K)).epsilon(1e-13));
}

TEST_CASE("classify_vertices: unresolved flat interface has empty V_H^0")
{
  const Triangulation mesh = build_block_mesh(3);
  const InterfaceGeometry geom = InterfaceGeometry::flat(0.5 - 1.0 / 128.0);
  const VertexClasses classes = classify_vertices(mesh, geom);
  CHECK(classes.interface_verts.empty());
  CHECK(classes.minus_verts.size() + classes.plus_verts.size() == classes.interior.size());
}

TEST_CASE("classify_vertices: gridline interface puts the midline into V_H^0")
{
  const Triangulation mesh = build_block_mesh(1);
  const InterfaceGeometry geom = InterfaceGeometry::flat(0.5);
  const VertexClasses classes = classify_vertices(mesh, geom);
  for (int v : classes.interior) {
    const bool on_line = std::abs(mesh.vertices[v][1] - 0.5) < 1e-12;
    const bool classified =
        std::find(classes.interface_verts.begin(), classes.interface_verts.end(), v) !=
        classes.interface_verts.end();
    CHECK(on_line == classified);
  }
  CHECK(!classes.interface_verts.empty());
}

TEST_CASE("classify_vertices: resolved rectangle partitions by geometry")
{
  const Triangulation mesh = build_block_mesh(2);
  const InterfaceGeometry geom = InterfaceGeometry::rectangle({0.25, 0.25}, {0.75, 0.75});
  const VertexClasses classes = classify_vertices(mesh, geom);
  for (int v : classes.minus_verts) {
    const Point2& p = mesh.vertices[v];
    CHECK(p[0] > 0.25);
    CHECK(p[0] < 0.75);
    CHECK(p[1] > 0.25);
    CHECK(p[1] < 0.75);
  }
  for (int v : classes.interface_verts) {
    const Point2& p = mesh.vertices[v];
    CHECK(std::max(std::abs(p[0] - 0.5), std::abs(p[1] - 0.5)) == doctest::Approx(0.25));
  }
  CHECK(classes.minus_verts.size() + classes.plus_verts.size() + classes.interface_verts.size() ==
        classes.interior.size());
}

TEST_CASE("refinement preserves vertex classification")
{
  const InterfaceGeometry geom = InterfaceGeometry::rectangle({0.25, 0.25}, {0.75, 0.75});
  const Triangulation coarse = build_block_mesh(2);
  const Triangulation fine = build_block_mesh(4);
  const VertexClasses cc = classify_vertices(coarse, geom);
  for (int v : cc.plus_verts) {
    // the same physical point exists on the finer mesh
    bool found = false;
    for (int w = 0; w < fine.n_vertices() && !found; ++w)
      if (std::abs(fine.vertices[w][0] - coarse.vertices[v][0]) < 1e-12 &&
          std::abs(fine.vertices[w][1] - coarse.vertices[v][1]) < 1e-12) {
        found = true;
        CHECK(geom.side(fine.vertices[w]) == InterfaceGeometry::Side::plus);
      }
    CHECK(found);
  }
}

TEST_CASE("element_patch: zero layers, monotonicity")
{
  const Triangulation mesh = build_block_mesh(3);
  const int K = mesh.locate({0.5, 0.5});
  CHECK(element_patch(mesh, {K}, 0) == std::vector<int>{K});
  std::vector<int> prev;
  for (int m = 0; m <= 4; ++m) {
    const auto patch = element_patch(mesh, {K}, m);
    CHECK(std::includes(patch.begin(), patch.end(), prev.begin(), prev.end()));
    prev = patch;
  }
}

TEST_CASE("patch overlap bound grows at most quadratically")
{
  const Triangulation mesh = build_block_mesh(5);
  int prev = 0;
  for (int m = 1; m <= 6; ++m) {
    const PatchStats stats = patch_stats(mesh, m);
    CHECK(stats.overlap_bound >= prev);
    // N^m(K) fits in the squares within Chebyshev distance m+1
    CHECK(stats.overlap_bound <= 4 * (2 * m + 3) * (2 * m + 3));
    prev = stats.overlap_bound;
  }
}

TEST_CASE("patches are edge-connected within each side of a flat interface")
{
  const Triangulation mesh = build_block_mesh(3);
  const InterfaceGeometry geom = InterfaceGeometry::flat(0.5);
  const SymmetrizationMap sym = build_symmetrization(geom);
  for (int K : {0, 37, 101}) {
    const SymmetricPatch patch = symmetric_patch(mesh, K, 2, geom, &sym);
    for (int side = 0; side < 2; ++side) {
      std::set<int> members;
      for (int e : patch.elements) {
        const double off = geom.interface_offset(mesh.barycenter(e));
        if ((side == 0 && off < 0.0) || (side == 1 && off > 0.0))
          members.insert(e);
      }
      if (members.empty())
        continue;
      // BFS over shared edges
      std::set<int> seen{*members.begin()};
      std::vector<int> queue{*members.begin()};
      while (!queue.empty()) {
        const int e = queue.back();
        queue.pop_back();
        for (int nb : mesh.element_neighbors[e])
          if (nb >= 0 && members.count(nb) && !seen.count(nb)) {
            seen.insert(nb);
            queue.push_back(nb);
          }
      }
      CHECK(seen.size() == members.size());
    }
  }
}

TEST_CASE("symmetric_patch equals N^m away from the interface")
{
  const Triangulation mesh = build_block_mesh(3);
  const InterfaceGeometry geom = InterfaceGeometry::flat(0.5);
  const SymmetrizationMap sym = build_symmetrization(geom);
  const int K = mesh.locate({0.1, 0.1});
  const SymmetricPatch patch = symmetric_patch(mesh, K, 1, geom, &sym);
  CHECK(!patch.touches_interface);
  CHECK(patch.elements == element_patch(mesh, {K}, 1));
}

TEST_CASE("symmetric_patch contains the mirror image of the minus part (l = 0.5)")
{
  const Triangulation mesh = build_block_mesh(3);
  const InterfaceGeometry geom = InterfaceGeometry::flat(0.5);
  const SymmetrizationMap sym = build_symmetrization(geom);
  const int K = mesh.locate({0.45, 0.55}); // touches the interface from above
  const SymmetricPatch patch = symmetric_patch(mesh, K, 1, geom, &sym);
  REQUIRE(patch.touches_interface);
  const std::set<int> members(patch.elements.begin(), patch.elements.end());
  for (int e : element_patch(mesh, {K}, 1)) {
    const Point2 bc = mesh.barycenter(e);
    if (bc[1] <= 0.5)
      continue;
    const int mirror = mesh.locate({bc[0], 1.0 - bc[1]});
    CHECK(members.count(mirror) == 1);
  }
}

TEST_CASE("symmetric_patch is monotone in m")
{
  const Triangulation mesh = build_block_mesh(3);
  const InterfaceGeometry geom = InterfaceGeometry::flat(0.5 - 1.0 / 128.0);
  const SymmetrizationMap sym = build_symmetrization(geom);
  const int K = mesh.locate({0.5, 0.45});
  std::vector<int> prev;
  for (int m = 1; m <= 3; ++m) {
    const SymmetricPatch patch = symmetric_patch(mesh, K, m, geom, &sym);
    CHECK(std::includes(patch.elements.begin(), patch.elements.end(), prev.begin(), prev.end()));
    prev = patch.elements;
  }
}

TEST_CASE("symmetric_patch minus side equals the standard patch minus side")
{
  const Triangulation mesh = build_block_mesh(4);
  const InterfaceGeometry geom = InterfaceGeometry::flat(0.5 - 1.0 / 128.0);
  const SymmetrizationMap sym = build_symmetrization(geom);
  const int K = mesh.locate({0.3, 0.52});
  const SymmetricPatch patch = symmetric_patch(mesh, K, 2, geom, &sym);
  const auto nm = element_patch(mesh, {K}, 2);
  const std::set<int> nm_set(nm.begin(), nm.end());
  for (int e : patch.elements) {
    if (nm_set.count(e))
      continue;
    // every added element lies on the plus side (positive plus-area)
    CHECK(mesh.element_area(e) - element_minus_area(mesh, e, geom) > 1e-12);
  }
}

TEST_CASE("symmetric_patch falls back to N^{m+1} without a symmetrization")
{
  const Triangulation mesh = build_block_mesh(3);
  const InterfaceGeometry geom = InterfaceGeometry::disk({0.5, 0.5}, 0.2);
  const int K = mesh.locate({0.5, 0.35});
  const SymmetricPatch patch = symmetric_patch(mesh, K, 1, geom, nullptr);
  CHECK(patch.fallback_used);
  CHECK(patch.elements == element_patch(mesh, {K}, 2));
}

TEST_CASE("symmetric_patch rejects a symmetrization for the wrong geometry")
{
  const Triangulation mesh = build_block_mesh(2);
  const SymmetrizationMap sym = build_symmetrization(InterfaceGeometry::flat(0.5));
  const InterfaceGeometry other = InterfaceGeometry::flat(0.25);
  CHECK_THROWS_AS(symmetric_patch(mesh, 0, 1, other, &sym), std::invalid_argument);
}

TEST_CASE("T maps functions supported in a symmetric patch into the patch")
{
  // random fine functions supported in P^m(K): supp(T v) stays inside
  const InterfaceGeometry geom = InterfaceGeometry::flat(0.5);
  const SymmetrizationMap sym = build_symmetrization(geom);
  const Triangulation coarse = build_block_mesh(3);
  const Triangulation fine = build_block_mesh(5);

  const int K = coarse.locate({0.45, 0.55});
  const SymmetricPatch patch = symmetric_patch(coarse, K, 1, geom, &sym);
  std::set<int> patch_set(patch.elements.begin(), patch.elements.end());

  // fine vertices strictly inside the patch
  std::vector<char> inside(fine.n_vertices(), 1);
  for (int v = 0; v < fine.n_vertices(); ++v) {
    if (fine.boundary_vertex[v]) {
      inside[v] = 0;
      continue;
    }
    for (int k = fine.vertex_elem_ptr[v]; k < fine.vertex_elem_ptr[v + 1]; ++k)
      if (!patch_set.count(coarse.locate(fine.barycenter(fine.vertex_elem[k]))))
        inside[v] = 0;
  }

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Vector v = Vector::Zero(fine.n_vertices());
    for (int i = 0; i < fine.n_vertices(); ++i)
      if (inside[i])
        v[i] = unif(rng);
    const Vector tv = apply_T(sym, fine, v);
    for (int i = 0; i < fine.n_vertices(); ++i) {
      if (std::abs(tv[i]) < 1e-14)
        continue;
      bool in_patch = false;
      for (int k = fine.vertex_elem_ptr[i]; k < fine.vertex_elem_ptr[i + 1]; ++k)
        in_patch |= patch_set.count(coarse.locate(fine.barycenter(fine.vertex_elem[k]))) > 0;
      CHECK(in_patch);
    }
  }
}

TEST_CASE("mesh export format")
{
  const Triangulation mesh = build_block_mesh(1);
  std::ostringstream os;
  mesh.export_text(os);
  std::istringstream is(os.str());
  std::string line;
  int v_lines = 0, e_lines = 0;
  while (std::getline(is, line)) {
    if (line.rfind("v ", 0) == 0)
      ++v_lines;
    else if (line.rfind("e ", 0) == 0)
      ++e_lines;
    else
      FAIL("unexpected line: " << line);
  }
  CHECK(v_lines == 13);
  CHECK(e_lines == 16);
}

TEST_CASE("build_block_mesh rejects out-of-range levels")
{
  CHECK_THROWS_AS(build_block_mesh(0), std::invalid_argument);
  CHECK_THROWS_AS(build_block_mesh(13), std::invalid_argument);
}
