#include "signlod/fem.hpp"

#include "signlod/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace signlod {

namespace {

constexpr double kGeomTol = 1e-12;

struct TriGeom {
  std::array<Point2, 3> p;
  double area;
  std::array<std::array<double, 2>, 3> grad; // gradients of the P1 basis
};

TriGeom tri_geometry(const Triangulation& mesh, int e)
{
  TriGeom g;
  const auto& el = mesh.elements[e];
  for (int i = 0; i < 3; ++i)
    g.p[i] = mesh.vertices[el[i]];
  const double det = (g.p[1][0] - g.p[0][0]) * (g.p[2][1] - g.p[0][1]) -
                     (g.p[1][1] - g.p[0][1]) * (g.p[2][0] - g.p[0][0]);
  g.area = 0.5 * det;
  if (g.area <= 0.0)
    throw std::runtime_error("assembly: element with nonpositive area");
  g.grad[0] = {(g.p[1][1] - g.p[2][1]) / det, (g.p[2][0] - g.p[1][0]) / det};
  g.grad[1] = {(g.p[2][1] - g.p[0][1]) / det, (g.p[0][0] - g.p[2][0]) / det};
  g.grad[2] = {(g.p[0][1] - g.p[1][1]) / det, (g.p[1][0] - g.p[0][0]) / det};
  return g;
}

using SubTriangle = std::array<Point2, 3>;

double sub_area(const SubTriangle& t)
{
  return 0.5 * ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) -
                (t[1][1] - t[0][1]) * (t[2][0] - t[0][0]));
}

// Splits a triangle along the horizontal line y = c; fan-triangulates the two
// clipped polygons.
void split_at_line(const SubTriangle& tri, double c, std::vector<SubTriangle>& out)
{
  auto clip = [&](bool below) {
    std::vector<Point2> poly;
    for (int i = 0; i < 3; ++i) {
      const Point2& p = tri[i];
      const Point2& q = tri[(i + 1) % 3];
      const double dp = below ? p[1] - c : c - p[1];
      const double dq = below ? q[1] - c : c - q[1];
      if (dp <= 0.0)
        poly.push_back(p);
      if ((dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0)) {
        const double t = dp / (dp - dq);
        poly.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
      }
    }
    for (std::size_t k = 2; k < poly.size(); ++k) {
      SubTriangle s{poly[0], poly[k - 1], poly[k]};
      if (std::abs(sub_area(s)) > kGeomTol * kGeomTol)
        out.push_back(s);
    }
  };
  clip(true);
  clip(false);
}

// Yields the integration cells of an element: the element itself, its
// descendants on a finer block level, and/or the pieces split at a horizontal
// line. Each cell is a plain triangle; basis evaluation stays on the parent.
template <class Fn>
void for_each_integration_cell(const Triangulation& mesh, int e, const AssemblyOptions& opts, Fn&& fn)
{
  std::vector<SubTriangle> cells;
  const auto& el = mesh.elements[e];
  const SubTriangle whole{mesh.vertices[el[0]], mesh.vertices[el[1]], mesh.vertices[el[2]]};

  if (opts.composite_to_level > mesh.level) {
    const int n = 1 << opts.composite_to_level;
    const double h = 1.0 / n;
    double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
    for (const Point2& p : whole) {
      lo_x = std::min(lo_x, p[0]);
      hi_x = std::max(hi_x, p[0]);
      lo_y = std::min(lo_y, p[1]);
      hi_y = std::max(hi_y, p[1]);
    }
    const int ix0 = std::max(0, static_cast<int>(std::floor(lo_x * n - 0.5)));
    const int ix1 = std::min(n - 1, static_cast<int>(std::floor(hi_x * n + 0.5)));
    const int iy0 = std::max(0, static_cast<int>(std::floor(lo_y * n - 0.5)));
    const int iy1 = std::min(n - 1, static_cast<int>(std::floor(hi_y * n + 0.5)));
    const bool cc = mesh.pattern == MeshPattern::crisscross;
    for (int iy = iy0; iy <= iy1; ++iy)
      for (int ix = ix0; ix <= ix1; ++ix) {
        const Point2 bl{ix * h, iy * h}, br{(ix + 1) * h, iy * h};
        const Point2 tr{(ix + 1) * h, (iy + 1) * h}, tl{ix * h, (iy + 1) * h};
        const Point2 ce{(ix + 0.5) * h, (iy + 0.5) * h};
        std::vector<SubTriangle> cand;
        if (cc)
          cand = {{bl, br, ce}, {br, tr, ce}, {tr, tl, ce}, {tl, bl, ce}};
        else
          cand = {{bl, br, tr}, {bl, tr, tl}};
        for (const auto& t : cand) {
          const Point2 bc{(t[0][0] + t[1][0] + t[2][0]) / 3.0, (t[0][1] + t[1][1] + t[2][1]) / 3.0};
          const auto lambda = mesh.barycentric(e, bc);
          if (lambda[0] > -kGeomTol && lambda[1] > -kGeomTol && lambda[2] > -kGeomTol)
            cells.push_back(t);
        }
      }
  } else {
    cells.push_back(whole);
  }

  if (opts.split_y) {
    std::vector<SubTriangle> split;
    for (const auto& t : cells) {
      const double ymin = std::min({t[0][1], t[1][1], t[2][1]});
      const double ymax = std::max({t[0][1], t[1][1], t[2][1]});
      if (ymin < *opts.split_y && ymax > *opts.split_y)
        split_at_line(t, *opts.split_y, split);
      else
        split.push_back(t);
    }
    cells = std::move(split);
  }

  for (const auto& t : cells)
    fn(t);
}

} // namespace

Coefficient Coefficient::constant(double value)
{
  Coefficient c;
  c.eval = [value](double, double) { return value; };
  c.geom = value >= 0.0 ? InterfaceGeometry::flat(0.5, false) : InterfaceGeometry::flat(0.5, true);
  c.sigma_plus = std::abs(value);
  c.sigma_minus = std::abs(value);
  c.sup_plus = value;
  c.inf_plus = value;
  return c;
}

double FeFunction::eval(const Point2& p) const
{
  const int e = mesh->locate(p);
  const auto lambda = mesh->barycentric(e, p);
  const auto& el = mesh->elements[e];
  return lambda[0] * values[el[0]] + lambda[1] * values[el[1]] + lambda[2] * values[el[2]];
}

void FeFunction::dump(std::ostream& os) const
{
  for (int i = 0; i < values.size(); ++i)
    os << i << ' ' << values[i] << '\n';
}

SigmaMeans compute_sigma_means(const Triangulation& mesh, const Coefficient& coeff,
                               const AssemblyOptions& opts)
{
  SigmaMeans means;
  means.mean.resize(mesh.n_elements());
  means.abs_mean.resize(mesh.n_elements());

  if (coeff.exact_element_mean) {
    for (int e = 0; e < mesh.n_elements(); ++e) {
      const auto m = coeff.exact_element_mean(mesh, e);
      means.mean[e] = m[0];
      means.abs_mean[e] = m[1];
    }
    return means;
  }

  const QuadratureRule& rule = QuadratureRule::of_degree(opts.quad_degree);
  parallel_for(mesh.n_elements(), [&](int e) {
    const double area = mesh.element_area(e);
    double val = 0.0, abs_val = 0.0;
    for_each_integration_cell(mesh, e, opts, [&](const SubTriangle& t) {
      const double a = sub_area(t);
      for (const auto& q : rule.points) {
        const double x = q.bary[0] * t[0][0] + q.bary[1] * t[1][0] + q.bary[2] * t[2][0];
        const double y = q.bary[0] * t[0][1] + q.bary[1] * t[1][1] + q.bary[2] * t[2][1];
        const double s = coeff.eval(x, y);
        val += a * q.weight * s;
        abs_val += a * q.weight * std::abs(s);
      }
    });
    means.mean[e] = val / area;
    means.abs_mean[e] = abs_val / area;
  });
  return means;
}

SparseMatrix assemble_sigma_stiffness(const Triangulation& mesh, const SigmaMeans& means)
{
  std::vector<Triplet> trips;
  trips.reserve(9 * mesh.n_elements());
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const TriGeom g = tri_geometry(mesh, e);
    const auto& el = mesh.elements[e];
    const double s = means.mean[e] * g.area;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trips.push_back({el[i], el[j],
                         s * (g.grad[i][0] * g.grad[j][0] + g.grad[i][1] * g.grad[j][1])});
  }
  SparseMatrix A = SparseMatrix::from_triplets(mesh.n_vertices(), mesh.n_vertices(), trips);
  A.set_symmetric_checked();
  return A;
}

SparseMatrix assemble_sigma_stiffness(const Triangulation& mesh, const Coefficient& coeff,
                                      const AssemblyOptions& opts)
{
  if (opts.quad_degree < 2 && !coeff.exact_element_mean)
    throw std::invalid_argument("assemble_sigma_stiffness: quadrature degree must be >= 2");
  return assemble_sigma_stiffness(mesh, compute_sigma_means(mesh, coeff, opts));
}

SparseMatrix assemble_mass(const Triangulation& mesh)
{
  std::vector<Triplet> trips;
  trips.reserve(9 * mesh.n_elements());
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const double a = mesh.element_area(e);
    const auto& el = mesh.elements[e];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trips.push_back({el[i], el[j], a / 12.0 * (i == j ? 2.0 : 1.0)});
  }
  return SparseMatrix::from_triplets(mesh.n_vertices(), mesh.n_vertices(), trips);
}

Vector assemble_load(const Triangulation& mesh, const ScalarField& f, const AssemblyOptions& opts)
{
  const QuadratureRule& rule = QuadratureRule::of_degree(opts.quad_degree);
  Vector b = Vector::Zero(mesh.n_vertices());
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& el = mesh.elements[e];
    for_each_integration_cell(mesh, e, opts, [&](const SubTriangle& t) {
      const double a = sub_area(t);
      for (const auto& q : rule.points) {
        const Point2 x{q.bary[0] * t[0][0] + q.bary[1] * t[1][0] + q.bary[2] * t[2][0],
                       q.bary[0] * t[0][1] + q.bary[1] * t[1][1] + q.bary[2] * t[2][1]};
        const double fv = f(x[0], x[1]);
        const auto lambda = mesh.barycentric(e, x);
        for (int i = 0; i < 3; ++i)
          b[el[i]] += a * q.weight * fv * lambda[i];
      }
    });
  }
  return b;
}

DofMap DofMap::build(const Triangulation& mesh)
{
  DofMap map;
  map.full_to_int.assign(mesh.n_vertices(), -1);
  for (int v = 0; v < mesh.n_vertices(); ++v)
    if (!mesh.boundary_vertex[v]) {
      map.full_to_int[v] = static_cast<int>(map.interior.size());
      map.interior.push_back(v);
    }
  return map;
}

Vector DofMap::restrict_vec(const Vector& full) const
{
  Vector out(interior.size());
  for (std::size_t i = 0; i < interior.size(); ++i)
    out[i] = full[interior[i]];
  return out;
}

Vector DofMap::extend(const Vector& interior_values, int n_full) const
{
  Vector out = Vector::Zero(n_full);
  for (std::size_t i = 0; i < interior.size(); ++i)
    out[interior[i]] = interior_values[i];
  return out;
}

FeFunction solve_dirichlet(const Triangulation& mesh, const SparseMatrix& A_full,
                           const Vector& b_full)
{
  const DofMap dofs = DofMap::build(mesh);
  const SparseMatrix A = A_full.submatrix(dofs.interior, dofs.interior);
  const Vector x = lu_solve(A, dofs.restrict_vec(b_full));
  FeFunction u;
  u.mesh = &mesh;
  u.values = dofs.extend(x, mesh.n_vertices());
  return u;
}

Hierarchy make_hierarchy(int coarse_level, int fine_level, MeshPattern pattern)
{
  if (fine_level < coarse_level)
    throw std::invalid_argument("make_hierarchy: fine level must be >= coarse level");
  Hierarchy h;
  h.coarse = build_block_mesh(coarse_level, pattern);
  h.fine = fine_level == coarse_level ? build_block_mesh(fine_level, pattern)
                                      : refine(h.coarse, fine_level - coarse_level);
  if (fine_level == coarse_level) {
    h.fine.parent_map.resize(h.fine.n_elements());
    for (int e = 0; e < h.fine.n_elements(); ++e)
      h.fine.parent_map[e] = e;
    h.fine.vertex_on_coarse_edge.assign(h.fine.n_vertices(), 0);
  }

  h.children.assign(h.coarse.n_elements(), {});
  for (int e = 0; e < h.fine.n_elements(); ++e)
    h.children[h.fine.parent_map[e]].push_back(e);

  // nodal injection
  {
    std::vector<Triplet> trips;
    for (int v = 0; v < h.fine.n_vertices(); ++v) {
      const int K = h.coarse.locate(h.fine.vertices[v]);
      const auto lambda = h.coarse.barycentric(K, h.fine.vertices[v]);
      for (int i = 0; i < 3; ++i)
        if (std::abs(lambda[i]) > 1e-14)
          trips.push_back({v, h.coarse.elements[K][i], lambda[i]});
    }
    h.injection = SparseMatrix::from_triplets(h.fine.n_vertices(), h.coarse.n_vertices(), trips);
  }

  // exact L2(K) projections: op = M_K^{-1} R_K with R_K assembled from the
  // fine children (all integrands are products of affine functions)
  const QuadratureRule& rule = QuadratureRule::of_degree(2);
  h.projections.resize(h.coarse.n_elements());
  for (int K = 0; K < h.coarse.n_elements(); ++K) {
    auto& proj = h.projections[K];
    std::vector<int> local;
    for (int t : h.children[K])
      for (int v : h.fine.elements[t])
        local.push_back(v);
    std::sort(local.begin(), local.end());
    local.erase(std::unique(local.begin(), local.end()), local.end());
    proj.fine_vertices = local;

    std::vector<int> pos(h.fine.n_vertices(), -1);
    for (std::size_t i = 0; i < local.size(); ++i)
      pos[local[i]] = static_cast<int>(i);

    Eigen::Matrix<double, 3, Eigen::Dynamic> R =
        Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, local.size());
    for (int t : h.children[K]) {
      const auto& el = h.fine.elements[t];
      const double a = h.fine.element_area(t);
      for (const auto& q : rule.points) {
        const Point2 x{q.bary[0] * h.fine.vertices[el[0]][0] + q.bary[1] * h.fine.vertices[el[1]][0] +
                           q.bary[2] * h.fine.vertices[el[2]][0],
                       q.bary[0] * h.fine.vertices[el[0]][1] + q.bary[1] * h.fine.vertices[el[1]][1] +
                           q.bary[2] * h.fine.vertices[el[2]][1]};
        const auto mu = h.coarse.barycentric(K, x);
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            R(i, pos[el[j]]) += a * q.weight * mu[i] * q.bary[j];
      }
    }

    Eigen::Matrix3d M;
    const double aK = h.coarse.element_area(K);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        M(i, j) = aK / 12.0 * (i == j ? 2.0 : 1.0);
    proj.coupling = R;
    proj.op = M.ldlt().solve(R);
  }

  h.coarse_dofs = DofMap::build(h.coarse);
  h.fine_dofs = DofMap::build(h.fine);
  return h;
}

Eigen::Vector3d element_l2_projection(const Hierarchy& h, int K, const Vector& fine_values)
{
  if (K < 0 || K >= h.coarse.n_elements())
    throw std::out_of_range("element_l2_projection: not a coarse element");
  const auto& proj = h.projections[K];
  Eigen::VectorXd local(proj.fine_vertices.size());
  for (std::size_t i = 0; i < proj.fine_vertices.size(); ++i)
    local[i] = fine_values[proj.fine_vertices[i]];
  return proj.op * local;
}

Vector inject(const Hierarchy& h, const Vector& coarse_values)
{
  return h.injection.multiply(coarse_values);
}

NormValues fe_norms(const Triangulation& mesh, const Vector& values, const SigmaMeans* means)
{
  NormValues out;
  double l2 = 0.0, h1 = 0.0, energy = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const TriGeom g = tri_geometry(mesh, e);
    const auto& el = mesh.elements[e];
    const double v0 = values[el[0]], v1 = values[el[1]], v2 = values[el[2]];
    const double sum = v0 + v1 + v2;
    l2 += g.area / 12.0 * (v0 * v0 + v1 * v1 + v2 * v2 + sum * sum);
    double gx = 0.0, gy = 0.0;
    for (int i = 0; i < 3; ++i) {
      gx += values[el[i]] * g.grad[i][0];
      gy += values[el[i]] * g.grad[i][1];
    }
    const double gsq = (gx * gx + gy * gy) * g.area;
    h1 += gsq;
    if (means)
      energy += means->abs_mean[e] * gsq;
  }
  out.l2 = std::sqrt(l2);
  out.h1_semi = std::sqrt(h1);
  out.sigma_energy = means ? std::sqrt(energy) : out.h1_semi;
  return out;
}

NormValues error_vs_exact(const Triangulation& mesh, const Vector& values, const ScalarField& u,
                          const GradientField& grad_u, const SigmaMeans* means, int quad_degree)
{
  const QuadratureRule& rule = QuadratureRule::of_degree(quad_degree);
  double l2 = 0.0, h1 = 0.0, energy = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const TriGeom g = tri_geometry(mesh, e);
    const auto& el = mesh.elements[e];
    double gx = 0.0, gy = 0.0;
    for (int i = 0; i < 3; ++i) {
      gx += values[el[i]] * g.grad[i][0];
      gy += values[el[i]] * g.grad[i][1];
    }
    for (const auto& q : rule.points) {
      const Point2 x{q.bary[0] * g.p[0][0] + q.bary[1] * g.p[1][0] + q.bary[2] * g.p[2][0],
                     q.bary[0] * g.p[0][1] + q.bary[1] * g.p[1][1] + q.bary[2] * g.p[2][1]};
      const double vh = q.bary[0] * values[el[0]] + q.bary[1] * values[el[1]] + q.bary[2] * values[el[2]];
      const double du = u(x[0], x[1]) - vh;
      l2 += g.area * q.weight * du * du;
      if (grad_u) {
        const auto gu = grad_u(x[0], x[1]);
        const double dx = gu[0] - gx;
        const double dy = gu[1] - gy;
        h1 += g.area * q.weight * (dx * dx + dy * dy);
        if (means)
          energy += means->abs_mean[e] * g.area * q.weight * (dx * dx + dy * dy);
      }
    }
  }
  NormValues out;
  out.l2 = std::sqrt(l2);
  out.h1_semi = std::sqrt(h1);
  out.sigma_energy = std::sqrt(energy);
  return out;
}

namespace {

Vector solve_coarse_mass(const Hierarchy& h, const Vector& rhs_full, bool dirichlet)
{
  const SparseMatrix M = assemble_mass(h.coarse);
  if (!dirichlet)
    return lu_solve(M, rhs_full);
  const DofMap& dofs = h.coarse_dofs;
  const SparseMatrix Mi = M.submatrix(dofs.interior, dofs.interior);
  const Vector ci = lu_solve(Mi, dofs.restrict_vec(rhs_full));
  return dofs.extend(ci, h.coarse.n_vertices());
}

} // namespace

Vector l2_best_approx(const Hierarchy& h, const Vector& fine_values, bool dirichlet)
{
  Vector rhs = Vector::Zero(h.coarse.n_vertices());
  for (int K = 0; K < h.coarse.n_elements(); ++K) {
    const auto& proj = h.projections[K];
    Eigen::VectorXd local(proj.fine_vertices.size());
    for (std::size_t i = 0; i < proj.fine_vertices.size(); ++i)
      local[i] = fine_values[proj.fine_vertices[i]];
    const Eigen::Vector3d r = proj.coupling * local;
    for (int i = 0; i < 3; ++i)
      rhs[h.coarse.elements[K][i]] += r[i];
  }
  return solve_coarse_mass(h, rhs, dirichlet);
}

Vector l2_best_approx_exact(const Hierarchy& h, const ScalarField& u, int quad_degree, bool dirichlet)
{
  const QuadratureRule& rule = QuadratureRule::of_degree(quad_degree);
  Vector rhs = Vector::Zero(h.coarse.n_vertices());
  for (int t = 0; t < h.fine.n_elements(); ++t) {
    const auto& el = h.fine.elements[t];
    const double a = h.fine.element_area(t);
    const int K = h.fine.parent_map[t];
    for (const auto& q : rule.points) {
      const Point2 x{q.bary[0] * h.fine.vertices[el[0]][0] + q.bary[1] * h.fine.vertices[el[1]][0] +
                         q.bary[2] * h.fine.vertices[el[2]][0],
                     q.bary[0] * h.fine.vertices[el[0]][1] + q.bary[1] * h.fine.vertices[el[1]][1] +
                         q.bary[2] * h.fine.vertices[el[2]][1]};
      const auto mu = h.coarse.barycentric(K, x);
      const double uv = u(x[0], x[1]);
      for (int i = 0; i < 3; ++i)
        rhs[h.coarse.elements[K][i]] += a * q.weight * uv * mu[i];
    }
  }
  return solve_coarse_mass(h, rhs, dirichlet);
}

} // namespace signlod
