#include "signlod/tcoercivity.hpp"

#include "signlod/parallel.hpp"
#include "signlod/patches.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace signlod {

namespace {

constexpr double kGeomTol = 1e-12;

struct RefTriangle {
  std::array<Point2, 3> p;
  double area;
  std::array<std::array<double, 2>, 3> grad;
};

RefTriangle reference_triangle()
{
  // (0,0),(1,0),(0,1) scaled to diameter 1
  const double s = 1.0 / std::sqrt(2.0);
  RefTriangle t;
  t.p = {Point2{0.0, 0.0}, Point2{s, 0.0}, Point2{0.0, s}};
  const double det = s * s;
  t.area = 0.5 * det;
  t.grad[0] = {-1.0 / s, -1.0 / s};
  t.grad[1] = {1.0 / s, 0.0};
  t.grad[2] = {0.0, 1.0 / s};
  return t;
}

} // namespace

ReferenceConstants reference_constants()
{
  const RefTriangle t = reference_triangle();
  const QuadratureRule& rule = QuadratureRule::of_degree(8);

  Eigen::Matrix3d M = Eigen::Matrix3d::Zero();  // P1 mass
  Eigen::Matrix3d Mb = Eigen::Matrix3d::Zero(); // bubble-weighted P1 mass
  Eigen::Matrix3d K = Eigen::Matrix3d::Zero();  // P1 stiffness
  for (const auto& q : rule.points) {
    const double b = q.bary[0] * q.bary[1] * q.bary[2];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        M(i, j) += t.area * q.weight * q.bary[i] * q.bary[j];
        Mb(i, j) += t.area * q.weight * b * q.bary[i] * q.bary[j];
      }
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      K(i, j) = t.area * (t.grad[i][0] * t.grad[j][0] + t.grad[i][1] * t.grad[j][1]);

  ReferenceConstants out;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix3d> norm_eig(M, Mb);
  out.c_norm = std::sqrt(norm_eig.eigenvalues().maxCoeff());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix3d> inv_eig(K, M);
  out.c_inv = std::sqrt(inv_eig.eigenvalues().maxCoeff());
  const Eigen::Matrix3d Minv = M.inverse();
  double mx = 0.0;
  for (int v = 0; v < 3; ++v)
    mx = std::max(mx, Minv(v, v));
  out.c_inf = std::sqrt(t.area) * std::sqrt(mx);
  return out;
}

double SymmetrizationMap::pull_from(double x2) const
{
  const double t_minus = minus_above ? 1.0 - l : l;
  const double t_plus = 1.0 - t_minus;
  return minus_above ? l + (l - x2) * t_minus / t_plus : l - (x2 - l) * t_minus / t_plus;
}

double SymmetrizationMap::push_to(double y2) const
{
  const double t_minus = minus_above ? 1.0 - l : l;
  const double t_plus = 1.0 - t_minus;
  return minus_above ? l - (y2 - l) * t_plus / t_minus : l + (l - y2) * t_plus / t_minus;
}

bool SymmetrizationMap::consistent_with(const InterfaceGeometry& geom) const
{
  return geom.kind == InterfaceGeometry::Kind::flat_horizontal &&
         std::abs(geom.flat_height - l) < kGeomTol && geom.minus_above == minus_above;
}

SymmetrizationMap build_symmetrization(const InterfaceGeometry& geom)
{
  if (geom.kind != InterfaceGeometry::Kind::flat_horizontal)
    throw std::invalid_argument("build_symmetrization: only flat interfaces are supported");
  SymmetrizationMap sym;
  sym.l = geom.flat_height;
  sym.minus_above = geom.minus_above;
  const double t_minus = sym.minus_above ? 1.0 - sym.l : sym.l;
  const double t_plus = 1.0 - t_minus;
  sym.c_pm = 2.0 * std::sqrt(std::max(t_minus / t_plus, t_plus / t_minus));
  sym.c0_pm = 2.0 * std::sqrt(t_plus / t_minus);
  return sym;
}

Vector apply_T(const SymmetrizationMap& sym, const Triangulation& fine, const Vector& values)
{
  const int n = 1 << fine.level;
  const double on_grid = sym.l * n;
  if (std::abs(on_grid - std::round(on_grid)) > 1e-9)
    throw std::invalid_argument("apply_T: fine mesh does not contain the interface line");

  FeFunction v{&fine, values};
  Vector out(values.size());
  for (int i = 0; i < fine.n_vertices(); ++i) {
    const Point2& p = fine.vertices[i];
    const double offset = sym.minus_above ? p[1] - sym.l : sym.l - p[1]; // > 0 in Omega_-
    if (offset > -kGeomTol) {
      out[i] = -values[i];
    } else {
      const double src = sym.pull_from(p[1]);
      out[i] = values[i] - 2.0 * v.eval({p[0], src});
    }
  }
  return out;
}

DualFunction build_dual_function(const Hierarchy& h, const InterpolationOperator& interp,
                                 const InterfaceGeometry& geom, int vertex)
{
  const Triangulation& coarse = h.coarse;
  if (coarse.boundary_vertex[vertex])
    throw std::invalid_argument("build_dual_function: boundary vertex");

  // K*: element of omega^a contained in the closure of Omega_+
  int host = -1;
  double best_area = -1.0;
  for (int K : coarse.incident_elements(vertex)) {
    if (element_minus_area(coarse, K, geom) > kGeomTol)
      continue;
    const double a = coarse.element_area(K);
    if (a > best_area + kGeomTol) {
      best_area = a;
      host = K;
    }
  }
  if (host < 0)
    throw std::runtime_error("build_dual_function: no coarse element of omega^a inside Omega_+ "
                             "(mesh does not resolve the interface)");

  DualFunction dual;
  dual.vertex = vertex;
  dual.host_element = host;
  const int sharp = interp.sharp(vertex);

  int loc = -1;
  for (int i = 0; i < 3; ++i)
    if (coarse.elements[host][i] == vertex)
      loc = i;

  // bubble-weighted 3x3 system (b w, q) = sharp * (psi^a, q) for q in P1
  const QuadratureRule& rule = QuadratureRule::of_degree(8);
  Eigen::Matrix3d B = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  const double area = coarse.element_area(host);
  for (const auto& q : rule.points) {
    const double b = q.bary[0] * q.bary[1] * q.bary[2];
    for (int i = 0; i < 3; ++i) {
      rhs[i] += area * q.weight * sharp * q.bary[loc] * q.bary[i];
      for (int j = 0; j < 3; ++j)
        B(i, j) += area * q.weight * b * q.bary[i] * q.bary[j];
    }
  }
  dual.bubble_w = B.ldlt().solve(rhs);

  // |eta|_{1,K*} of eta = b*w by quadrature (integrand of degree 6)
  {
    const auto& el = coarse.elements[host];
    const Point2& p0 = coarse.vertices[el[0]];
    const Point2& p1 = coarse.vertices[el[1]];
    const Point2& p2 = coarse.vertices[el[2]];
    const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]);
    std::array<std::array<double, 2>, 3> grad;
    grad[0] = {(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det};
    grad[1] = {(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det};
    grad[2] = {(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det};
    double h1sq = 0.0;
    for (const auto& q : rule.points) {
      const double l0 = q.bary[0], l1 = q.bary[1], l2 = q.bary[2];
      const double w = dual.bubble_w[0] * l0 + dual.bubble_w[1] * l1 + dual.bubble_w[2] * l2;
      double gx = 0.0, gy = 0.0;
      // grad b = l1 l2 grad l0 + l0 l2 grad l1 + l0 l1 grad l2
      const std::array<double, 3> bfac{l1 * l2, l0 * l2, l0 * l1};
      for (int i = 0; i < 3; ++i) {
        gx += w * bfac[i] * grad[i][0] + l0 * l1 * l2 * dual.bubble_w[i] * grad[i][0];
        gy += w * bfac[i] * grad[i][1] + l0 * l1 * l2 * dual.bubble_w[i] * grad[i][1];
      }
      h1sq += area * q.weight * (gx * gx + gy * gy);
    }
    dual.h1_seminorm = std::sqrt(h1sq);
  }

  // Discrete representation on the fine vertices strictly inside K*: the
  // energy-minimal fine function with the same P1 moments, so that
  // m^{a'}(eta_h) = delta exactly and T_H maps W cap V_h into itself.
  dual.fine_dofs = patch_interior_fine_dofs(h, {host});
  const int n_int = static_cast<int>(dual.fine_dofs.size());
  if (n_int < 3)
    throw std::runtime_error("build_dual_function: fine mesh too coarse for a discrete dual "
                             "(need at least two refinement levels)");

  const auto& proj = h.projections[host];
  std::vector<int> pos_in_proj(n_int, -1);
  for (int i = 0; i < n_int; ++i) {
    const auto it = std::find(proj.fine_vertices.begin(), proj.fine_vertices.end(), dual.fine_dofs[i]);
    pos_in_proj[i] = static_cast<int>(it - proj.fine_vertices.begin());
  }
  Eigen::MatrixXd G(3, n_int);
  for (int i = 0; i < n_int; ++i)
    G.col(i) = proj.coupling.col(pos_in_proj[i]);

  // local H1 stiffness over the interior dofs
  std::vector<int> dof_pos(h.fine.n_vertices(), -1);
  for (int i = 0; i < n_int; ++i)
    dof_pos[dual.fine_dofs[i]] = i;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n_int, n_int);
  for (int t : h.children[host]) {
    const auto& el = h.fine.elements[t];
    const Point2& p0 = h.fine.vertices[el[0]];
    const Point2& p1 = h.fine.vertices[el[1]];
    const Point2& p2 = h.fine.vertices[el[2]];
    const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]);
    const double a = 0.5 * det;
    std::array<std::array<double, 2>, 3> grad;
    grad[0] = {(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det};
    grad[1] = {(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det};
    grad[2] = {(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const int di = dof_pos[el[i]];
        const int dj = dof_pos[el[j]];
        if (di >= 0 && dj >= 0)
          A(di, dj) += a * (grad[i][0] * grad[j][0] + grad[i][1] * grad[j][1]);
      }
  }

  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n_int + 3, n_int + 3);
  kkt.topLeftCorner(n_int, n_int) = A;
  kkt.topRightCorner(n_int, 3) = G.transpose();
  kkt.bottomLeftCorner(3, n_int) = G;
  Eigen::VectorXd kkt_rhs = Eigen::VectorXd::Zero(n_int + 3);
  kkt_rhs.tail(3) = rhs;
  const Eigen::VectorXd sol = Eigen::FullPivLU<Eigen::MatrixXd>(kkt).solve(kkt_rhs);
  dual.fine_values = sol.head(n_int);

  if ((G * dual.fine_values - rhs).lpNorm<Eigen::Infinity>() > 1e-10 * (1.0 + rhs.norm()))
    throw std::runtime_error("build_dual_function: moment system not solvable");
  return dual;
}

std::vector<DualFunction> build_all_duals(const Hierarchy& h, const InterpolationOperator& interp,
                                          const InterfaceGeometry& geom,
                                          const VertexClasses& classes, int threads)
{
  std::vector<int> verts = classes.plus_verts;
  verts.insert(verts.end(), classes.interface_verts.begin(), classes.interface_verts.end());
  std::sort(verts.begin(), verts.end());

  std::vector<DualFunction> duals(verts.size());
  parallel_for(static_cast<int>(verts.size()),
               [&](int i) { duals[i] = build_dual_function(h, interp, geom, verts[i]); }, threads);
  return duals;
}

Vector apply_T_H(const SymmetrizationMap& sym, const std::vector<DualFunction>& duals,
                 const InterpolationOperator& interp, const Triangulation& fine,
                 const Vector& values)
{
  Vector t = apply_T(sym, fine, values);
  for (const DualFunction& d : duals) {
    const double w = interp.vertex_weight(d.vertex, t);
    if (w == 0.0)
      continue;
    for (std::size_t i = 0; i < d.fine_dofs.size(); ++i)
      t[d.fine_dofs[i]] -= w * d.fine_values[i];
  }
  return t;
}

namespace {

double restricted_h1(const Triangulation& mesh, const Vector& values,
                     const std::vector<char>& keep)
{
  double acc = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    if (!keep[e])
      continue;
    const auto& el = mesh.elements[e];
    const Point2& p0 = mesh.vertices[el[0]];
    const Point2& p1 = mesh.vertices[el[1]];
    const Point2& p2 = mesh.vertices[el[2]];
    const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]);
    const double a = 0.5 * det;
    const std::array<std::array<double, 2>, 3> grad{
        std::array<double, 2>{(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det},
        std::array<double, 2>{(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det},
        std::array<double, 2>{(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det}};
    double gx = 0.0, gy = 0.0;
    for (int i = 0; i < 3; ++i) {
      gx += values[el[i]] * grad[i][0];
      gy += values[el[i]] * grad[i][1];
    }
    acc += a * (gx * gx + gy * gy);
  }
  return std::sqrt(acc);
}

} // namespace

void CoercivityReport::write_json(std::ostream& os) const
{
  nlohmann::json j;
  j["contrast"] = contrast;
  j["alpha_theoretical"] = alpha_theoretical;
  j["alpha_sampled_min"] = alpha_sampled_min;
  j["alpha_sampled_median"] = alpha_sampled_median;
  j["alpha_fullspace_min"] = alpha_fullspace_min;
  j["c_pm_T"] = c_pm_T;
  j["c_pm_TH_measured"] = c_pm_TH_measured;
  j["samples"] = samples;
  os << j.dump(2) << '\n';
}

CoercivityReport coercivity_probe(const Hierarchy& h, const Coefficient& coeff,
                                  const SymmetrizationMap& sym,
                                  const std::vector<DualFunction>& duals,
                                  const InterpolationOperator& interp, int samples, unsigned seed)
{
  const Triangulation& fine = h.fine;
  AssemblyOptions opts;
  opts.quad_degree = 2;
  const SigmaMeans means = compute_sigma_means(fine, coeff, opts);
  const SparseMatrix A_sigma = assemble_sigma_stiffness(fine, means);
  SigmaMeans abs_means{means.abs_mean, means.abs_mean};
  const SparseMatrix A_abs = assemble_sigma_stiffness(fine, abs_means);
  SigmaMeans ones{Vector::Ones(fine.n_elements()), Vector::Ones(fine.n_elements())};
  const SparseMatrix A_one = assemble_sigma_stiffness(fine, ones);

  const DofMap& dofs = h.fine_dofs;
  const SparseMatrix A1_ii = A_one.submatrix(dofs.interior, dofs.interior);

  // kernel constraints over the whole domain
  std::vector<int> all_coarse(h.coarse.n_elements());
  for (int K = 0; K < h.coarse.n_elements(); ++K)
    all_coarse[K] = K;
  const SparseMatrix C = interp.constraint_matrix(all_coarse, dofs.interior);
  SaddleSolver projector(A1_ii, C);

  // element membership in Omega_+/Omega_- by barycenter
  std::vector<char> plus_el(fine.n_elements(), 0), minus_el(fine.n_elements(), 0);
  for (int e = 0; e < fine.n_elements(); ++e) {
    const auto side = coeff.geom.side(fine.barycenter(e));
    plus_el[e] = side == InterfaceGeometry::Side::plus;
    minus_el[e] = side == InterfaceGeometry::Side::minus;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  std::vector<double> ratios, ratios_T;
  double c_pm_measured = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vector v_int(dofs.interior.size());
    for (int i = 0; i < v_int.size(); ++i)
      v_int[i] = unif(rng);

    // full-space probe with T
    {
      const Vector v_full = dofs.extend(v_int, fine.n_vertices());
      const Vector tv = apply_T(sym, fine, v_full);
      const double denom = v_full.dot(A_abs.multiply(v_full));
      ratios_T.push_back(v_full.dot(A_sigma.multiply(tv)) / denom);
    }

    // kernel probe with T_H
    const Vector w_int = projector.solve(A1_ii.multiply(v_int)).w;
    Vector w = dofs.extend(w_int, fine.n_vertices());
    const double wnorm = w.lpNorm<Eigen::Infinity>();
    if (wnorm < 1e-14)
      continue;
    const Vector thw = apply_T_H(sym, duals, interp, fine, w);
    const double denom = w.dot(A_abs.multiply(w));
    ratios.push_back(w.dot(A_sigma.multiply(thw)) / denom);

    const Vector diff = w - thw;
    const double num = restricted_h1(fine, diff, plus_el);
    const double den = restricted_h1(fine, w, minus_el);
    if (den > 1e-14)
      c_pm_measured = std::max(c_pm_measured, num / den);
  }

  CoercivityReport report;
  report.samples = static_cast<int>(ratios.size());
  report.contrast = coeff.contrast();
  report.c_pm_T = sym.c_pm;
  report.c_pm_TH_measured = c_pm_measured;
  report.alpha_theoretical = 1.0 - 0.5 * c_pm_measured * (coeff.sup_plus / coeff.inf_plus) *
                                       std::sqrt(coeff.sigma_plus / coeff.sigma_minus);
  std::sort(ratios.begin(), ratios.end());
  if (!ratios.empty()) {
    report.alpha_sampled_min = ratios.front();
    report.alpha_sampled_median = ratios[ratios.size() / 2];
  }
  if (!ratios_T.empty())
    report.alpha_fullspace_min = *std::min_element(ratios_T.begin(), ratios_T.end());
  return report;
}

} // namespace signlod
