#include "signlod/correctors.hpp"

#include "signlod/parallel.hpp"
#include "signlod/patches.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace signlod {

FineSystem build_fine_system(const Hierarchy& h, const Coefficient& coeff,
                             const InterpolationOperator& interp, const AssemblyOptions& opts,
                             const SymmetrizationMap* sym)
{
  FineSystem fs;
  fs.h = &h;
  fs.coeff = &coeff;
  fs.interp = &interp;
  fs.sym = sym;
  fs.means = compute_sigma_means(h.fine, coeff, opts);
  fs.A_full = assemble_sigma_stiffness(h.fine, fs.means);
  return fs;
}

namespace {

// r_i = a_K(v_H, phi_i), assembled from the fine elements of K with the same
// sigma means as the global stiffness.
Vector element_rhs(const FineSystem& fs, int K, const Vector& v_H_coarse)
{
  const Hierarchy& h = *fs.h;
  Vector r = Vector::Zero(h.fine.n_vertices());
  const auto& el_K = h.coarse.elements[K];
  for (int t : h.children[K]) {
    const auto& el = h.fine.elements[t];
    const Point2& p0 = h.fine.vertices[el[0]];
    const Point2& p1 = h.fine.vertices[el[1]];
    const Point2& p2 = h.fine.vertices[el[2]];
    const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]);
    const double a = 0.5 * det;
    const std::array<std::array<double, 2>, 3> grad{
        std::array<double, 2>{(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det},
        std::array<double, 2>{(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det},
        std::array<double, 2>{(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det}};

    // v_H nodal values at the fine vertices of t (nested P1, exact)
    std::array<double, 3> v{};
    for (int j = 0; j < 3; ++j) {
      const auto mu = h.coarse.barycentric(K, h.fine.vertices[el[j]]);
      v[j] = mu[0] * v_H_coarse[el_K[0]] + mu[1] * v_H_coarse[el_K[1]] + mu[2] * v_H_coarse[el_K[2]];
    }
    double gx = 0.0, gy = 0.0;
    for (int j = 0; j < 3; ++j) {
      gx += v[j] * grad[j][0];
      gy += v[j] * grad[j][1];
    }
    const double s = fs.means.mean[t] * a;
    for (int i = 0; i < 3; ++i)
      r[el[i]] += s * (gx * grad[i][0] + gy * grad[i][1]);
  }
  return r;
}

struct PatchProblem {
  std::vector<int> dofs;
  std::unique_ptr<SaddleSolver> solver;
  bool fallback_used = false;
  bool empty = false; // no fine-scale space in the patch
};

PatchProblem make_patch_problem(const FineSystem& fs, const std::vector<int>& patch)
{
  PatchProblem p;
  p.dofs = patch_interior_fine_dofs(*fs.h, patch);
  if (p.dofs.empty()) {
    p.empty = true;
    return p;
  }
  const SparseMatrix A = fs.A_full.submatrix(p.dofs, p.dofs);
  const SparseMatrix C = fs.interp->constraint_matrix(patch, p.dofs);
  if (C.rows() >= static_cast<int>(p.dofs.size())) {
    // constraints saturate the patch space: only w = 0 remains
    p.empty = true;
    return p;
  }
  p.solver = std::make_unique<SaddleSolver>(A, C);
  return p;
}

Vector solve_on_patch(const FineSystem& fs, const PatchProblem& p, const Vector& r_full)
{
  Vector out = Vector::Zero(fs.h->fine.n_vertices());
  if (p.empty)
    return out;
  Vector r(p.dofs.size());
  for (std::size_t i = 0; i < p.dofs.size(); ++i)
    r[i] = r_full[p.dofs[i]];
  const Vector w = p.solver->solve(r).w;
  for (std::size_t i = 0; i < p.dofs.size(); ++i)
    out[p.dofs[i]] = w[i];
  return out;
}

} // namespace

Vector ideal_element_corrector(const FineSystem& fs, int K, const Vector& v_H_coarse)
{
  std::vector<int> all(fs.h->coarse.n_elements());
  for (int i = 0; i < fs.h->coarse.n_elements(); ++i)
    all[i] = i;
  PatchProblem p = make_patch_problem(fs, all);
  return solve_on_patch(fs, p, element_rhs(fs, K, v_H_coarse));
}

Vector localized_element_corrector(const FineSystem& fs, int K, const Vector& v_H_coarse, int m,
                                   bool* fallback_used)
{
  if (m < 1)
    throw std::invalid_argument("localized_element_corrector: m must be >= 1");
  const SymmetricPatch patch = symmetric_patch(fs.h->coarse, K, m, fs.coeff->geom, fs.sym);
  if (fallback_used)
    *fallback_used = patch.fallback_used;
  PatchProblem p = make_patch_problem(fs, patch.elements);
  return solve_on_patch(fs, p, element_rhs(fs, K, v_H_coarse));
}

Vector CorrectorSet::dense(int j, int n_fine) const
{
  Vector out = Vector::Zero(n_fine);
  for (std::size_t i = 0; i < support[j].size(); ++i)
    out[support[j][i]] = coeffs[j][i];
  return out;
}

CorrectorSet corrector_basis(const FineSystem& fs, int m, int threads)
{
  const Hierarchy& h = *fs.h;
  const InterpolationOperator& interp = *fs.interp;

  CorrectorSet set;
  set.m = m;
  set.basis_vertices = interp.row_vertices();
  set.element_fallback.assign(h.coarse.n_elements(), 0);

  const int ne = h.coarse.n_elements();
  // per-element contributions (up to 3 hat functions); merged in element order
  struct ElementResult {
    std::vector<int> dofs;
    std::array<int, 3> rows{-1, -1, -1};
    std::array<Vector, 3> w;
    bool fallback = false;
  };
  std::vector<ElementResult> results(ne);

  parallel_for(ne, [&](int K) {
    ElementResult& res = results[K];
    const SymmetricPatch patch = symmetric_patch(h.coarse, K, m, fs.coeff->geom, fs.sym);
    res.fallback = patch.fallback_used;
    PatchProblem p = make_patch_problem(fs, patch.elements);
    if (p.empty)
      return;

    const auto& el_K = h.coarse.elements[K];
    Vector hat = Vector::Zero(h.coarse.n_vertices());
    for (int loc = 0; loc < 3; ++loc) {
      const int a = el_K[loc];
      const int row = interp.row_of_vertex(a);
      if (row < 0)
        continue; // boundary vertex carries no basis function
      hat[a] = 1.0;
      const Vector r_full = element_rhs(fs, K, hat);
      hat[a] = 0.0;

      Vector r(p.dofs.size());
      for (std::size_t i = 0; i < p.dofs.size(); ++i)
        r[i] = r_full[p.dofs[i]];
      res.rows[loc] = row;
      res.w[loc] = p.solver->solve(r).w;
    }
    res.dofs = std::move(p.dofs);
  }, threads);

  // deterministic merge
  std::vector<std::map<int, double>> acc(interp.n_rows());
  for (int K = 0; K < ne; ++K) {
    const ElementResult& res = results[K];
    set.element_fallback[K] = res.fallback;
    for (int loc = 0; loc < 3; ++loc) {
      if (res.rows[loc] < 0)
        continue;
      auto& bucket = acc[res.rows[loc]];
      for (std::size_t i = 0; i < res.dofs.size(); ++i)
        if (res.w[loc][i] != 0.0)
          bucket[res.dofs[i]] += res.w[loc][i];
    }
  }

  set.support.resize(interp.n_rows());
  set.coeffs.resize(interp.n_rows());
  for (int j = 0; j < interp.n_rows(); ++j) {
    set.support[j].reserve(acc[j].size());
    set.coeffs[j].resize(acc[j].size());
    int i = 0;
    for (const auto& [dof, val] : acc[j]) {
      set.support[j].push_back(dof);
      set.coeffs[j][i++] = val;
    }
  }
  return set;
}

DecayProfile decay_profile(const FineSystem& fs, int K, const Vector& v_H_coarse, int m_max)
{
  const Hierarchy& h = *fs.h;
  const Vector q = ideal_element_corrector(fs, K, v_H_coarse);

  DecayProfile profile;
  for (int m = 0; m <= m_max; ++m) {
    const SymmetricPatch patch = symmetric_patch(h.coarse, K, m, fs.coeff->geom, fs.sym);
    std::vector<char> in_patch(h.coarse.n_elements(), 0);
    for (int e : patch.elements)
      in_patch[e] = 1;

    double l2 = 0.0, h1 = 0.0;
    for (int t = 0; t < h.fine.n_elements(); ++t) {
      if (in_patch[h.fine.parent_map[t]])
        continue;
      const auto& el = h.fine.elements[t];
      const Point2& p0 = h.fine.vertices[el[0]];
      const Point2& p1 = h.fine.vertices[el[1]];
      const Point2& p2 = h.fine.vertices[el[2]];
      const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]);
      const double a = 0.5 * det;
      const double v0 = q[el[0]], v1 = q[el[1]], v2 = q[el[2]];
      const double sum = v0 + v1 + v2;
      l2 += a / 12.0 * (v0 * v0 + v1 * v1 + v2 * v2 + sum * sum);
      const std::array<std::array<double, 2>, 3> grad{
          std::array<double, 2>{(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det},
          std::array<double, 2>{(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det},
          std::array<double, 2>{(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det}};
      double gx = 0.0, gy = 0.0;
      for (int i = 0; i < 3; ++i) {
        gx += q[el[i]] * grad[i][0];
        gy += q[el[i]] * grad[i][1];
      }
      h1 += a * (gx * gx + gy * gy);
    }
    profile.tail.push_back(std::sqrt(l2 + h1));
  }

  // least-squares slope of log(tail) over the positive tails
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (int m = 0; m <= m_max; ++m) {
    if (profile.tail[m] <= 1e-14)
      continue;
    const double y = std::log(profile.tail[m]);
    sx += m;
    sy += y;
    sxx += m * static_cast<double>(m);
    sxy += m * y;
    ++n;
  }
  if (n >= 2)
    profile.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return profile;
}

} // namespace signlod
