#include "signlod/quasi_interp.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace signlod {

InterpolationOperator::InterpolationOperator(const Hierarchy& h) : h_(&h)
{
  const Triangulation& coarse = h.coarse;
  const int nv = coarse.n_vertices();

  vertex_coarse_elems_.resize(nv);
  sharp_.resize(nv);
  for (int a = 0; a < nv; ++a) {
    vertex_coarse_elems_[a] = coarse.incident_elements(a);
    sharp_[a] = static_cast<int>(vertex_coarse_elems_[a].size());
  }

  vertex_row_.assign(nv, -1);
  row_vertex_ = h.coarse_dofs.interior;
  for (std::size_t r = 0; r < row_vertex_.size(); ++r)
    vertex_row_[row_vertex_[r]] = static_cast<int>(r);

  std::vector<Triplet> trips;
  for (std::size_t r = 0; r < row_vertex_.size(); ++r) {
    const int a = row_vertex_[r];
    std::map<int, double> row;
    for (int K : vertex_coarse_elems_[a]) {
      int loc = -1;
      for (int i = 0; i < 3; ++i)
        if (coarse.elements[K][i] == a)
          loc = i;
      const auto& proj = h.projections[K];
      for (std::size_t j = 0; j < proj.fine_vertices.size(); ++j)
        row[proj.fine_vertices[j]] += proj.op(loc, j) / sharp_[a];
    }
    for (const auto& [col, val] : row)
      if (val != 0.0)
        trips.push_back({static_cast<int>(r), col, val});
  }
  matrix_ = SparseMatrix::from_triplets(static_cast<int>(row_vertex_.size()),
                                        h.fine.n_vertices(), trips);
}

double InterpolationOperator::vertex_weight(int a, const Vector& fine_values) const
{
  const int r = vertex_row_[a];
  if (r < 0)
    throw std::invalid_argument("vertex_weight: boundary vertex has no weight functional");
  double s = 0.0;
  for (int k = matrix_.row_ptr()[r]; k < matrix_.row_ptr()[r + 1]; ++k)
    s += matrix_.values()[k] * fine_values[matrix_.col_idx()[k]];
  return s;
}

Vector InterpolationOperator::apply(const Vector& fine_values) const
{
  return matrix_.multiply(fine_values);
}

SparseMatrix InterpolationOperator::constraint_matrix(const std::vector<int>& patch_coarse_elements,
                                                      const std::vector<int>& patch_fine_dofs,
                                                      std::vector<int>* dropped_rows) const
{
  if (patch_coarse_elements.empty())
    throw std::invalid_argument("constraint_matrix: empty patch");

  std::vector<char> in_patch(h_->coarse.n_elements(), 0);
  for (int K : patch_coarse_elements)
    in_patch[K] = 1;

  std::vector<int> col_map(h_->fine.n_vertices(), -1);
  for (std::size_t j = 0; j < patch_fine_dofs.size(); ++j)
    col_map[patch_fine_dofs[j]] = static_cast<int>(j);

  std::vector<Triplet> trips;
  if (dropped_rows)
    dropped_rows->clear();
  int n_rows = 0;
  for (std::size_t r = 0; r < row_vertex_.size(); ++r) {
    const int a = row_vertex_[r];
    bool meets_patch = false;
    for (int K : vertex_coarse_elems_[a])
      if (in_patch[K]) {
        meets_patch = true;
        break;
      }
    if (!meets_patch)
      continue;

    bool any = false;
    for (int k = matrix_.row_ptr()[r]; k < matrix_.row_ptr()[r + 1]; ++k) {
      const int c = col_map[matrix_.col_idx()[k]];
      if (c >= 0) {
        trips.push_back({n_rows, c, matrix_.values()[k]});
        any = true;
      }
    }
    if (any) {
      ++n_rows;
    } else {
      // support meets the patch only through its boundary
      if (dropped_rows)
        dropped_rows->push_back(a);
    }
  }
  return SparseMatrix::from_triplets(n_rows, static_cast<int>(patch_fine_dofs.size()), trips);
}

std::vector<int> patch_interior_fine_dofs(const Hierarchy& h,
                                          const std::vector<int>& patch_coarse_elements)
{
  std::vector<char> in_patch(h.coarse.n_elements(), 0);
  for (int K : patch_coarse_elements)
    in_patch[K] = 1;

  std::vector<int> dofs;
  for (int v = 0; v < h.fine.n_vertices(); ++v) {
    if (h.fine.boundary_vertex[v])
      continue;
    bool interior = true;
    for (int k = h.fine.vertex_elem_ptr[v]; k < h.fine.vertex_elem_ptr[v + 1]; ++k)
      if (!in_patch[h.fine.parent_map[h.fine.vertex_elem[k]]]) {
        interior = false;
        break;
      }
    if (interior)
      dofs.push_back(v);
  }
  return dofs;
}

std::vector<int> patch_fine_elements(const Hierarchy& h, const std::vector<int>& patch_coarse_elements)
{
  std::vector<char> in_patch(h.coarse.n_elements(), 0);
  for (int K : patch_coarse_elements)
    in_patch[K] = 1;
  std::vector<int> out;
  for (int e = 0; e < h.fine.n_elements(); ++e)
    if (in_patch[h.fine.parent_map[e]])
      out.push_back(e);
  return out;
}

} // namespace signlod
