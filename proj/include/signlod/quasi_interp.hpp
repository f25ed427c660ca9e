// Oswald-type quasi-interpolation I_H: vertex weights m^a, the fine-to-coarse
// interpolation matrix and the kernel constraint matrices.
#ifndef SIGNLOD_QUASI_INTERP_HPP
#define SIGNLOD_QUASI_INTERP_HPP

#include "signlod/fem.hpp"
#include "signlod/sparse.hpp"

#include <vector>

namespace signlod {

/// For each interior coarse vertex a, the functional
///   m^a(v) = (1/#a) sum_{K in T_H^a} (P_K v)(a)
/// expressed as a sparse row over fine nodal values. Rows only involve fine
/// vertices inside omega^a and reproduce coarse P1 functions exactly.
class InterpolationOperator {
public:
  explicit InterpolationOperator(const Hierarchy& h);

  const Hierarchy& hierarchy() const { return *h_; }
  int n_rows() const { return static_cast<int>(row_vertex_.size()); }
  /// Coarse vertex id of each row.
  const std::vector<int>& row_vertices() const { return row_vertex_; }
  /// Row index of a coarse vertex, -1 for boundary vertices.
  int row_of_vertex(int a) const { return vertex_row_[a]; }
  /// Number of coarse elements touching vertex a.
  int sharp(int a) const { return sharp_[a]; }

  /// m^a(v) for a fine nodal vector v. Throws for boundary vertices.
  double vertex_weight(int a, const Vector& fine_values) const;

  /// All weights at once: (I v)_row = m^{a(row)}(v).
  Vector apply(const Vector& fine_values) const;

  /// Sparse matrix of the weight rows, interior-coarse x fine.
  const SparseMatrix& interpolation_matrix() const { return matrix_; }

  /// Constraint matrix of W(patch): rows are the weight functionals of every
  /// interior coarse vertex whose support meets the patch, columns restricted
  /// to the given fine dofs. Identically-zero rows are dropped and reported.
  SparseMatrix constraint_matrix(const std::vector<int>& patch_coarse_elements,
                                 const std::vector<int>& patch_fine_dofs,
                                 std::vector<int>* dropped_rows = nullptr) const;

private:
  const Hierarchy* h_;
  std::vector<int> row_vertex_;
  std::vector<int> vertex_row_;
  std::vector<int> sharp_;
  SparseMatrix matrix_;
  std::vector<std::vector<int>> vertex_coarse_elems_; // omega^a element lists
};

/// Fine vertices strictly inside the union of the given coarse elements: all
/// incident fine elements have parents in the patch and the vertex is not on
/// the domain boundary.
std::vector<int> patch_interior_fine_dofs(const Hierarchy& h,
                                          const std::vector<int>& patch_coarse_elements);

/// Fine elements whose parent lies in the patch.
std::vector<int> patch_fine_elements(const Hierarchy& h,
                                     const std::vector<int>& patch_coarse_elements);

} // namespace signlod

#endif
