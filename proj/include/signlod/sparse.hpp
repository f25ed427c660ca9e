// Compressed-row sparse matrices, a sparse direct solve and the saddle-point
// solve shared by all corrector and LOD systems.
#ifndef SIGNLOD_SPARSE_HPP
#define SIGNLOD_SPARSE_HPP

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace signlod {

using Vector = Eigen::VectorXd;

struct Triplet {
  int row;
  int col;
  double value;
};

/// Square or rectangular matrix in compressed row storage. Column indices are
/// strictly increasing within each row and exact zeros are dropped on
/// finalization.
class SparseMatrix {
public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

  static SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& triplets);
  static SparseMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nnz() const { return static_cast<int>(values_.size()); }

  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }

  double coeff(int i, int j) const;
  Vector multiply(const Vector& x) const;
  Vector multiply_transposed(const Vector& x) const;
  SparseMatrix transposed() const;

  /// Extracts the submatrix with the given (sorted or unsorted) row and column
  /// index sets; indices map old -> new by position.
  SparseMatrix submatrix(const std::vector<int>& row_set, const std::vector<int>& col_set) const;

  double max_abs() const;

  /// Marks the matrix symmetric after spot-checking 100 random entry pairs
  /// |A_ij - A_ji| < 1e-12 * max|A|. Throws if the check fails.
  void set_symmetric_checked(unsigned seed = 12345);
  bool is_symmetric() const { return symmetric_; }

  /// Debug dump in coordinate text format, one `i j value` line per entry.
  void dump_coordinate(std::ostream& os) const;

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_;
  std::vector<int> col_idx_;
  std::vector<double> values_;
  bool symmetric_ = false;
};

class SingularSystemError : public std::runtime_error {
public:
  SingularSystemError(const std::string& what, int pivot_row)
      : std::runtime_error(what), pivot_row_(pivot_row) {}
  int pivot_row() const { return pivot_row_; }

private:
  int pivot_row_;
};

class RankDeficientConstraints : public std::runtime_error {
public:
  RankDeficientConstraints(const std::string& what, std::vector<int> rows)
      : std::runtime_error(what), dependent_rows_(std::move(rows)) {}
  const std::vector<int>& dependent_rows() const { return dependent_rows_; }

private:
  std::vector<int> dependent_rows_;
};

/// Sparse LU factorization with partial pivoting, reusable for multiple
/// right-hand sides. Throws SingularSystemError when a pivot falls below the
/// relative threshold 1e-13.
class LuFactorization {
public:
  explicit LuFactorization(const SparseMatrix& A);
  ~LuFactorization();
  LuFactorization(LuFactorization&&) noexcept;
  LuFactorization& operator=(LuFactorization&&) noexcept;

  Vector solve(const Vector& b) const;
  int dimension() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Solves A x = b with relative residual <= 1e-10 (one refinement step is
/// applied if needed).
Vector lu_solve(const SparseMatrix& A, const Vector& b);

struct SaddleResult {
  Vector w;
  Vector lambda;
};

/// Factorization of the block system [A C^T; C 0], reusable across right-hand
/// sides (r, 0). C must have full row rank; duplicate or dependent constraint
/// rows raise RankDeficientConstraints.
class SaddleSolver {
public:
  SaddleSolver(const SparseMatrix& A, const SparseMatrix& C);
  SaddleResult solve(const Vector& r) const;

private:
  int n_;
  int k_;
  SparseMatrix block_;
  std::unique_ptr<LuFactorization> lu_;
};

SaddleResult saddle_solve(const SparseMatrix& A, const SparseMatrix& C, const Vector& r);

Eigen::SparseMatrix<double> to_eigen_sparse(const SparseMatrix& A);
SparseMatrix from_eigen_sparse(const Eigen::SparseMatrix<double>& M);

} // namespace signlod

#endif
