#include "signlod/sparse.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

namespace signlod {

Eigen::SparseMatrix<double> to_eigen_sparse(const SparseMatrix& A)
{
  Eigen::SparseMatrix<double> M(A.rows(), A.cols());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(A.nnz());
  for (int i = 0; i < A.rows(); ++i)
    for (int k = A.row_ptr()[i]; k < A.row_ptr()[i + 1]; ++k)
      trips.emplace_back(i, A.col_idx()[k], A.values()[k]);
  M.setFromTriplets(trips.begin(), trips.end());
  M.makeCompressed();
  return M;
}

SparseMatrix from_eigen_sparse(const Eigen::SparseMatrix<double>& M)
{
  std::vector<Triplet> trips;
  trips.reserve(M.nonZeros());
  for (int k = 0; k < M.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(M, k); it; ++it)
      trips.push_back({static_cast<int>(it.row()), static_cast<int>(it.col()), it.value()});
  return SparseMatrix::from_triplets(static_cast<int>(M.rows()), static_cast<int>(M.cols()), trips);
}

namespace {

// Structural singularity is diagnosed up front so the error can name the row.
int find_empty_row_or_col(const SparseMatrix& A)
{
  std::vector<char> row_used(A.rows(), 0), col_used(A.cols(), 0);
  for (int i = 0; i < A.rows(); ++i)
    for (int k = A.row_ptr()[i]; k < A.row_ptr()[i + 1]; ++k) {
      row_used[i] = 1;
      col_used[A.col_idx()[k]] = 1;
    }
  for (int i = 0; i < A.rows(); ++i)
    if (!row_used[i])
      return i;
  for (int j = 0; j < A.cols(); ++j)
    if (!col_used[j])
      return j;
  return -1;
}

} // namespace

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, const std::vector<Triplet>& triplets)
{
  SparseMatrix A(rows, cols);
  std::vector<Triplet> sorted = triplets;
  std::sort(sorted.begin(), sorted.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  std::vector<int> counts(rows, 0);
  A.col_idx_.reserve(sorted.size());
  A.values_.reserve(sorted.size());
  std::size_t i = 0;
  while (i < sorted.size()) {
    const int r = sorted[i].row;
    const int c = sorted[i].col;
    if (r < 0 || r >= rows || c < 0 || c >= cols)
      throw std::out_of_range("SparseMatrix::from_triplets: index out of range");
    double v = 0.0;
    while (i < sorted.size() && sorted[i].row == r && sorted[i].col == c)
      v += sorted[i++].value;
    if (v != 0.0) {
      A.col_idx_.push_back(c);
      A.values_.push_back(v);
      ++counts[r];
    }
  }
  for (int r = 0; r < rows; ++r)
    A.row_ptr_[r + 1] = A.row_ptr_[r] + counts[r];
  return A;
}

SparseMatrix SparseMatrix::identity(int n)
{
  std::vector<Triplet> t;
  t.reserve(n);
  for (int i = 0; i < n; ++i)
    t.push_back({i, i, 1.0});
  return from_triplets(n, n, t);
}

double SparseMatrix::coeff(int i, int j) const
{
  for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
    if (col_idx_[k] == j)
      return values_[k];
  return 0.0;
}

Vector SparseMatrix::multiply(const Vector& x) const
{
  if (x.size() != cols_)
    throw std::invalid_argument("SparseMatrix::multiply: dimension mismatch");
  Vector y = Vector::Zero(rows_);
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      s += values_[k] * x[col_idx_[k]];
    y[i] = s;
  }
  return y;
}

Vector SparseMatrix::multiply_transposed(const Vector& x) const
{
  if (x.size() != rows_)
    throw std::invalid_argument("SparseMatrix::multiply_transposed: dimension mismatch");
  Vector y = Vector::Zero(cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      y[col_idx_[k]] += values_[k] * x[i];
  return y;
}

SparseMatrix SparseMatrix::transposed() const
{
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (int i = 0; i < rows_; ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      t.push_back({col_idx_[k], i, values_[k]});
  return from_triplets(cols_, rows_, t);
}

SparseMatrix SparseMatrix::submatrix(const std::vector<int>& row_set, const std::vector<int>& col_set) const
{
  std::vector<int> col_map(cols_, -1);
  for (std::size_t j = 0; j < col_set.size(); ++j)
    col_map[col_set[j]] = static_cast<int>(j);

  std::vector<Triplet> t;
  for (std::size_t i = 0; i < row_set.size(); ++i) {
    const int r = row_set[i];
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const int c = col_map[col_idx_[k]];
      if (c >= 0)
        t.push_back({static_cast<int>(i), c, values_[k]});
    }
  }
  return from_triplets(static_cast<int>(row_set.size()), static_cast<int>(col_set.size()), t);
}

double SparseMatrix::max_abs() const
{
  double m = 0.0;
  for (double v : values_)
    m = std::max(m, std::abs(v));
  return m;
}

void SparseMatrix::set_symmetric_checked(unsigned seed)
{
  if (rows_ != cols_)
    throw std::logic_error("set_symmetric_checked: matrix not square");
  const double scale = max_abs();
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> pick(0, std::max(0, nnz() - 1));
  for (int s = 0; s < 100 && nnz() > 0; ++s) {
    const int k = pick(rng);
    int i = static_cast<int>(std::upper_bound(row_ptr_.begin(), row_ptr_.end(), k) - row_ptr_.begin()) - 1;
    const int j = col_idx_[k];
    if (std::abs(values_[k] - coeff(j, i)) > 1e-12 * scale)
      throw std::logic_error("set_symmetric_checked: symmetry spot-check failed");
  }
  symmetric_ = true;
}

void SparseMatrix::dump_coordinate(std::ostream& os) const
{
  for (int i = 0; i < rows_; ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      os << i << ' ' << col_idx_[k] << ' ' << values_[k] << '\n';
}

struct LuFactorization::Impl {
  Eigen::SparseMatrix<double> mat;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> solver;
};

LuFactorization::LuFactorization(const SparseMatrix& A) : impl_(std::make_unique<Impl>())
{
  if (A.rows() != A.cols())
    throw std::invalid_argument("LuFactorization: matrix must be square");

  const int empty = find_empty_row_or_col(A);
  if (empty >= 0)
    throw SingularSystemError(
        "singular system: structurally empty row/column " + std::to_string(empty), empty);

  impl_->mat = to_eigen_sparse(A);
  impl_->solver.setPivotThreshold(1e-13);
  impl_->solver.analyzePattern(impl_->mat);
  impl_->solver.factorize(impl_->mat);
  if (impl_->solver.info() != Eigen::Success) {
    // The backend reports the offending column in its message when known.
    std::string detail = impl_->solver.lastErrorMessage();
    int row = -1;
    const auto pos = detail.find_last_not_of("0123456789");
    if (pos != std::string::npos && pos + 1 < detail.size())
      row = std::stoi(detail.substr(pos + 1));
    throw SingularSystemError("singular system: pivot failure at row " + std::to_string(row) +
                                  " (" + detail + ")",
                              row);
  }
}

LuFactorization::~LuFactorization() = default;
LuFactorization::LuFactorization(LuFactorization&&) noexcept = default;
LuFactorization& LuFactorization::operator=(LuFactorization&&) noexcept = default;

int LuFactorization::dimension() const { return static_cast<int>(impl_->mat.rows()); }

Vector LuFactorization::solve(const Vector& b) const
{
  Vector x = impl_->solver.solve(b);
  if (impl_->solver.info() != Eigen::Success)
    throw SingularSystemError("singular system: back substitution failed", -1);

  const double bnorm = std::max(b.norm(), 1e-300);
  double res = (b - impl_->mat * x).norm() / bnorm;
  if (res > 1e-10) {
    // one step of iterative refinement
    Vector dx = impl_->solver.solve(b - impl_->mat * x);
    x += dx;
    res = (b - impl_->mat * x).norm() / bnorm;
    if (res > 1e-10)
      throw SingularSystemError(
          "singular system: residual " + std::to_string(res) + " exceeds tolerance", -1);
  }
  return x;
}

Vector lu_solve(const SparseMatrix& A, const Vector& b)
{
  LuFactorization lu(A);
  return lu.solve(b);
}

namespace {

// Rank diagnosis for a failed saddle factorization: exact duplicate rows are
// reported directly, otherwise a pivoted QR of C^T identifies dependent rows.
std::vector<int> dependent_constraint_rows(const SparseMatrix& C)
{
  std::map<std::pair<std::vector<int>, std::vector<double>>, int> seen;
  std::vector<int> dup;
  for (int i = 0; i < C.rows(); ++i) {
    std::vector<int> cols(C.col_idx().begin() + C.row_ptr()[i], C.col_idx().begin() + C.row_ptr()[i + 1]);
    std::vector<double> vals(C.values().begin() + C.row_ptr()[i], C.values().begin() + C.row_ptr()[i + 1]);
    auto key = std::make_pair(std::move(cols), std::move(vals));
    auto [it, inserted] = seen.emplace(std::move(key), i);
    if (!inserted)
      dup.push_back(i);
  }
  if (!dup.empty())
    return dup;

  Eigen::MatrixXd Ct = Eigen::MatrixXd::Zero(C.cols(), C.rows());
  for (int i = 0; i < C.rows(); ++i)
    for (int k = C.row_ptr()[i]; k < C.row_ptr()[i + 1]; ++k)
      Ct(C.col_idx()[k], i) = C.values()[k];
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Ct);
  qr.setThreshold(1e-12);
  const int rank = static_cast<int>(qr.rank());
  std::vector<int> dep;
  for (int j = rank; j < C.rows(); ++j)
    dep.push_back(static_cast<int>(qr.colsPermutation().indices()[j]));
  std::sort(dep.begin(), dep.end());
  return dep;
}

std::string join_ints(const std::vector<int>& v)
{
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i)
    os << (i ? ", " : "") << v[i];
  return os.str();
}

} // namespace

SaddleSolver::SaddleSolver(const SparseMatrix& A, const SparseMatrix& C) : n_(A.rows()), k_(C.rows())
{
  if (A.rows() != A.cols())
    throw std::invalid_argument("saddle_solve: A must be square");
  if (C.cols() != A.cols())
    throw std::invalid_argument("saddle_solve: C column count must match A");
  if (k_ >= n_ && k_ > 0 && C.rows() > A.rows())
    throw std::invalid_argument("saddle_solve: C must have fewer rows than A");

  std::vector<Triplet> t;
  t.reserve(A.nnz() + 2 * C.nnz());
  for (int i = 0; i < A.rows(); ++i)
    for (int k = A.row_ptr()[i]; k < A.row_ptr()[i + 1]; ++k)
      t.push_back({i, A.col_idx()[k], A.values()[k]});
  for (int i = 0; i < C.rows(); ++i)
    for (int k = C.row_ptr()[i]; k < C.row_ptr()[i + 1]; ++k) {
      t.push_back({n_ + i, C.col_idx()[k], C.values()[k]});
      t.push_back({C.col_idx()[k], n_ + i, C.values()[k]});
    }
  block_ = SparseMatrix::from_triplets(n_ + k_, n_ + k_, t);

  try {
    lu_ = std::make_unique<LuFactorization>(block_);
  } catch (const SingularSystemError&) {
    std::vector<int> dep = dependent_constraint_rows(C);
    if (!dep.empty())
      throw RankDeficientConstraints(
          "rank-deficient constraints: dependent rows [" + join_ints(dep) + "]", dep);
    throw;
  }
}

SaddleResult SaddleSolver::solve(const Vector& r) const
{
  if (r.size() != n_)
    throw std::invalid_argument("saddle_solve: rhs dimension mismatch");
  Vector rhs = Vector::Zero(n_ + k_);
  rhs.head(n_) = r;
  Vector x = lu_->solve(rhs);
  SaddleResult out;
  out.w = x.head(n_);
  out.lambda = x.tail(k_);

  if (k_ > 0) {
    double cw = 0.0;
    for (int i = n_; i < n_ + k_; ++i) {
      double s = 0.0;
      for (int k = block_.row_ptr()[i]; k < block_.row_ptr()[i + 1]; ++k)
        s += block_.values()[k] * x[block_.col_idx()[k]];
      cw = std::max(cw, std::abs(s));
    }
    const double scale = std::max(out.w.lpNorm<Eigen::Infinity>(), 1e-300);
    if (cw > 1e-10 * scale)
      throw SingularSystemError("saddle_solve: constraint residual " + std::to_string(cw / scale) +
                                    " exceeds tolerance",
                                -1);
  }
  return out;
}

SaddleResult saddle_solve(const SparseMatrix& A, const SparseMatrix& C, const Vector& r)
{
  if (C.rows() == 0) {
    SaddleResult out;
    out.w = lu_solve(A, r);
    out.lambda = Vector();
    return out;
  }
  SaddleSolver solver(A, C);
  return solver.solve(r);
}

} // namespace signlod
