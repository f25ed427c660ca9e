#include "signlod/lod.hpp"

#include <chrono>

namespace signlod {

LodSystem assemble_lod_system(const FineSystem& fs, const CorrectorSet& correctors,
                              const Vector& b_fine_full)
{
  const auto t0 = std::chrono::steady_clock::now();
  const Hierarchy& h = *fs.h;
  const int n_fine = h.fine.n_vertices();
  const int n_corr = static_cast<int>(correctors.basis_vertices.size());

  // composite basis G: columns inject(psi_j) - q_j
  std::vector<int> vertex_to_col(h.coarse.n_vertices(), -1);
  for (int j = 0; j < n_corr; ++j)
    vertex_to_col[correctors.basis_vertices[j]] = j;

  std::vector<Triplet> trips;
  const SparseMatrix& inj = h.injection;
  for (int i = 0; i < inj.rows(); ++i)
    for (int k = inj.row_ptr()[i]; k < inj.row_ptr()[i + 1]; ++k) {
      const int j = vertex_to_col[inj.col_idx()[k]];
      if (j >= 0)
        trips.push_back({i, j, inj.values()[k]});
    }
  for (int j = 0; j < n_corr; ++j)
    for (std::size_t i = 0; i < correctors.support[j].size(); ++i)
      trips.push_back({correctors.support[j][i], j, -correctors.coeffs[j][i]});

  LodSystem sys;
  sys.G = SparseMatrix::from_triplets(n_fine, n_corr, trips);

  const Eigen::SparseMatrix<double> G = to_eigen_sparse(sys.G);
  const Eigen::SparseMatrix<double> A = to_eigen_sparse(fs.A_full);
  Eigen::SparseMatrix<double> S = (G.transpose() * (A * G).eval()).pruned(1e-300);
  sys.S = from_eigen_sparse(S);
  sys.F = sys.G.multiply_transposed(b_fine_full);

  sys.assembly_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sys;
}

LodSolution solve_lod(const FineSystem& fs, const LodSystem& system, const CorrectorSet& correctors)
{
  const auto t0 = std::chrono::steady_clock::now();
  LodSolution sol;
  sol.m = correctors.m;
  sol.assembly_seconds = system.assembly_seconds;
  sol.coarse_interior = lu_solve(system.S, system.F);
  sol.coarse_full = Vector::Zero(fs.h->coarse.n_vertices());
  for (std::size_t j = 0; j < correctors.basis_vertices.size(); ++j)
    sol.coarse_full[correctors.basis_vertices[j]] = sol.coarse_interior[j];
  sol.fine_values = system.G.multiply(sol.coarse_interior);
  sol.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

FeFunction fem_baseline(const Triangulation& coarse, const Coefficient& coeff,
                        const AssemblyOptions& stiffness_opts, const ScalarField& f,
                        const AssemblyOptions& load_opts)
{
  const SparseMatrix A = assemble_sigma_stiffness(coarse, coeff, stiffness_opts);
  const Vector b = assemble_load(coarse, f, load_opts);
  return solve_dirichlet(coarse, A, b);
}

} // namespace signlod
