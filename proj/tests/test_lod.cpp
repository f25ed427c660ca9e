#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "signlod/lod.hpp"

#include "signlod/patches.hpp"
#include "signlod/scenarios.hpp"

#include <cmath>
#include <random>

using namespace signlod;

namespace {

struct Setup {
  ProblemSpec spec;
  Hierarchy h;
  InterpolationOperator interp;
  SymmetrizationMap sym;
  FineSystem fs;
  Vector b;

  Setup(ProblemSpec s, int coarse_level, int fine_level)
      : spec(std::move(s)), h(make_hierarchy(coarse_level, fine_level)), interp(h)
  {
    const SymmetrizationMap* sym_ptr = nullptr;
    if (spec.has_symmetrization) {
      sym = build_symmetrization(spec.geom);
      sym_ptr = &sym;
    }
    fs = build_fine_system(h, spec.coeff, interp, spec.fine_stiffness_opts, sym_ptr);
    b = assemble_load(h.fine, spec.f, spec.load_opts);
  }
};

} // namespace

TEST_CASE("degenerate hierarchy: S equals the coarse system and the LOD solve is the FEM solve")
{
  ProblemSpec spec = scenario_multiscale();
  Setup s(spec, 3, 3);
  const CorrectorSet correctors = corrector_basis(s.fs, 1);
  const LodSystem sys = assemble_lod_system(s.fs, correctors, s.b);

  const SparseMatrix A_int =
      s.fs.A_full.submatrix(s.h.coarse_dofs.interior, s.h.coarse_dofs.interior);
  REQUIRE(sys.S.rows() == A_int.rows());
  for (int i = 0; i < sys.S.rows(); ++i)
    for (int k = sys.S.row_ptr()[i]; k < sys.S.row_ptr()[i + 1]; ++k)
      CHECK(sys.S.values()[k] ==
            doctest::Approx(A_int.coeff(i, sys.S.col_idx()[k])).epsilon(1e-12));

  const Vector b_int = s.h.coarse_dofs.restrict_vec(s.b);
  CHECK((sys.F - b_int).lpNorm<Eigen::Infinity>() <= 1e-13);

  const LodSolution lod = solve_lod(s.fs, sys, correctors);
  const FeFunction fem = solve_dirichlet(s.h.fine, s.fs.A_full, s.b);
  CHECK((lod.fine_values - fem.values).lpNorm<Eigen::Infinity>() <=
        1e-9 * fem.values.lpNorm<Eigen::Infinity>());
}

TEST_CASE("LOD system is symmetric")
{
  Setup s(scenario_flat(2.0), 2, 4);
  const CorrectorSet correctors = corrector_basis(s.fs, 2);
  const LodSystem sys = assemble_lod_system(s.fs, correctors, s.b);
  const SparseMatrix St = sys.S.transposed();
  REQUIRE(St.nnz() == sys.S.nnz());
  double diff = 0.0;
  for (int k = 0; k < sys.S.nnz(); ++k)
    diff = std::max(diff, std::abs(St.values()[k] - sys.S.values()[k]));
  CHECK(diff <= 1e-12 * sys.S.max_abs());
}

TEST_CASE("LOD system sparsity follows the enlarged supports")
{
  Setup s(scenario_flat(2.0), 3, 5);
  const CorrectorSet correctors = corrector_basis(s.fs, 1);
  const LodSystem sys = assemble_lod_system(s.fs, correctors, s.b);

  // two basis functions with far-apart supports in the same half: S_ij = 0
  int far_a = -1, far_b = -1;
  for (std::size_t j = 0; j < correctors.basis_vertices.size(); ++j) {
    const Point2& p = s.h.coarse.vertices[correctors.basis_vertices[j]];
    if (p[0] < 0.15 && p[1] < 0.15)
      far_a = static_cast<int>(j);
    if (p[0] > 0.85 && p[1] < 0.15)
      far_b = static_cast<int>(j);
  }
  REQUIRE(far_a >= 0);
  REQUIRE(far_b >= 0);
  CHECK(sys.S.coeff(far_a, far_b) == 0.0);
}

TEST_CASE("zero load gives the zero solution")
{
  Setup s(scenario_flat(2.0), 2, 4);
  const CorrectorSet correctors = corrector_basis(s.fs, 2);
  const LodSystem sys = assemble_lod_system(s.fs, correctors, Vector::Zero(s.h.fine.n_vertices()));
  const LodSolution lod = solve_lod(s.fs, sys, correctors);
  CHECK(lod.fine_values.lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("LOD solution reconstructs from its parts and is macroscopically consistent")
{
  Setup s(scenario_flat(2.0), 2, 5);
  const CorrectorSet correctors = corrector_basis(s.fs, 2);
  const LodSystem sys = assemble_lod_system(s.fs, correctors, s.b);
  const LodSolution lod = solve_lod(s.fs, sys, correctors);

  // fine representation = injection(u_H) - sum_j u_j q_j
  Vector recon = inject(s.h, lod.coarse_full);
  for (std::size_t j = 0; j < correctors.basis_vertices.size(); ++j)
    recon -= lod.coarse_interior[j] * correctors.dense(static_cast<int>(j), s.h.fine.n_vertices());
  CHECK((recon - lod.fine_values).lpNorm<Eigen::Infinity>() <=
        1e-12 * std::max(1.0, lod.fine_values.lpNorm<Eigen::Infinity>()));

  // I_H applied to the full solution returns the macroscopic part
  const Vector i_h = s.interp.apply(lod.fine_values);
  CHECK((i_h - lod.coarse_interior).lpNorm<Eigen::Infinity>() <=
        1e-9 * std::max(1.0, lod.coarse_interior.lpNorm<Eigen::Infinity>()));
}

TEST_CASE("Galerkin orthogonality of the LOD solve")
{
  Setup s(scenario_flat(2.0), 2, 4);
  const CorrectorSet correctors = corrector_basis(s.fs, 2);
  const LodSystem sys = assemble_lod_system(s.fs, correctors, s.b);
  const LodSolution lod = solve_lod(s.fs, sys, correctors);

  // residual of the multiscale Galerkin system: G^T (b - A u) = 0
  const Vector residual =
      sys.G.multiply_transposed(s.b - s.fs.A_full.multiply(lod.fine_values));
  CHECK(residual.lpNorm<Eigen::Infinity>() <= 1e-9 * s.b.lpNorm<Eigen::Infinity>());
}

TEST_CASE("classical LOD sanity for a positive smooth coefficient")
{
  ProblemSpec spec = scenario_flat(2.0);
  spec.coeff = Coefficient::constant(1.0);
  spec.has_symmetrization = false;
  spec.f = [](double x, double y) { return std::sin(M_PI * x) * y; };
  spec.fine_stiffness_opts = {};

  double prev_err = 1e300;
  for (int L : {1, 2, 3}) {
    Setup s(spec, L, 5);
    const CorrectorSet correctors = corrector_basis(s.fs, 2);
    const LodSystem sys = assemble_lod_system(s.fs, correctors, s.b);
    const LodSolution lod = solve_lod(s.fs, sys, correctors);
    const FeFunction fem = solve_dirichlet(s.h.fine, s.fs.A_full, s.b);
    const double err = fe_norms(s.h.fine, fem.values - lod.fine_values, nullptr).h1_semi;
    CHECK(err < prev_err);
    prev_err = err;
  }
}

TEST_CASE("consistency limit: saturated patches reproduce the ideal method")
{
  Setup s(scenario_flat(2.0), 2, 5);

  // smallest m for which every patch covers the whole domain
  int m_sat = 1;
  for (; m_sat < 16; ++m_sat) {
    bool all_full = true;
    for (int K = 0; K < s.h.coarse.n_elements() && all_full; ++K)
      all_full = static_cast<int>(
                     symmetric_patch(s.h.coarse, K, m_sat, s.spec.geom, &s.sym).elements.size()) ==
                 s.h.coarse.n_elements();
    if (all_full)
      break;
  }

  const CorrectorSet ca = corrector_basis(s.fs, m_sat);
  const CorrectorSet cb = corrector_basis(s.fs, m_sat + 1);
  const CorrectorSet c1 = corrector_basis(s.fs, 1);

  const LodSolution lod_a = solve_lod(s.fs, assemble_lod_system(s.fs, ca, s.b), ca);
  const LodSolution lod_b = solve_lod(s.fs, assemble_lod_system(s.fs, cb, s.b), cb);
  const LodSolution lod_1 = solve_lod(s.fs, assemble_lod_system(s.fs, c1, s.b), c1);

  CHECK((lod_a.fine_values - lod_b.fine_values).lpNorm<Eigen::Infinity>() <=
        1e-8 * lod_b.fine_values.lpNorm<Eigen::Infinity>());
  CHECK((lod_1.fine_values - lod_b.fine_values).lpNorm<Eigen::Infinity>() >
        1e-8 * lod_b.fine_values.lpNorm<Eigen::Infinity>());
}

TEST_CASE("solution scales linearly with the load")
{
  Setup s(scenario_flat(2.0), 2, 4);
  const CorrectorSet correctors = corrector_basis(s.fs, 2);
  const LodSolution lod1 = solve_lod(s.fs, assemble_lod_system(s.fs, correctors, s.b), correctors);
  const Vector b3 = 3.0 * s.b;
  const LodSolution lod3 = solve_lod(s.fs, assemble_lod_system(s.fs, correctors, b3), correctors);
  CHECK((lod3.fine_values - 3.0 * lod1.fine_values).lpNorm<Eigen::Infinity>() <=
        1e-11 * lod3.fine_values.lpNorm<Eigen::Infinity>());
  CHECK((lod3.coarse_interior - 3.0 * lod1.coarse_interior).lpNorm<Eigen::Infinity>() <=
        1e-11 * lod3.coarse_interior.lpNorm<Eigen::Infinity>());
}

TEST_CASE("fem_baseline agrees with the fine solve for a smooth problem")
{
  const Coefficient one = Coefficient::constant(1.0);
  const ScalarField f = [](double, double) { return 1.0; };
  const Hierarchy h = make_hierarchy(4, 6);
  const FeFunction coarse = fem_baseline(h.coarse, one, {}, f, {});
  const SparseMatrix A = assemble_sigma_stiffness(h.fine, one, {});
  const FeFunction fine = solve_dirichlet(h.fine, A, assemble_load(h.fine, f, {}));
  const Vector diff = inject(h, coarse.values) - fine.values;
  CHECK(fe_norms(h.fine, diff, nullptr).l2 <= 0.01 * fe_norms(h.fine, fine.values, nullptr).l2);
}
