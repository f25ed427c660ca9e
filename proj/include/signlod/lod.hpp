// Multiscale Galerkin system assembly and solve, the coarse FEM baseline and
// error reports against exact or fine reference solutions.
#ifndef SIGNLOD_LOD_HPP
#define SIGNLOD_LOD_HPP

#include "signlod/correctors.hpp"
#include "signlod/fem.hpp"
#include "signlod/sparse.hpp"

namespace signlod {

/// Assembled multiscale system: S_ij = a((id-Q_m)psi_j, (id-Q_m)psi_i) over
/// interior coarse vertices, F_i = (f, (id-Q_m)psi_i). G holds the composite
/// basis vectors as columns (fine x coarse-interior).
struct LodSystem {
  SparseMatrix S;
  Vector F;
  SparseMatrix G;
  double assembly_seconds = 0.0;
};

LodSystem assemble_lod_system(const FineSystem& fs, const CorrectorSet& correctors,
                              const Vector& b_fine_full);

struct LodSolution {
  Vector coarse_interior; // u_{H,m} on interior coarse vertices
  Vector coarse_full;     // with zero boundary values
  Vector fine_values;     // (id - Q_m) u_{H,m} on the fine mesh
  int m = 0;
  double assembly_seconds = 0.0;
  double solve_seconds = 0.0;
};

LodSolution solve_lod(const FineSystem& fs, const LodSystem& system, const CorrectorSet& correctors);

/// Standard coarse P1 Galerkin solve with the scenario's quadrature policy.
FeFunction fem_baseline(const Triangulation& coarse, const Coefficient& coeff,
                        const AssemblyOptions& stiffness_opts, const ScalarField& f,
                        const AssemblyOptions& load_opts);

struct ErrorRecord {
  double h1_lod = 0.0;       // |u - (id-Q_m) u_{H,m}|_{H1-semi}
  double l2_macro = 0.0;     // ||u - u_{H,m}||_{L2}
  double l2_fem = 0.0;       // ||u - u_H^FEM||_{L2}
  double l2_bestapprox = 0.0;
  double sigma_lod = 0.0;    // |u - (id-Q_m) u_{H,m}|_{1,sigma}
};

} // namespace signlod

#endif
