// Ideal and localized element correctors on (symmetric) patches, the
// assembled corrector basis and decay diagnostics.
#ifndef SIGNLOD_CORRECTORS_HPP
#define SIGNLOD_CORRECTORS_HPP

#include "signlod/fem.hpp"
#include "signlod/quasi_interp.hpp"
#include "signlod/sparse.hpp"
#include "signlod/tcoercivity.hpp"

#include <optional>
#include <vector>

namespace signlod {

/// Everything a corrector solve needs about the fine discretization. The
/// referenced objects must outlive the context.
struct FineSystem {
  const Hierarchy* h = nullptr;
  const Coefficient* coeff = nullptr;
  const InterpolationOperator* interp = nullptr;
  const SymmetrizationMap* sym = nullptr; // optional
  SigmaMeans means;                       // fine-element sigma means
  SparseMatrix A_full;                    // fine sigma stiffness, all vertices
};

FineSystem build_fine_system(const Hierarchy& h, const Coefficient& coeff,
                             const InterpolationOperator& interp, const AssemblyOptions& opts,
                             const SymmetrizationMap* sym = nullptr);

/// Localized fine-scale correctors Q_m psi_j per interior coarse vertex j,
/// stored as sparse fine vectors.
struct CorrectorSet {
  int m = 0;
  std::vector<int> basis_vertices;          // coarse vertex of each corrector
  std::vector<std::vector<int>> support;    // fine dofs of q_j
  std::vector<Vector> coeffs;               // values on the support
  std::vector<char> element_fallback;       // per coarse element: N^{m+1} fallback used

  Vector dense(int j, int n_fine) const;
};

/// Q_K v_H from the global saddle system (oracle use; solves on the whole
/// fine space).
Vector ideal_element_corrector(const FineSystem& fs, int K, const Vector& v_H_coarse);

/// Q_{K,m} v_H on the symmetric patch P^m(K), extended by zero.
Vector localized_element_corrector(const FineSystem& fs, int K, const Vector& v_H_coarse, int m,
                                   bool* fallback_used = nullptr);

CorrectorSet corrector_basis(const FineSystem& fs, int m, int threads = 0);

struct DecayProfile {
  std::vector<double> tail; // tail H1 norm outside P^m(K), index = m
  double slope = 0.0;       // least-squares slope of log(tail) over positive tails
};

/// Tail norms of the ideal corrector outside P^m(K) for m = 0..m_max.
DecayProfile decay_profile(const FineSystem& fs, int K, const Vector& v_H_coarse, int m_max);

} // namespace signlod

#endif
