// P1 assembly for the sign-changing bilinear form, load vectors, mass
// matrices, element L2 projections, Dirichlet handling and error norms.
#ifndef SIGNLOD_FEM_HPP
#define SIGNLOD_FEM_HPP

#include "signlod/mesh.hpp"
#include "signlod/quadrature.hpp"
#include "signlod/sparse.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>

namespace signlod {

using ScalarField = std::function<double(double, double)>;
using GradientField = std::function<std::array<double, 2>(double, double)>;

/// Sign-changing diffusion field with its subdomain bounds. sigma_plus and
/// sigma_minus are the lower bounds of sigma on Omega_+ and of -sigma on
/// Omega_-; the normalization sigma_plus <= sigma_minus is expected.
struct Coefficient {
  ScalarField eval;
  InterfaceGeometry geom;
  double sigma_plus = 1.0;
  double sigma_minus = 1.0;
  double sup_plus = 1.0;
  double inf_plus = 1.0;

  /// Optional exact per-element means {mean of sigma, mean of |sigma|}, used
  /// instead of quadrature when set (piecewise-constant fields with known
  /// geometry).
  std::function<std::array<double, 2>(const Triangulation&, int)> exact_element_mean;

  double contrast() const { return sigma_minus / sigma_plus; }

  static Coefficient constant(double value);
};

/// Nodal P1 function; boundary entries are present (zero for H^1_0 data).
struct FeFunction {
  const Triangulation* mesh = nullptr;
  Vector values;

  double eval(const Point2& p) const;
  void dump(std::ostream& os) const; // `vertex_index value` lines
};

struct AssemblyOptions {
  int quad_degree = 2;
  /// Composite quadrature: subdivide each element to this block-mesh level
  /// before applying the rule (0 = off). Exact for coefficients that are
  /// constant on the sub-elements.
  int composite_to_level = 0;
  /// Split elements cut by the horizontal line x2 = split_y before
  /// integrating (for piecewise-defined loads/coefficients).
  std::optional<double> split_y;
};

/// Per-element integral means of sigma and |sigma|, the only coefficient data
/// P1 stiffness assembly needs.
struct SigmaMeans {
  Vector mean;     // (1/|T|) \int_T sigma
  Vector abs_mean; // (1/|T|) \int_T |sigma|
};

SigmaMeans compute_sigma_means(const Triangulation& mesh, const Coefficient& coeff,
                               const AssemblyOptions& opts);

/// Stiffness A_ij = sum_K \int_K sigma grad(phi_j).grad(phi_i); full-size
/// (all vertices), symmetric.
SparseMatrix assemble_sigma_stiffness(const Triangulation& mesh, const SigmaMeans& means);
SparseMatrix assemble_sigma_stiffness(const Triangulation& mesh, const Coefficient& coeff,
                                      const AssemblyOptions& opts);

/// Exact P1 mass matrix.
SparseMatrix assemble_mass(const Triangulation& mesh);

Vector assemble_load(const Triangulation& mesh, const ScalarField& f, const AssemblyOptions& opts);

/// Interior/boundary numbering for homogeneous Dirichlet conditions.
struct DofMap {
  std::vector<int> interior;    // interior vertex ids
  std::vector<int> full_to_int; // -1 for boundary vertices

  static DofMap build(const Triangulation& mesh);
  Vector restrict_vec(const Vector& full) const;
  Vector extend(const Vector& interior_values, int n_full) const;
};

/// Standard P1 Dirichlet solve: restrict to interior vertices, lu_solve,
/// extend by zero.
FeFunction solve_dirichlet(const Triangulation& mesh, const SparseMatrix& A_full,
                           const Vector& b_full);

/// Two nested block meshes plus the transfer data used everywhere: children
/// lists, nodal injection and exact per-coarse-element L2 projections.
struct Hierarchy {
  Triangulation coarse;
  Triangulation fine;
  std::vector<std::vector<int>> children; // coarse element -> fine elements

  SparseMatrix injection; // n_fine_vertices x n_coarse_vertices, nodal P1 embedding

  struct ElementProjection {
    std::vector<int> fine_vertices;       // fine vertices appearing in K
    Eigen::Matrix<double, 3, Eigen::Dynamic> op;       // nodal values of P_K v at K's vertices
    Eigen::Matrix<double, 3, Eigen::Dynamic> coupling; // R_K = \int_K psi_i phi_j (exact)
  };
  std::vector<ElementProjection> projections;

  DofMap coarse_dofs;
  DofMap fine_dofs;
};

Hierarchy make_hierarchy(int coarse_level, int fine_level,
                         MeshPattern pattern = MeshPattern::crisscross);

/// Coefficients of the L2(K)-projection of a fine function onto P1(K), as
/// nodal values at K's three vertices.
Eigen::Vector3d element_l2_projection(const Hierarchy& h, int K, const Vector& fine_values);

/// Nodal injection of a coarse function into the fine space (exact for P1).
Vector inject(const Hierarchy& h, const Vector& coarse_values);

struct NormValues {
  double l2 = 0.0;
  double h1_semi = 0.0;
  double sigma_energy = 0.0; // |v|_{1,sigma}
};

/// Norms of a fine nodal function (exact elementwise formulas; the sigma
/// energy uses the |sigma| element means).
NormValues fe_norms(const Triangulation& mesh, const Vector& values, const SigmaMeans* means);

/// Norms of (u - v_h) against a closed-form reference, by element quadrature
/// of the given degree.
NormValues error_vs_exact(const Triangulation& mesh, const Vector& values, const ScalarField& u,
                          const GradientField& grad_u, const SigmaMeans* means, int quad_degree);

/// L2-best approximation of a fine function in the coarse space; unconstrained
/// by default, optionally with homogeneous Dirichlet values enforced.
Vector l2_best_approx(const Hierarchy& h, const Vector& fine_values, bool dirichlet = false);

/// L2-best approximation of a closed-form function, integrated on the fine
/// mesh with the given quadrature degree.
Vector l2_best_approx_exact(const Hierarchy& h, const ScalarField& u, int quad_degree,
                            bool dirichlet = false);

} // namespace signlod

#endif
