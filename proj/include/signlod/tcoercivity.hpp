// Verification laboratory for the T-coercivity machinery: reference-element
// constants, the flat-interface symmetrization S, the operators T and T_H,
// bubble-based dual functions and sampled coercivity diagnostics.
#ifndef SIGNLOD_TCOERCIVITY_HPP
#define SIGNLOD_TCOERCIVITY_HPP

#include "signlod/fem.hpp"
#include "signlod/mesh.hpp"
#include "signlod/quasi_interp.hpp"
#include "signlod/sparse.hpp"

#include <iosfwd>
#include <vector>

namespace signlod {

struct ReferenceConstants {
  double c_norm = 0.0; // sup ||q|| / ||b^(1/2) q|| over P1
  double c_inf = 0.0;  // |K|^(1/2) sup ||q||_inf / ||q||
  double c_inv = 0.0;  // sup |q|_1 / ||q|| on the diameter-1 reference triangle
};

/// Constants on the reference triangle (0,0),(1,0),(0,1) scaled to diameter 1,
/// via 3x3 generalized eigenproblems.
ReferenceConstants reference_constants();

/// Trace-preserving affine stretch S from H^1 functions on Omega_- to Omega_+
/// across a flat interface x2 = l, with its H1 and L2 operator norms.
struct SymmetrizationMap {
  double l = 0.5;
  bool minus_above = true;
  double c_pm = 2.0;  // C_pm(T) = 2 ||S||_{H1}
  double c0_pm = 2.0; // C0_pm(T) = 2 ||S||_{L2}

  /// Source point in Omega_- whose value S pulls to x2 in Omega_+.
  double pull_from(double x2) const;
  /// Image in Omega_+ of a source ordinate in Omega_- (inverse stretch).
  double push_to(double y2) const;

  bool consistent_with(const InterfaceGeometry& geom) const;
};

SymmetrizationMap build_symmetrization(const InterfaceGeometry& geom);

/// T v = -v on Omega_-, v - 2 S v on Omega_+, re-interpolated nodally on the
/// fine mesh. Requires the interface to lie on a fine gridline.
Vector apply_T(const SymmetrizationMap& sym, const Triangulation& fine, const Vector& values);

/// Dual weight function of a vertex a in V^0 u V^+: eta = b*w supported in one
/// coarse element K* of omega^a inside Omega_+, with m^{a'}(eta) =
/// delta_{a,a'}. Carries both the polynomial and a moment-exact fine-space
/// representation.
struct DualFunction {
  int vertex = -1;
  int host_element = -1;     // K*
  Eigen::Vector3d bubble_w;  // eta = b * (w in P1), barycentric nodal values of w
  double h1_seminorm = 0.0;  // |eta|_{1,K*} of the polynomial

  std::vector<int> fine_dofs; // fine vertices strictly inside K*
  Vector fine_values;         // same length; discrete eta with exact moments
};

DualFunction build_dual_function(const Hierarchy& h, const InterpolationOperator& interp,
                                 const InterfaceGeometry& geom, int vertex);

std::vector<DualFunction> build_all_duals(const Hierarchy& h, const InterpolationOperator& interp,
                                          const InterfaceGeometry& geom,
                                          const VertexClasses& classes, int threads = 0);

/// T_H v = T v - sum_a m^a(T v) eta^a, using the discrete dual functions so
/// that T_H maps W cap V_h into itself exactly.
Vector apply_T_H(const SymmetrizationMap& sym, const std::vector<DualFunction>& duals,
                 const InterpolationOperator& interp, const Triangulation& fine,
                 const Vector& values);

struct CoercivityReport {
  double contrast = 0.0;
  double alpha_theoretical = 0.0;
  double alpha_sampled_min = 0.0;
  double alpha_sampled_median = 0.0;
  double alpha_fullspace_min = 0.0; // same probe with T on the whole space
  double c_pm_T = 0.0;
  double c_pm_TH_measured = 0.0;
  int samples = 0;

  void write_json(std::ostream& os) const;
};

/// Rayleigh-type probe of a(w, T_H w) / |w|^2_{1,sigma} over random samples
/// projected into W (H1-seminorm saddle projection).
CoercivityReport coercivity_probe(const Hierarchy& h, const Coefficient& coeff,
                                  const SymmetrizationMap& sym,
                                  const std::vector<DualFunction>& duals,
                                  const InterpolationOperator& interp, int samples,
                                  unsigned seed = 2024);

} // namespace signlod

#endif
