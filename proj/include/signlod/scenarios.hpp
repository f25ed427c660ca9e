// The four benchmark problems: flat interface, oscillatory square inclusion,
// circular inclusion and the multiscale checkerboard.
#ifndef SIGNLOD_SCENARIOS_HPP
#define SIGNLOD_SCENARIOS_HPP

#include "signlod/fem.hpp"

#include <string>

namespace signlod {

struct ProblemSpec {
  std::string name;
  InterfaceGeometry geom;
  Coefficient coeff;
  ScalarField f;

  ScalarField exact;      // null when no closed-form solution is known
  GradientField exact_grad;

  enum class Reference { exact_solution, fine_fem };
  Reference reference = Reference::fine_fem;

  AssemblyOptions fine_stiffness_opts;   // corrector / reference discretization
  AssemblyOptions coarse_stiffness_opts; // standard-FEM baseline
  AssemblyOptions load_opts;
  int norms_degree = 6;

  bool has_symmetrization = false; // flat geometries only

  /// The closed-form reference is only meaningful when the fine mesh resolves
  /// the interface (the benchmark's fine mesh is T-conform); studies fall back
  /// to the fine-FEM reference otherwise.
  bool exact_needs_resolved_interface = false;

  bool fine_level_resolves_interface(int fine_level) const;
};

/// Flat interface at l = 0.5 - 2^-7 with known piecewise-polynomial solution;
/// sigma = 1 below, -sigma_minus above. Well-posedness needs sigma_minus >
/// (0.5+2^-7)/(0.5-2^-7) ~ 1.0317 (warns otherwise).
ProblemSpec scenario_flat(double sigma_minus);

/// Oscillatory coefficient with sign change on the square [0.25, 0.75]^2 and
/// a discontinuous load.
ProblemSpec scenario_square();

/// Disk inclusion of radius 0.2 with a radially symmetric exact solution.
ProblemSpec scenario_circle(double amplitude = 10000.0);

/// Periodic sign-changing checkerboard on scale 2^-5 with values -4 and 1;
/// every coarse element carries exactly 1/4 minus-area.
ProblemSpec scenario_multiscale();

ProblemSpec scenario_by_name(const std::string& name);

} // namespace signlod

#endif
