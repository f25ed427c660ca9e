#include "signlod/scenarios.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace signlod {

namespace {

constexpr double kFlatL = 0.5 - 1.0 / 128.0;

} // namespace

bool ProblemSpec::fine_level_resolves_interface(int fine_level) const
{
  if (!exact_needs_resolved_interface)
    return true;
  if (geom.kind != InterfaceGeometry::Kind::flat_horizontal)
    return false;
  const double g = geom.flat_height * (1 << fine_level);
  return std::abs(g - std::round(g)) < 1e-9;
}

ProblemSpec scenario_flat(double sigma_minus)
{
  const double threshold = (0.5 + 1.0 / 128.0) / (0.5 - 1.0 / 128.0);
  if (sigma_minus <= threshold)
    std::cerr << "scenario_flat: sigma_minus = " << sigma_minus
              << " is inside the critical interval (threshold " << threshold << ")\n";

  ProblemSpec spec;
  spec.name = sigma_minus == 2.0 ? "flat2" : (sigma_minus == 1.1 ? "flat11" : "flat");
  const double l = kFlatL;
  spec.geom = InterfaceGeometry::flat(l, /*minus_above=*/true);
  spec.coeff.geom = spec.geom;
  spec.coeff.eval = [l, sigma_minus](double, double y) { return y > l ? -sigma_minus : 1.0; };
  spec.coeff.sigma_plus = 1.0;
  spec.coeff.sigma_minus = sigma_minus;
  spec.coeff.sup_plus = 1.0;
  spec.coeff.inf_plus = 1.0;

  // u = -sigma_- P(x) Q(y) below the interface, P(x) Q(y) above, with
  // P = x(x-1), Q = y(y-1)(y-l)
  auto P = [](double x) { return x * (x - 1.0); };
  auto Q = [l](double y) { return y * (y - 1.0) * (y - l); };
  auto dQ = [l](double y) { return 3.0 * y * y - 2.0 * (1.0 + l) * y + l; };
  spec.exact = [=](double x, double y) {
    const double base = P(x) * Q(y);
    return y > l ? base : -sigma_minus * base;
  };
  spec.exact_grad = [=](double x, double y) -> std::array<double, 2> {
    const double c = y > l ? 1.0 : -sigma_minus;
    return {c * (2.0 * x - 1.0) * Q(y), c * P(x) * dQ(y)};
  };
  spec.f = [=](double x, double y) {
    return sigma_minus * (2.0 * Q(y) + P(x) * (6.0 * y - 2.0 * (l + 1.0)));
  };
  spec.reference = ProblemSpec::Reference::exact_solution;

  spec.fine_stiffness_opts.quad_degree = 2;
  spec.fine_stiffness_opts.split_y = l; // reference-grade fine discretization
  spec.coarse_stiffness_opts.quad_degree = 2; // plain sampling: the baseline must not see the interface
  spec.load_opts.quad_degree = 4; // f is a cubic polynomial
  spec.norms_degree = 6;
  spec.has_symmetrization = true;
  spec.exact_needs_resolved_interface = true;
  return spec;
}

ProblemSpec scenario_square()
{
  ProblemSpec spec;
  spec.name = "square";
  const double eps = 1.0 / 128.0;
  spec.geom = InterfaceGeometry::rectangle({0.25, 0.25}, {0.75, 0.75});
  spec.coeff.geom = spec.geom;
  spec.coeff.eval = [eps, geom = spec.geom](double x, double y) {
    if (geom.interface_offset({x, y}) < 0.0)
      return -5.0 + 0.5 * std::sin(2.0 * M_PI * x / eps) + 0.5 * std::cos(2.0 * M_PI * y / eps);
    return 0.75 + 0.125 * std::cos(2.0 * M_PI * x / eps) + 0.125 * std::sin(2.0 * M_PI * y / eps);
  };
  spec.coeff.sigma_plus = 0.5;
  spec.coeff.sigma_minus = 4.0;
  spec.coeff.sup_plus = 1.0;
  spec.coeff.inf_plus = 0.5;

  spec.f = [](double, double y) { return y < 0.1 ? 0.1 : 1.0; };
  spec.reference = ProblemSpec::Reference::fine_fem;

  spec.fine_stiffness_opts.quad_degree = 4; // oscillatory sigma
  spec.coarse_stiffness_opts.quad_degree = 4;
  spec.load_opts.quad_degree = 2;
  spec.load_opts.split_y = 0.1; // f jumps across x2 = 0.1
  spec.norms_degree = 6;
  return spec;
}

ProblemSpec scenario_circle(double amplitude)
{
  ProblemSpec spec;
  spec.name = "circle";
  const double sigma_minus = 2.0;
  spec.geom = InterfaceGeometry::disk({0.5, 0.5}, 0.2);
  spec.coeff.geom = spec.geom;
  spec.coeff.eval = [geom = spec.geom, sigma_minus](double x, double y) {
    return geom.interface_offset({x, y}) < 0.0 ? -sigma_minus : 1.0;
  };
  spec.coeff.sigma_plus = 1.0;
  spec.coeff.sigma_minus = sigma_minus;
  spec.coeff.sup_plus = 1.0;
  spec.coeff.inf_plus = 1.0;

  // radial profile g(r) = r^2 (r-0.2)(r-0.4)^2 expanded and differentiated
  auto g_poly = [](double r) {
    return r * r * r * r * r - r * r * r * r + 0.32 * r * r * r - 0.032 * r * r;
  };
  auto dg = [](double r) { return 5.0 * r * r * r * r - 4.0 * r * r * r + 0.96 * r * r - 0.064 * r; };
  auto ddg = [](double r) { return 20.0 * r * r * r - 12.0 * r * r + 1.92 * r - 0.064; };

  const double A = amplitude;
  auto radius = [](double x, double y) { return std::hypot(x - 0.5, y - 0.5); };
  auto region_coef = [A, sigma_minus](double r) {
    if (r < 0.2)
      return A;
    if (r < 0.4)
      return -A * sigma_minus;
    return 0.0;
  };

  spec.exact = [=](double x, double y) {
    const double r = radius(x, y);
    return region_coef(r) * (r < 0.4 ? g_poly(r) : 0.0);
  };
  spec.exact_grad = [=](double x, double y) -> std::array<double, 2> {
    const double r = radius(x, y);
    if (r < 1e-14 || r >= 0.4)
      return {0.0, 0.0};
    const double du = region_coef(r) * dg(r);
    return {du * (x - 0.5) / r, du * (y - 0.5) / r};
  };
  spec.f = [=](double x, double y) {
    const double r = radius(x, y);
    if (r >= 0.4)
      return 0.0;
    const double sigma = r < 0.2 ? -sigma_minus : 1.0;
    const double lap = r < 1e-14 ? 2.0 * ddg(0.0) // g'' + g'/r -> 2 g''(0) as r -> 0
                                 : ddg(r) + dg(r) / r;
    return -sigma * region_coef(r) * lap;
  };
  spec.reference = ProblemSpec::Reference::exact_solution;

  spec.fine_stiffness_opts.quad_degree = 2;
  spec.coarse_stiffness_opts.quad_degree = 2;
  spec.load_opts.quad_degree = 6; // piecewise-smooth radial load
  spec.norms_degree = 6;
  return spec;
}

ProblemSpec scenario_multiscale()
{
  ProblemSpec spec;
  spec.name = "multiscale";
  const double eps = 1.0 / 32.0;
  spec.geom = InterfaceGeometry::checker(eps);
  spec.coeff.geom = spec.geom;
  spec.coeff.eval = [geom = spec.geom](double x, double y) {
    return geom.interface_offset({x, y}) < 0.0 ? -4.0 : 1.0;
  };
  spec.coeff.sigma_plus = 1.0;
  spec.coeff.sigma_minus = 4.0;
  spec.coeff.sup_plus = 1.0;
  spec.coeff.inf_plus = 1.0;
  // piecewise-constant field: element means are exact by polygon clipping
  spec.coeff.exact_element_mean = [geom = spec.geom](const Triangulation& mesh, int e) {
    const double area = mesh.element_area(e);
    const double minus = element_minus_area(mesh, e, geom);
    const double frac = minus / area;
    return std::array<double, 2>{1.0 - 5.0 * frac, 1.0 + 3.0 * frac};
  };

  spec.f = [](double, double) { return 1.0; };
  spec.reference = ProblemSpec::Reference::fine_fem;

  spec.fine_stiffness_opts.quad_degree = 2;
  spec.coarse_stiffness_opts.quad_degree = 2;
  spec.load_opts.quad_degree = 2;
  spec.norms_degree = 4;
  return spec;
}

ProblemSpec scenario_by_name(const std::string& name)
{
  if (name == "flat2")
    return scenario_flat(2.0);
  if (name == "flat11")
    return scenario_flat(1.1);
  if (name == "square")
    return scenario_square();
  if (name == "circle")
    return scenario_circle();
  if (name == "multiscale")
    return scenario_multiscale();
  throw std::invalid_argument("unknown scenario: " + name);
}

} // namespace signlod
