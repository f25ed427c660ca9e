// Quadrature rules on the reference triangle in barycentric coordinates.
#ifndef SIGNLOD_QUADRATURE_HPP
#define SIGNLOD_QUADRATURE_HPP

#include <array>
#include <vector>

namespace signlod {

/// Barycentric points and weights; weights sum to 1, so an integral over a
/// physical triangle K is |K| * sum_i w_i f(x_i).
struct QuadratureRule {
  struct Point {
    std::array<double, 3> bary;
    double weight;
  };
  std::vector<Point> points;
  int degree = 0;

  /// Smallest built-in rule exact for polynomials of total degree <= degree.
  static const QuadratureRule& of_degree(int degree);
};

} // namespace signlod

#endif
