#include "signlod/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace signlod {

namespace {

// Gauss-Legendre nodes/weights on [0,1] by Newton iteration on P_n.
void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w)
{
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p0, p1, dp;
    for (int it = 0; it < 100; ++it) {
      p0 = 1.0;
      p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15)
        break;
    }
    x[n - 1 - i] = 0.5 * (1.0 + t);
    w[n - 1 - i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
}

// Collapsed-square (Duffy) rule: exact for total degree <= 2n-2 on the
// triangle because the Jacobian adds one degree in the collapsed direction.
QuadratureRule duffy_rule(int degree)
{
  const int n = (degree + 3) / 2; // ceil((degree+2)/2)
  std::vector<double> gx, gw;
  gauss_legendre_01(n, gx, gw);

  QuadratureRule rule;
  rule.degree = degree;
  rule.points.reserve(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double u = gx[i];
      const double v = gx[j];
      const double x = u;
      const double y = v * (1.0 - u);
      QuadratureRule::Point p;
      p.bary = {1.0 - x - y, x, y};
      p.weight = 2.0 * gw[i] * gw[j] * (1.0 - u);
      rule.points.push_back(p);
    }
  return rule;
}

QuadratureRule make_rule(int degree)
{
  QuadratureRule rule;
  rule.degree = degree;
  if (degree <= 1) {
    rule.degree = 1;
    rule.points = {{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 1.0}};
    return rule;
  }
  if (degree == 2) {
    const double a = 1.0 / 6.0, b = 2.0 / 3.0, w = 1.0 / 3.0;
    rule.points = {{{a, a, b}, w}, {{a, b, a}, w}, {{b, a, a}, w}};
    return rule;
  }
  return duffy_rule(degree);
}

} // namespace

const QuadratureRule& QuadratureRule::of_degree(int degree)
{
  if (degree < 0 || degree > 40)
    throw std::invalid_argument("QuadratureRule::of_degree: unsupported degree");
  static std::map<int, QuadratureRule> cache;
  static std::mutex mutex;
  std::scoped_lock lock(mutex);
  auto it = cache.find(degree);
  if (it == cache.end())
    it = cache.emplace(degree, make_rule(degree)).first;
  return it->second;
}

} // namespace signlod
