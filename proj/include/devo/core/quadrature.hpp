#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace devo {

namespace quad_detail {

/// Bisection on boost's GK31 rule. A piece is accepted once its error estimate
/// is below rel_tol |I|, below its share abs_density (b − a) of the absolute
/// tolerance, or at roundoff level relative to ∫|f|.
template <class F>
double adaptive_gk(F& f, double a, double b, double rel_tol, double abs_density, int depth)
{
  double err = 0.0, l1 = 0.0;
  const double r = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &err, &l1);
  err *= 0.5 * (b - a);
  if (depth == 0 || err <= rel_tol * std::abs(r) || err <= abs_density * (b - a)
      || err <= 50.0 * std::numeric_limits<double>::epsilon() * l1)
    return r;
  const double mid = 0.5 * (a + b);
  return adaptive_gk(f, a, mid, rel_tol, abs_density, depth - 1)
         + adaptive_gk(f, mid, b, rel_tol, abs_density, depth - 1);
}

} // namespace quad_detail

/// Adaptive Gauss–Kronrod on [a, b], split at the given interior breakpoints.
template <class F>
double integrate(F&& f, double a, double b, std::vector<double> breaks = {}, double rel_tol = 1e-13,
                 double abs_tol = 0.0)
{
  if (b <= a)
    return 0.0;
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  const double abs_density = abs_tol / (b - a);
  double total = 0.0;
  double lo = a;
  for (double p : breaks) {
    if (p <= lo || p > b)
      continue;
    if (p - lo > 1e-15 * std::max(1.0, std::abs(p)))
      total += quad_detail::adaptive_gk(f, lo, p, rel_tol, abs_density, 20);
    lo = p;
  }
  return total;
}

/// Composite Simpson on n (even) panels.
template <class F>
double simpson(F&& f, double a, double b, int n)
{
  if (b <= a)
    return 0.0;
  if (n < 2)
    n = 2;
  if (n % 2)
    ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i)
    s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

} // namespace devo
