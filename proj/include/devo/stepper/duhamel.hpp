#pragma once

#include "devo/core/error.hpp"
#include "devo/core/linalg.hpp"
#include "devo/core/operator.hpp"

namespace devo {

/// exp(h·A)u + (h/2)(exp(h·A)g_left + g_right) with a precomputed propagator E = exp(h·A).
inline Vector duhamel_step(const Matrix& propagator, const Vector& u, const Vector& g_left, const Vector& g_right,
                           double h)
{
  return propagator * (u + 0.5 * h * g_left) + 0.5 * h * g_right;
}

/**
 * \brief One step of the variation-of-constants formula with trapezoid quadrature.
 *
 * Returns exp(dt·A)u + (dt/2)(exp(dt·A)g_left + g_right), which integrates
 * ∫₀^dt exp((dt−s)A) g(s) ds exactly when g is constant and A = 0, and with
 * local error O(dt³) for smooth g.
 */
inline Vector duhamel_increment(const OperatorSpec& a, const Vector& u, const Vector& g_left, const Vector& g_right,
                                double dt)
{
  if (!(dt > 0.0))
    throw ParameterError("duhamel_increment: dt must be > 0");
  const std::size_t n = a.dim();
  for (const Vector* v : {&u, &g_left, &g_right})
    if (static_cast<std::size_t>(v->size()) != n)
      throw DimensionError("duhamel_increment", n, static_cast<std::size_t>(v->size()));
  return duhamel_step(expm(dt * a.to_dense()), u, g_left, g_right, dt);
}

} // namespace devo
