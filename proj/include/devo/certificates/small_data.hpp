#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "devo/certificates/decay.hpp"
#include "devo/core/coefficient.hpp"
#include "devo/core/delay.hpp"
#include "devo/core/envelope.hpp"
#include "devo/core/error.hpp"

namespace devo {

struct NonlinearRate
{
  double rate;
  /// rate > 0, i.e. L(C_ρ) < (ω − ω′)/M
  bool wpa_ok;
};

/// ω − ω′ − M·L(C_ρ)
inline NonlinearRate nonlinear_decay_rate(const SemigroupEnvelope& env, double omega_prime, double lipschitz_at_crho)
{
  const double rate = env.omega - omega_prime - env.M * lipschitz_at_crho;
  return {rate, rate > 0.0};
}

/// k = k1 + k2 with k1 integrable on [0, ∞) and k2 bounded.
struct KSplit
{
  Coefficient k1;
  Coefficient k2;

  Coefficient total() const { return k1 + k2; }
};

/// (2a/l)(1 − c)/(2 − c)
inline double ksplit_threshold(double a, std::size_t l, double c)
{
  return 2.0 * a / static_cast<double>(l) * (1.0 - c) / (2.0 - c);
}

/// Channel i passes iff sup|k2_i| <= (2a/l)(1 − c_i)/(2 − c_i).
inline std::vector<bool> check_ksplit_condition(const std::vector<KSplit>& splits, double a, const std::vector<double>& c)
{
  if (!(a > 0.0))
    throw ParameterError("coercivity constant a must be > 0");
  if (c.size() != splits.size())
    throw DimensionError("check_ksplit_condition: slope bounds", splits.size(), c.size());
  std::vector<bool> out;
  for (std::size_t i = 0; i < splits.size(); ++i) {
    if (!(c[i] < 1.0))
      throw ParameterError("delay slope bound must satisfy c < 1");
    out.push_back(splits[i].k2.sup_abs() <= ksplit_threshold(a, splits.size(), c[i]));
  }
  return out;
}

/**
 * \brief C̄ = exp(2 Σ d_i ∫₀^∞ (|k1_i(φ_i⁻¹(s))|/(1 − c_i) + |k1_i(s)|) ds).
 *
 * The integrals are truncated at s_max, which is doubled until the closed-form
 * tail bound of the exponent is below 1e−10.
 */
inline double cbar(const std::vector<KSplit>& splits, const std::vector<double>& d, const std::vector<double>& c,
                   const std::vector<DelayFunction>& delays, double s_max = 50.0)
{
  const std::size_t l = splits.size();
  if (d.size() != l || c.size() != l || delays.size() != l)
    throw DimensionError("cbar: per-channel lists", l, std::min({d.size(), c.size(), delays.size()}));
  for (std::size_t i = 0; i < l; ++i) {
    if (!(c[i] < 1.0))
      throw ParameterError("delay slope bound must satisfy c < 1");
    if (!splits[i].k1.integrable())
      throw ParameterError("cbar: k1 of channel " + std::to_string(i) + " is not integrable on [0, inf)");
  }
  if (!(s_max > 0.0))
    s_max = 1.0;

  auto tail = [&](double s) {
    double t = 0.0;
    for (std::size_t i = 0; i < l; ++i) {
      // on [S, ∞) the substituted integral is ∫_{φ⁻¹(S)}^∞ |k1|(1 − τ') <= (1 + |τ'|_∞) tail(φ⁻¹(S))
      const double slope = std::abs(delays[i].amplitude() * delays[i].frequency());
      const double phi_tail = (1.0 + slope) * splits[i].k1.tail_abs_bound(delays[i].phi_inverse(s));
      t += 2.0 * d[i] * (phi_tail / (1.0 - c[i]) + splits[i].k1.tail_abs_bound(s));
    }
    return t;
  };
  for (int it = 0; it < 60 && tail(s_max) > 1e-10; ++it)
    s_max *= 2.0;
  if (tail(s_max) > 1e-10)
    throw ParameterError("cbar: tail bound does not drop below 1e-10");

  double exponent = 0.0;
  for (std::size_t i = 0; i < l; ++i) {
    if (splits[i].k1.is_zero())
      continue;
    exponent += 2.0 * d[i]
                * (k_phi_integral(splits[i].k1, delays[i], 0.0, s_max) / (1.0 - c[i])
                   + splits[i].k1.abs_integral(s_max));
  }
  return std::exp(exponent);
}

/// ρ = h⁻¹(1/2) / (2 √C̄) with h⁻¹ by bisection.
inline double small_data_radius(double cbar_value, const std::function<double(double)>& h)
{
  if (!(cbar_value >= 1.0))
    throw ParameterError("small_data_radius: C-bar must be >= 1");
  double lo = 0.0, hi = 1.0;
  while (!(h(hi) > 0.5)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12)
      throw ParameterError("small_data_radius: radius unbounded below 1/2 (h never reaches 1/2)");
  }
  while (hi - lo > 1e-13 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) > 0.5 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi) / (2.0 * std::sqrt(cbar_value));
}

} // namespace devo
