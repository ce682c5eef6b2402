#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "devo/certificates/decay.hpp"
#include "devo/core/quadrature.hpp"
#include "devo/core/system.hpp"

namespace devo {

/**
 * \brief α̃ = M(‖U₀‖ + Σ_i e^{ωτ̄_i}/(1 − c_i) ∫_{−τ_i(0)}^0 e^{ωs} |k_i(φ_i⁻¹(s))| ‖f_i(s)‖ ds).
 *
 * f_i is the channel history (already B_i U on the past), measured in the state norm.
 */
inline double gronwall_alpha(const DelaySystem& sys)
{
  const auto& env = sys.require_envelope();
  double total = sys.norm.norm(sys.initial);
  for (const auto& ch : sys.channels) {
    if (ch.coeff.is_zero())
      continue;
    const double lo = -ch.delay.value(0.0);
    if (!(lo < 0.0))
      continue;
    // switch times of k mapped back through φ
    std::vector<double> breaks;
    for (double r : ch.coeff.switch_times(0.0, ch.delay.phi_inverse(0.0)))
      breaks.push_back(ch.delay.phi(r));
    const double integral = integrate(
      [&](double s) {
        return std::exp(env.omega * s) * std::abs(ch.coeff.value(ch.delay.phi_inverse(s)))
               * sys.norm.norm(ch.history.eval(s));
      },
      lo, 0.0, breaks, 1e-12,
      1e-15 * ch.coeff.sup_abs() * std::max({1.0, sys.norm.norm(ch.history.eval(lo)), sys.norm.norm(ch.history.eval(0.0))})
        * -lo);
    total += std::exp(env.omega * ch.delay.tau_bar()) / (1.0 - ch.delay.slope_bound()) * integral;
  }
  return env.M * total;
}

/// α̃ exp(∫₀ᵗ β̃ + M L_nl t − ωt) on a grid; ∫₀ᵗ β̃ is the certificate left-hand side.
inline std::vector<double> gronwall_series(const DelaySystem& sys, const std::vector<double>& times,
                                           std::optional<double> lipschitz_nl = std::nullopt)
{
  const auto& env = sys.require_envelope();
  const double l_nl = lipschitz_nl.value_or(0.0);
  for (double t : times)
    if (!(t >= 0.0))
      throw ParameterError("gronwall_bound: t must be >= 0");
  const double alpha = gronwall_alpha(sys);
  const auto lhs = cert_lhs_series(sys, times);
  std::vector<double> out(times.size());
  for (std::size_t j = 0; j < times.size(); ++j)
    out[j] = alpha * std::exp(lhs[j] + env.M * l_nl * times[j] - env.omega * times[j]);
  return out;
}

inline double gronwall_bound(const DelaySystem& sys, double t, std::optional<double> lipschitz_nl = std::nullopt)
{
  return gronwall_series(sys, {t}, lipschitz_nl).front();
}

/// Decay envelope α̃ e^{γ} e^{−(ω−ω′)t} implied by a certificate.
inline double certified_envelope(const DelaySystem& sys, const Certificate& cert, double t)
{
  return gronwall_alpha(sys) * std::exp(cert.gamma) * std::exp(-(cert.omega - cert.omega_prime) * t);
}

} // namespace devo
