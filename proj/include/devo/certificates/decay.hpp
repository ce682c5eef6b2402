#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "devo/core/coefficient.hpp"
#include "devo/core/delay.hpp"
#include "devo/core/error.hpp"
#include "devo/core/quadrature.hpp"
#include "devo/core/system.hpp"

namespace devo {

/// s with s − τ(s) = σ, for σ >= −τ(0).
inline double phi_inverse(const DelayFunction& delay, double sigma) { return delay.phi_inverse(sigma); }

/**
 * \brief ∫ₐᵇ |k(φ⁻¹(s))| ds for 0 <= a <= b.
 *
 * Substituting s = φ(r) turns this into ∫ |k(r)| (1 − τ'(r)) dr over
 * [φ⁻¹(a), φ⁻¹(b)], which is integrated piecewise between switch times of k.
 */
inline double k_phi_integral(const Coefficient& k, const DelayFunction& delay, double a, double b)
{
  if (b <= a)
    return 0.0;
  const double ra = delay.phi_inverse(a), rb = delay.phi_inverse(b);
  return integrate([&](double r) { return std::abs(k.value(r)) * (1.0 - delay.derivative(r)); }, ra, rb,
                   k.switch_times(ra, rb), 1e-13, 2e-15 * k.sup_abs() * (rb - ra));
}

/// Cumulative ∫₀^{t_j} |k(φ⁻¹(s))| ds on an increasing grid starting at t_0 >= 0.
inline std::vector<double> k_phi_cumulative(const Coefficient& k, const DelayFunction& delay,
                                            const std::vector<double>& times)
{
  std::vector<double> out(times.size(), 0.0);
  double acc = times.empty() ? 0.0 : k_phi_integral(k, delay, 0.0, times.front());
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (j > 0)
      acc += k_phi_integral(k, delay, times[j - 1], times[j]);
    out[j] = acc;
  }
  return out;
}

/// M e^{ωτ̄_i} ‖B_i‖ / (1 − c_i)
inline double channel_weight(const DelaySystem& sys, std::size_t i)
{
  const auto& env = sys.require_envelope();
  const auto& ch = sys.channels.at(i);
  return env.M * std::exp(env.omega * ch.delay.tau_bar()) * sys.channel_norm(i) / (1.0 - ch.delay.slope_bound());
}

/// L(t) = M Σ_i e^{ωτ̄_i}/(1 − c_i) ‖B_i‖ ∫₀ᵗ |k_i(φ_i⁻¹(s))| ds on a grid.
inline std::vector<double> cert_lhs_series(const DelaySystem& sys, const std::vector<double>& times)
{
  std::vector<double> lhs(times.size(), 0.0);
  for (std::size_t i = 0; i < sys.channels.size(); ++i) {
    const auto& ch = sys.channels[i];
    if (ch.coeff.is_zero())
      continue;
    const double w = channel_weight(sys, i);
    const auto cum = k_phi_cumulative(ch.coeff, ch.delay, times);
    for (std::size_t j = 0; j < times.size(); ++j)
      lhs[j] += w * cum[j];
  }
  return lhs;
}

inline double cert_lhs(const DelaySystem& sys, double t) { return cert_lhs_series(sys, {t}).front(); }

/**
 * \brief Single constant delay: M ‖B‖ e^{ωτ} ∫₀ᵗ |k(s + τ)| ds.
 *
 * Evaluated from the closed-form cumulative integral of k, independently of
 * the φ-substitution used for the general case.
 */
inline double single_delay_lhs(double M, double omega, double norm_b, double tau, const Coefficient& k, double t)
{
  return M * norm_b * std::exp(omega * tau) * (k.abs_integral(t + tau) - k.abs_integral(tau));
}

struct Certificate
{
  double omega = 0.0;
  double omega_prime = 0.0;
  /// max over the grid of L(t) − ω′t
  double gamma = 0.0;
  /// γ finite and the tail slope of L does not exceed ω′
  bool holds = false;
  bool holds_asymptotic = false;
  double predicted_rate = 0.0;
  double margin = 0.0;
  double horizon = 0.0;
  /// least-squares slope of L over the second half of the horizon
  double tail_slope = 0.0;
};

namespace cert_detail {

/// Uniform grid on [0, horizon] plus the images φ(r) of switch times r of each k_i.
inline std::vector<double> certificate_grid(const DelaySystem& sys, double horizon, std::size_t n)
{
  std::vector<double> g;
  g.reserve(n + 1);
  for (std::size_t j = 0; j <= n; ++j)
    g.push_back(horizon * static_cast<double>(j) / static_cast<double>(n));
  for (const auto& ch : sys.channels) {
    const double r0 = ch.delay.phi_inverse(0.0), r1 = ch.delay.phi_inverse(horizon);
    for (double r : ch.coeff.switch_times(r0, r1)) {
      const double s = ch.delay.phi(r);
      if (s > 0.0 && s < horizon)
        g.push_back(s);
    }
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

inline double tail_slope(const std::vector<double>& t, const std::vector<double>& y)
{
  const double t_half = 0.5 * t.back();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double cnt = 0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (t[j] < t_half)
      continue;
    sx += t[j];
    sy += y[j];
    sxx += t[j] * t[j];
    sxy += t[j] * y[j];
    cnt += 1;
  }
  const double den = cnt * sxx - sx * sx;
  return den > 0.0 ? (cnt * sxy - sx * sy) / den : 0.0;
}

} // namespace cert_detail

/// Precomputed L(t) on a grid; evaluates the certificate for any ω′ cheaply.
struct CertificateProfile
{
  double omega = 0.0;
  double horizon = 0.0;
  std::vector<double> times;
  std::vector<double> lhs;
  double tail_slope = 0.0;

  Certificate evaluate(double omega_prime) const
  {
    if (!(omega_prime > 0.0) || !(omega_prime < omega))
      throw ParameterError("omega_prime must satisfy 0 < omega_prime < omega (omega=" + std::to_string(omega)
                           + ", omega_prime=" + std::to_string(omega_prime) + ")");
    Certificate c;
    c.omega = omega;
    c.omega_prime = omega_prime;
    c.horizon = horizon;
    c.tail_slope = tail_slope;
    double gamma = 0.0;
    for (std::size_t j = 0; j < times.size(); ++j)
      gamma = std::max(gamma, lhs[j] - omega_prime * times[j]);
    c.gamma = gamma;
    c.holds_asymptotic = std::isfinite(gamma) && tail_slope <= omega_prime * (1.0 + 1e-12);
    c.holds = c.holds_asymptotic;
    c.margin = omega - omega_prime;
    c.predicted_rate = omega - omega_prime;
    return c;
  }
};

inline CertificateProfile certificate_profile(const DelaySystem& sys, double horizon, std::size_t n_grid = 2000)
{
  if (!(horizon > 0.0))
    throw ParameterError("certificate horizon must be > 0");
  CertificateProfile p;
  p.omega = sys.require_envelope().omega;
  p.horizon = horizon;
  p.times = cert_detail::certificate_grid(sys, horizon, n_grid);
  p.lhs = cert_lhs_series(sys, p.times);
  p.tail_slope = cert_detail::tail_slope(p.times, p.lhs);
  return p;
}

/**
 * \brief Checks L(t) <= γ + ω′t for the system's envelope.
 *
 * γ is the smallest constant that works on [0, horizon]. The asymptotic
 * verdict compares the tail slope of L with ω′.
 */
inline Certificate check_decay_certificate(const DelaySystem& sys, double omega_prime, double horizon,
                                           std::size_t n_grid = 2000)
{
  const double omega = sys.require_envelope().omega;
  if (!(omega_prime > 0.0) || !(omega_prime < omega))
    throw ParameterError("omega_prime must satisfy 0 < omega_prime < omega");
  return certificate_profile(sys, horizon, n_grid).evaluate(omega_prime);
}

} // namespace devo
