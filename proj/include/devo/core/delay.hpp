#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "devo/core/error.hpp"

namespace devo {

/**
 * \brief Time-varying delay τ(t) with bounds tau_lower <= τ(t) <= tau_bar and τ' <= c < 1.
 *
 * Forms: constant τ̄, or τ₀ + A·sin(νt). A declared slope bound may be
 * larger than the intrinsic |A|ν but never >= 1.
 */
class DelayFunction
{
public:
  static DelayFunction constant(double tau, std::optional<double> declared_c = std::nullopt)
  {
    if (!(tau >= 0.0))
      throw ParameterError("delay must be nonnegative");
    return DelayFunction(tau, 0.0, 0.0, declared_c);
  }

  static DelayFunction sinusoid(double mean, double amplitude, double nu, std::optional<double> declared_c = std::nullopt)
  {
    if (!(mean - std::abs(amplitude) >= 0.0))
      throw ParameterError("sinusoidal delay must stay nonnegative (mean >= |amplitude|)");
    return DelayFunction(mean, amplitude, nu, declared_c);
  }

  double value(double t) const { return mean_ + amp_ * std::sin(nu_ * t); }
  double operator()(double t) const { return value(t); }

  double derivative(double t) const { return amp_ * nu_ * std::cos(nu_ * t); }

  double tau_bar() const { return mean_ + std::abs(amp_); }
  double tau_lower() const { return mean_ - std::abs(amp_); }

  /// Slope bound c with τ' <= c < 1.
  double slope_bound() const { return c_; }

  bool is_constant() const { return amp_ == 0.0 || nu_ == 0.0; }

  double mean() const { return mean_; }
  double amplitude() const { return amp_; }
  double frequency() const { return nu_; }

  /// φ(s) = s − τ(s)
  double phi(double s) const { return s - value(s); }

  /**
   * Solves s − τ(s) = σ for s >= 0 by bisection on [max(σ, 0), σ + τ̄].
   * Requires σ >= −τ(0); φ is strictly increasing because τ' <= c < 1.
   */
  double phi_inverse(double sigma) const
  {
    const double floor_sigma = -value(0.0);
    if (sigma < floor_sigma - 1e-12 * std::max(1.0, std::abs(sigma)))
      throw ParameterError("phi_inverse: sigma below -tau(0)");
    if (is_constant())
      return std::max(sigma + mean_, 0.0);
    double lo = std::max(sigma, 0.0);
    double hi = sigma + tau_bar();
    if (phi(lo) >= sigma)
      return lo;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (phi(mid) < sigma)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }

  /// τ(t) + ε
  DelayFunction shifted(double eps) const
  {
    DelayFunction d = *this;
    d.mean_ += eps;
    return d;
  }

private:
  DelayFunction(double mean, double amp, double nu, std::optional<double> declared_c)
    : mean_(mean)
    , amp_(amp)
    , nu_(nu)
  {
    const double intrinsic = std::abs(amp) * std::abs(nu);
    if (declared_c) {
      if (!(*declared_c >= 0.0))
        throw ParameterError("delay slope bound c must be nonnegative");
      if (*declared_c + 1e-15 < intrinsic)
        throw ParameterError("declared delay slope bound c=" + std::to_string(*declared_c)
                             + " is below the actual max derivative " + std::to_string(intrinsic));
      c_ = *declared_c;
    } else {
      c_ = intrinsic;
    }
    if (!(c_ < 1.0))
      throw ParameterError("delay slope bound must satisfy c < 1 (got c=" + std::to_string(c_) + ")");
  }

  double mean_;
  double amp_;
  double nu_;
  double c_ = 0.0;
};

} // namespace devo
