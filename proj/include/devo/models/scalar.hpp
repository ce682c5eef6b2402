#pragma once

#include <cmath>
#include <vector>

#include "devo/core/coefficient.hpp"
#include "devo/core/delay.hpp"
#include "devo/core/error.hpp"
#include "devo/core/history.hpp"
#include "devo/core/system.hpp"

namespace devo {

/// u' = −a u + k(t) u(t − τ(t)); envelope M = 1, ω = a exactly.
inline DelaySystem build_scalar_dde(double a_coeff, const Coefficient& k, const DelayFunction& tau, History history,
                                    double u0)
{
  if (!(a_coeff > 0.0))
    throw ParameterError("scalar model needs a > 0");
  if (history.dim() != 1)
    throw DimensionError("scalar history", 1, history.dim());
  DelaySystem sys;
  sys.generator = OperatorSpec::dense(Matrix::Constant(1, 1, -a_coeff));
  sys.envelope = SemigroupEnvelope{1.0, a_coeff};
  sys.initial = Vector::Constant(1, u0);
  sys.channels.push_back({OperatorSpec::identity(1), k, tau, std::move(history)});
  return sys;
}

/// Constant history h on [−τ(0), 0] and u(0) = h.
inline DelaySystem build_scalar_dde(double a_coeff, const Coefficient& k, const DelayFunction& tau, double h)
{
  return build_scalar_dde(a_coeff, k, tau, History::constant(Vector::Constant(1, h), -tau.value(0.0)), h);
}

/**
 * \brief Piecewise closed-form solution of u' = −a u + k u(t − τ) with constant k, τ and history h.
 *
 * On window j (t = jτ + s, 0 <= s <= τ) the solution is c_j + e^{−as} P_j(s)
 * with c_j = k c_{j−1}/a and P_j(s) = u_j(0) − c_j + k ∫₀ˢ P_{j−1}, starting
 * from c_{−1} = h, P_{−1} = 0.
 */
class ScalarStepsSolution
{
public:
  ScalarStepsSolution(double a, double k, double tau, double h, double u0, double t_end)
    : a_(a)
    , tau_(tau)
  {
    if (!(a > 0.0) || !(tau > 0.0))
      throw ParameterError("scalar oracle needs a > 0 and tau > 0");
    double c = h;
    std::vector<double> p; // empty polynomial
    double start = u0;
    const auto windows = static_cast<std::size_t>(std::ceil(t_end / tau)) + 1;
    for (std::size_t j = 0; j < windows; ++j) {
      const double cj = k * c / a;
      std::vector<double> pj(p.size() + 1, 0.0);
      pj[0] = start - cj;
      for (std::size_t i = 0; i < p.size(); ++i)
        pj[i + 1] += k * p[i] / static_cast<double>(i + 1);
      c = cj;
      p = pj;
      consts_.push_back(cj);
      polys_.push_back(pj);
      start = window_value(j, tau);
    }
  }

  double operator()(double t) const
  {
    if (t < 0.0)
      throw RangeError("scalar oracle", t, 0.0, tau_ * static_cast<double>(polys_.size()));
    auto j = static_cast<std::size_t>(std::floor(t / tau_));
    if (j >= polys_.size())
      throw RangeError("scalar oracle", t, 0.0, tau_ * static_cast<double>(polys_.size()));
    double s = t - static_cast<double>(j) * tau_;
    // prefer the left window at its right end
    if (j > 0 && s < 1e-14 * std::max(1.0, t)) {
      --j;
      s = tau_;
    }
    return window_value(j, s);
  }

private:
  double window_value(std::size_t j, double s) const
  {
    const auto& p = polys_[j];
    double acc = 0.0;
    for (std::size_t i = p.size(); i-- > 0;)
      acc = acc * s + p[i];
    return consts_[j] + std::exp(-a_ * s) * acc;
  }

  double a_;
  double tau_;
  std::vector<double> consts_;
  std::vector<std::vector<double>> polys_;
};

} // namespace devo
