#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include "devo/core/coefficient.hpp"
#include "devo/core/delay.hpp"
#include "devo/core/envelope.hpp"
#include "devo/core/error.hpp"
#include "devo/core/history.hpp"
#include "devo/core/nonlinear.hpp"
#include "devo/core/operator.hpp"
#include "devo/core/state_norm.hpp"

namespace devo {

/// One feedback term k(t) B U(t − τ(t)) with its prescribed past f = B U on [−τ*, 0].
struct DelayChannel
{
  OperatorSpec op;
  Coefficient coeff;
  DelayFunction delay = DelayFunction::constant(0.0);
  History history;
};

/**
 * \brief U' = AU + Σ k_i(t) B_i U(t − τ_i(t)) + F(U), U(0) = U₀.
 *
 * `norm` is the Hilbert norm of the state space. The envelope may be left
 * empty and filled in later by estimate_envelope().
 */
struct DelaySystem
{
  OperatorSpec generator;
  std::optional<SemigroupEnvelope> envelope;
  std::vector<DelayChannel> channels;
  NonlinearSpec nonlinearity;
  Vector initial;
  StateNorm norm;

  std::size_t dim() const { return generator.dim(); }

  /// τ* = max_i τ_i(0)
  double tau_star() const
  {
    double t = 0.0;
    for (const auto& ch : channels)
      t = std::max(t, ch.delay.value(0.0));
    return t;
  }

  /// τ_min = min_i inf τ_i; +∞ without channels.
  double tau_min() const
  {
    double t = std::numeric_limits<double>::infinity();
    for (const auto& ch : channels)
      t = std::min(t, ch.delay.tau_lower());
    return t;
  }

  bool has_envelope() const { return envelope.has_value(); }

  const SemigroupEnvelope& require_envelope() const
  {
    if (!envelope)
      throw ParameterError("system has no semigroup envelope; call estimate_envelope first");
    return *envelope;
  }

  /// Fits (M, ω) in the state norm.
  void estimate_envelope(double t_max, int n_samples = 200)
  {
    envelope = estimate_semigroup_envelope(generator.to_dense(), norm, t_max, n_samples);
  }

  /// ‖B_i‖ in the state norm.
  double channel_norm(std::size_t i) const { return norm.operator_norm_of(channels.at(i).op); }

  void validate() const
  {
    const std::size_t n = dim();
    if (static_cast<std::size_t>(initial.size()) != n)
      throw DimensionError("initial state", n, static_cast<std::size_t>(initial.size()));
    const double ts = tau_star();
    for (const auto& ch : channels) {
      if (ch.op.dim() != n)
        throw DimensionError("delay channel operator", n, ch.op.dim());
      if (ch.history.dim() != n)
        throw DimensionError("delay channel history", n, ch.history.dim());
      if (ch.history.t_min() > -ts + 1e-12 * std::max(1.0, ts))
        throw RangeError("history must cover [-tau*, 0]", -ts, ch.history.t_min(), 0.0);
    }
    if (nonlinearity.active() && 2 * nonlinearity.block > n)
      throw DimensionError("nonlinearity blocks", n, 2 * nonlinearity.block);
  }
};

} // namespace devo
