#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "devo/certificates/decay.hpp"
#include "devo/certificates/small_data.hpp"
#include "devo/core/quadrature.hpp"
#include "devo/models/wave.hpp"

namespace devo {

/// k1 = k when k is integrable on [0, ∞), otherwise k2 = k.
inline KSplit default_split(const Coefficient& k)
{
  return k.integrable() ? KSplit{k, Coefficient()} : KSplit{Coefficient(), k};
}

/**
 * \brief u_tt = Δ_h u − a χ_O u_t + k(t) χ_Õ u_t(t − τ(t)) + |u|^μ u.
 *
 * Requires Õ ⊆ O on the grid, so that ‖D*u‖² <= ‖C*u‖²/a with C C* = a χ_O and
 * D D* = χ_Õ (d = 1). The bounded part of k must satisfy ‖k2‖_∞ < a and the
 * time-varying-delay threshold (2a)(1 − c)/(2 − c).
 */
inline WaveModel build_wave_source(const WaveMesh& mesh, double a_coeff, const SourceSpec& spec, const KSplit& split,
                                   const DelayFunction& tau, const WaveInitial& init,
                                   const std::optional<History>& velocity_past = std::nullopt,
                                   int envelope_samples = 200)
{
  if (!(a_coeff > 0.0))
    throw ParameterError("source model needs a > 0");
  if (!(spec.mu_src > 0.0))
    throw ParameterError("source exponent must be > 0");
  if (!mesh.delay_inside_damping())
    throw ParameterError("source model needs the delay region inside the damping region (O~ subset of O)");
  const double k2 = split.k2.sup_abs();
  if (!(k2 < a_coeff))
    throw ParameterError("source model needs ||k2||_inf < a: ||k2||_inf = " + std::to_string(k2)
                         + ", a = " + std::to_string(a_coeff));
  const double c = tau.slope_bound();
  if (!(k2 <= ksplit_threshold(a_coeff, 1, c)))
    throw ParameterError("source model needs ||k2||_inf <= 2a(1-c)/(2-c) = "
                         + std::to_string(ksplit_threshold(a_coeff, 1, c)) + ", got " + std::to_string(k2));

  auto model = build_wave_frictional(mesh, a_coeff, split.total(), tau, init, velocity_past, envelope_samples);
  model.kind = WaveKind::Source;
  model.source = spec;
  model.split = split;
  model.system.nonlinearity = spec.nonlinearity(mesh.n(), mesh.dx());
  return model;
}

inline WaveModel build_wave_source(const WaveMesh& mesh, double a_coeff, const SourceSpec& spec, const Coefficient& k,
                                   const DelayFunction& tau, const WaveInitial& init,
                                   const std::optional<History>& velocity_past = std::nullopt,
                                   int envelope_samples = 200)
{
  return build_wave_source(mesh, a_coeff, spec, default_split(k), tau, init, velocity_past, envelope_samples);
}

/// C̄ of the source model (d = 1, one channel).
inline double source_cbar(const WaveModel& model)
{
  if (!model.split)
    throw ParameterError("source_cbar needs a source model");
  const auto& ch = model.system.channels.front();
  return cbar({*model.split}, {1.0}, {ch.delay.slope_bound()}, {ch.delay});
}

/// ρ = h⁻¹(1/2)/(2√C̄) with h from the source spec.
inline double source_radius(const WaveModel& model)
{
  if (!model.source)
    throw ParameterError("source_radius needs a source model");
  const auto spec = *model.source;
  return small_data_radius(source_cbar(model), [spec](double r) { return spec.growth(r); });
}

/// Σ_i 1/(1 − c_i) ∫_{−τ_i(0)}^0 |k_i(φ_i⁻¹(s))| ‖D_i* g_i(s)‖² ds over the prescribed past.
inline double initial_window(const WaveModel& model)
{
  double total = 0.0;
  for (const auto& ch : model.system.channels) {
    if (ch.coeff.is_zero())
      continue;
    const double lo = -ch.delay.value(0.0);
    if (!(lo < 0.0))
      continue;
    std::vector<double> breaks;
    for (double r : ch.coeff.switch_times(0.0, ch.delay.phi_inverse(0.0)))
      breaks.push_back(ch.delay.phi(r));
    const double integral = integrate(
      [&](double s) {
        const Vector g = ch.history.eval(s);
        return std::abs(ch.coeff.value(ch.delay.phi_inverse(s))) * model.mesh.l2_norm2(model.v(g), model.mesh.delay());
      },
      lo, 0.0, breaks, 1e-12, 1e-15);
    total += integral / (1.0 - ch.delay.slope_bound());
  }
  return total;
}

/// ‖A₀^{1/2}u₀‖² + ‖u₁‖² + ½ · initial window: must be < ρ² for the small-data regime.
inline double small_data_measure(const WaveModel& model)
{
  const auto& x = model.system.initial;
  return model.mesh.h1_norm2(model.u(x)) + model.mesh.l2_norm2(model.v(x)) + 0.5 * initial_window(model);
}

/// ¾‖A₀^{1/2}u₀‖² + ½‖u₁‖² + ½ · initial window, an upper bound for E(0) when h(‖A₀^{1/2}u₀‖) < 1/2.
inline double initial_energy_majorant(const WaveModel& model)
{
  const auto& x = model.system.initial;
  return 0.75 * model.mesh.h1_norm2(model.u(x)) + 0.5 * model.mesh.l2_norm2(model.v(x)) + 0.5 * initial_window(model);
}

} // namespace devo
