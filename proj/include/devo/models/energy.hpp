#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "devo/core/quadrature.hpp"
#include "devo/models/wave.hpp"
#include "devo/stepper/history_buffer.hpp"
#include "devo/stepper/solver.hpp"

namespace devo {

/// E = kinetic + elastic − potential + window.
struct EnergyTerms
{
  /// ½‖u_t‖²
  double kinetic = 0.0;
  /// ½‖A₀^{1/2}u‖², or ½ of (1 − μ̃)‖u‖²_{H¹} + memory norm for the memory model
  double elastic = 0.0;
  /// Ψ(u)
  double potential = 0.0;
  /// ½ Σ 1/(1 − c_i) ∫_{t−τ_i(t)}^t |k_i(φ_i⁻¹(s))| ‖D_i* u_t(s)‖² ds
  double window = 0.0;

  double total() const { return kinetic + elastic - potential + window; }
  /// ¼‖u_t‖² + ¼‖A₀^{1/2}u‖² + ¼ window sum
  double quarter() const { return 0.5 * (kinetic + elastic + window); }
};

namespace energy_detail {

inline EnergyTerms state_terms(const WaveModel& model, const Vector& x)
{
  EnergyTerms e;
  const auto& mesh = model.mesh;
  e.kinetic = 0.5 * mesh.l2_norm2(model.v(x));
  if (model.kind == WaveKind::Memory) {
    const auto& g = *model.memory;
    double el = (1.0 - g.mu_tilde()) * mesh.h1_norm2(model.u(x));
    for (std::size_t k = 1; k <= g.m; ++k)
      el += g.weight(k) * mesh.h1_norm2(model.w(x, k));
    e.elastic = 0.5 * el;
  } else {
    e.elastic = 0.5 * mesh.h1_norm2(model.u(x));
  }
  e.potential = model.system.nonlinearity.potential(x);
  return e;
}

} // namespace energy_detail

/**
 * \brief Energy terms at time t from the solver's history buffer.
 *
 * The window integrals use composite Simpson on panels of width <= step,
 * split at s = 0 (past data versus buffer) and at images φ(r) of switch times of k.
 */
inline EnergyTerms energy_terms(const WaveModel& model, const HistoryBuffer& buffer, double t, double step = 1e-3)
{
  auto e = energy_detail::state_terms(model, buffer.eval(t));
  const auto& mesh = model.mesh;
  for (const auto& ch : model.system.channels) {
    if (ch.coeff.is_zero())
      continue;
    const double lo = t - ch.delay.value(t);
    if (!(lo < t))
      continue;
    // one-sided limits from inside each piece: the past velocity and u_t(0) may differ,
    // and k jumps at switch times
    auto integrand = [&](double s, bool from_left, bool past) {
      const Vector x = past ? ch.history.eval(std::min(s, 0.0)) : buffer.eval(std::max(s, 0.0));
      const double r = ch.delay.phi_inverse(s);
      const double kv = from_left ? ch.coeff.value_left(r) : ch.coeff.value(r);
      return std::abs(kv) * mesh.l2_norm2(model.v(x), mesh.delay());
    };
    std::vector<double> cuts{lo, t};
    if (lo < 0.0 && t > 0.0)
      cuts.push_back(0.0);
    for (double r : ch.coeff.switch_times(ch.delay.phi_inverse(lo), ch.delay.phi_inverse(t))) {
      const double s = ch.delay.phi(r);
      if (s > lo && s < t)
        cuts.push_back(s);
    }
    std::sort(cuts.begin(), cuts.end());
    double integral = 0.0;
    for (std::size_t j = 1; j < cuts.size(); ++j) {
      const double a = cuts[j - 1], b = cuts[j];
      if (!(b > a))
        continue;
      const bool past = b <= 0.0;
      const int panels = std::max(4, 2 * static_cast<int>(std::ceil(0.5 * (b - a) / step)));
      const double h = (b - a) / panels;
      double sum = integrand(a, false, past) + integrand(b, true, past);
      for (int i = 1; i < panels; ++i)
        sum += (i % 2 ? 4.0 : 2.0) * integrand(a + i * h, false, past);
      integral += sum * h / 3.0;
    }
    e.window += 0.5 * integral / (1.0 - ch.delay.slope_bound());
  }
  return e;
}

inline double energy(const WaveModel& model, const HistoryBuffer& buffer, double t, double step = 1e-3)
{
  return energy_terms(model, buffer, t, step).total();
}

/// E(t) > ¼‖u_t‖² + ¼‖A₀^{1/2}u‖² + ¼ window, strictly (relative slack 1e−12); false for the zero state.
inline bool monitor_energy_lower(const EnergyTerms& e)
{
  return e.total() > e.quarter() * (1.0 + 1e-12);
}

inline bool monitor_energy_lower(const WaveModel& model, const HistoryBuffer& buffer, double t, double step = 1e-3)
{
  return monitor_energy_lower(energy_terms(model, buffer, t, step));
}

/// Adapter for solve(); step should match the solver's dt.
inline EnergyFn energy_fn(const WaveModel& model, double step)
{
  return [&model, step](const HistoryBuffer& buffer, double t) { return energy(model, buffer, t, step); };
}

} // namespace devo
