#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "devo/models.hpp"
#include "devo/workbench/config.hpp"

namespace devo {

/// The system assembled from a RunConfig. Wave models keep their mesh data for the energy.
struct BuiltModel
{
  ModelKind kind = ModelKind::Scalar;
  DelaySystem plain;
  std::optional<WaveModel> wave;

  const DelaySystem& system() const { return wave ? wave->system : plain; }
  DelaySystem& system() { return wave ? wave->system : plain; }
};

/// sin(jπx) on the mesh, scaled to unit discrete H¹₀ norm.
inline Vector wave_mode(const WaveMesh& mesh, std::size_t mode)
{
  Vector e(static_cast<Eigen::Index>(mesh.n()));
  for (std::size_t i = 0; i < mesh.n(); ++i)
    e(static_cast<Eigen::Index>(i)) = std::sin(static_cast<double>(mode) * std::numbers::pi * mesh.x(i));
  const double h1 = std::sqrt(mesh.h1_norm2(e));
  if (!(h1 > 0.0))
    throw ConfigError("initial.mode", "mode vanishes on this mesh");
  return e / h1;
}

namespace build_detail {

inline void estimate_linear_envelope(DelaySystem& sys, int samples)
{
  sys.estimate_envelope(wave_detail::envelope_horizon(sys), samples);
}

inline double longest_delay(const RunConfig& cfg)
{
  double t = cfg.tau.tau_bar();
  for (const auto& ch : cfg.channels)
    t = std::max(t, ch.tau.tau_bar());
  return t;
}

} // namespace build_detail

/**
 * \brief Assembles the configured system, including its semigroup envelope.
 *
 * A configured envelope replaces the estimated one. The memory model skips
 * estimation when `estimate_envelope` is false.
 */
inline BuiltModel build_model(const RunConfig& cfg)
{
  BuiltModel out;
  out.kind = cfg.model;
  const double reach = build_detail::longest_delay(cfg);

  switch (cfg.model) {
  case ModelKind::Scalar: {
    out.plain = build_scalar_dde(cfg.a, cfg.k, cfg.tau, History::constant(Vector::Constant(1, cfg.history_value), -reach),
                                 cfg.u0);
    break;
  }
  case ModelKind::Linear: {
    auto& sys = out.plain;
    sys.generator = OperatorSpec::dense(cfg.generator);
    sys.initial = cfg.initial;
    for (const auto& ch : cfg.channels)
      sys.channels.push_back({OperatorSpec::dense(ch.b), ch.k, ch.tau, History::constant(ch.history, -reach)});
    if (!cfg.envelope)
      build_detail::estimate_linear_envelope(sys, cfg.envelope_samples);
    break;
  }
  default: {
    const WaveMesh mesh(cfg.n, cfg.damping, cfg.delay_region);
    const Vector e = wave_mode(mesh, cfg.wave_initial.mode);
    const WaveInitial init{cfg.wave_initial.amplitude * e, cfg.wave_initial.velocity * e};
    std::optional<History> past;
    if (cfg.velocity_history)
      past = History::constant(Vector::Constant(static_cast<Eigen::Index>(cfg.n), *cfg.velocity_history), -reach);
    if (cfg.model == ModelKind::Frictional) {
      out.wave = build_wave_frictional(mesh, cfg.a, cfg.k, cfg.tau, init, past, cfg.envelope_samples);
    } else if (cfg.model == ModelKind::Memory) {
      const Vector eta0 = Vector::Zero(static_cast<Eigen::Index>(cfg.n * cfg.memory->m));
      out.wave = build_wave_memory(mesh, *cfg.memory, cfg.k, cfg.tau, init, eta0, past,
                                   cfg.estimate_envelope && !cfg.envelope, cfg.envelope_samples);
    } else {
      const SourceSpec spec{cfg.mu_src};
      out.wave = cfg.split ? build_wave_source(mesh, cfg.a, spec, *cfg.split, cfg.tau, init, past, cfg.envelope_samples)
                           : build_wave_source(mesh, cfg.a, spec, cfg.k, cfg.tau, init, past, cfg.envelope_samples);
    }
  }
  }
  if (cfg.envelope)
    out.system().envelope = cfg.envelope;
  return out;
}

} // namespace devo
