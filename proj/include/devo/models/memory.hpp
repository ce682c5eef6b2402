#pragma once

#include <cmath>
#include <functional>
#include <optional>

#include "devo/models/wave.hpp"

namespace devo {

/// η₀(·, s_k) = u(·, 0) − u(·, −s_k) from a prescribed past displacement, stacked over k = 1..m.
inline Vector assemble_eta0(const WaveMesh& mesh, const MemoryGrid& grid, const std::function<Vector(double)>& u_past)
{
  const auto n = static_cast<Eigen::Index>(mesh.n());
  const Vector now = u_past(0.0);
  if (now.size() != n)
    throw DimensionError("past displacement", mesh.n(), static_cast<std::size_t>(now.size()));
  Vector eta(n * static_cast<Eigen::Index>(grid.m));
  for (std::size_t k = 1; k <= grid.m; ++k)
    eta.segment(static_cast<Eigen::Index>(k - 1) * n, n) = now - u_past(-grid.node(k));
  return eta;
}

namespace wave_detail {

/// Factor R with ‖RU‖² = (1 − μ̃) uᵀKu + Δx vᵀv + Σ_k β_k w_kᵀK w_k.
inline Matrix memory_factor(const WaveMesh& mesh, const MemoryGrid& g)
{
  const auto n = static_cast<Eigen::Index>(mesh.n());
  const auto m = static_cast<Eigen::Index>(g.m);
  Eigen::LLT<Matrix> llt(mesh.stiffness());
  const Matrix u = llt.matrixU();
  Matrix r = Matrix::Zero((2 + m) * n, (2 + m) * n);
  r.topLeftCorner(n, n) = std::sqrt(1.0 - g.mu_tilde()) * u;
  r.block(n, n, n, n) = std::sqrt(mesh.dx()) * Matrix::Identity(n, n);
  for (Eigen::Index k = 1; k <= m; ++k)
    r.block((1 + k) * n, (1 + k) * n, n, n) = std::sqrt(g.weight(static_cast<std::size_t>(k))) * u;
  return r;
}

/**
 * Rows (v; (1 − μ̃)Δ_h u + Σ β_k Δ_h w_k; −(w_k − w_{k−1})/Δs + v) with w_0 = 0.
 * Upwinding with decreasing weights β_k keeps the generator dissipative in the
 * memory norm.
 */
inline Matrix memory_generator(const WaveMesh& mesh, const MemoryGrid& g)
{
  const auto n = static_cast<Eigen::Index>(mesh.n());
  const auto m = static_cast<Eigen::Index>(g.m);
  const Matrix lap = mesh.laplacian();
  const Matrix id = Matrix::Identity(n, n);
  const double inv_ds = 1.0 / g.ds();
  Matrix a = Matrix::Zero((2 + m) * n, (2 + m) * n);
  a.block(0, n, n, n) = id;
  a.block(n, 0, n, n) = (1.0 - g.mu_tilde()) * lap;
  for (Eigen::Index k = 1; k <= m; ++k) {
    const Eigen::Index row = (1 + k) * n;
    a.block(n, row, n, n) = g.weight(static_cast<std::size_t>(k)) * lap;
    a.block(row, row, n, n) = -inv_ds * id;
    if (k > 1)
      a.block(row, row - n, n, n) = inv_ds * id;
    a.block(row, n, n, n) = id;
  }
  return a;
}

} // namespace wave_detail

/**
 * \brief u_tt = (1 − μ̃)Δ_h u + ∫μ Δ_h η ds + k(t) χ_Õ u_t(t − τ(t)), η_t = −η_s + u_t.
 *
 * The feedback acts on the mesh's delay region. Envelope estimation on the
 * (2 + m)n-dimensional generator is optional because it dominates the cost.
 */
inline WaveModel build_wave_memory(const WaveMesh& mesh, const MemoryGrid& grid, const Coefficient& k,
                                   const DelayFunction& tau, const WaveInitial& init, const Vector& eta0,
                                   const std::optional<History>& velocity_past = std::nullopt,
                                   bool estimate_envelope = false, int envelope_samples = 200)
{
  const auto conditions = check_kernel_conditions(grid);
  if (!conditions.mass_below_one)
    throw ParameterError("memory kernel violates condition (ii): mu_tilde = " + std::to_string(conditions.mu_tilde)
                         + " must be < 1");
  if (!conditions.positive_at_zero || !conditions.decay)
    throw ParameterError("memory kernel violates conditions (i)/(iii)");
  wave_detail::check_initial(mesh, init);
  const std::size_t dim = (2 + grid.m) * mesh.n();
  if (static_cast<std::size_t>(eta0.size()) != grid.m * mesh.n())
    throw DimensionError("initial history variable", grid.m * mesh.n(), static_cast<std::size_t>(eta0.size()));

  WaveModel model;
  model.kind = WaveKind::Memory;
  model.mesh = mesh;
  model.memory = grid;
  auto& sys = model.system;
  sys.generator = OperatorSpec::dense(wave_detail::memory_generator(mesh, grid));
  sys.norm = StateNorm::factor(wave_detail::memory_factor(mesh, grid));
  sys.initial = Vector(static_cast<Eigen::Index>(dim));
  sys.initial << init.u0, init.u1, eta0;
  sys.channels.push_back(
    {wave_detail::velocity_mask(mesh, dim), k, tau, wave_detail::velocity_history(mesh, dim, tau, velocity_past)});
  if (estimate_envelope)
    sys.estimate_envelope(wave_detail::envelope_horizon(sys), envelope_samples);
  return model;
}

} // namespace devo
