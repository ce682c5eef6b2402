#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

#include "devo/certificates/small_data.hpp"
#include "devo/core/coefficient.hpp"
#include "devo/core/delay.hpp"
#include "devo/core/envelope.hpp"
#include "devo/core/error.hpp"
#include "devo/core/history.hpp"
#include "devo/core/nonlinear.hpp"
#include "devo/core/system.hpp"
#include "devo/models/mesh.hpp"

namespace devo {

enum class WaveKind { Frictional, Memory, Source };

/// Displacement and velocity at t = 0.
struct WaveInitial
{
  Vector u0;
  Vector u1;
};

/// Kernel μ(s) = μ₀ e^{−δs} sampled at s_k = kΔs, k = 1..m, on [0, s_max].
struct MemoryGrid
{
  double mu0 = 0.5;
  double delta = 1.0;
  std::size_t m = 40;
  double s_max = 0.0;

  /// Smallest s_max with truncation error μ₀e^{−δ s_max}/δ <= 1e−8 when s_max is not given.
  static MemoryGrid make(double mu0, double delta, std::size_t m, std::optional<double> s_max = std::nullopt)
  {
    if (!(mu0 > 0.0))
      throw ParameterError("memory kernel needs mu0 > 0 (condition (i): mu(0) > 0)");
    if (!(delta > 0.0))
      throw ParameterError("memory kernel needs delta > 0 (condition (iii): mu' <= -delta mu)");
    if (!(mu0 / delta < 1.0))
      throw ParameterError("memory kernel violates condition (ii): mu_tilde = mu0/delta = " + std::to_string(mu0 / delta)
                           + " must be < 1");
    if (m < 2)
      throw ParameterError("memory grid needs at least 2 nodes");
    MemoryGrid g{mu0, delta, m, 0.0};
    g.s_max = s_max.value_or(std::log(mu0 / (delta * 1e-8)) / delta);
    if (!(g.s_max > 0.0))
      throw ParameterError("memory grid needs s_max > 0");
    if (g.tail_error() > 1e-8 * (1.0 + 1e-12))
      throw ParameterError("memory grid truncation mu0 exp(-delta s_max)/delta = " + std::to_string(g.tail_error())
                           + " exceeds 1e-8");
    return g;
  }

  double ds() const { return s_max / static_cast<double>(m); }
  double node(std::size_t k) const { return static_cast<double>(k) * ds(); }
  double mu(double s) const { return mu0 * std::exp(-delta * s); }
  double mu_prime(double s) const { return -delta * mu(s); }
  double mu_tilde() const { return mu0 / delta; }
  double tail_error() const { return mu0 * std::exp(-delta * s_max) / delta; }

  /// Trapezoid weight of node k (1..m); the s = 0 node carries η = 0 and is dropped.
  double weight(std::size_t k) const { return (k == m ? 0.5 : 1.0) * ds() * mu(node(k)); }
};

/// The three kernel conditions, evaluated in closed form for the exponential family.
struct KernelConditions
{
  bool positive_at_zero;
  bool mass_below_one;
  bool decay;
  double mu_tilde;
  double decay_rate;

  bool all() const { return positive_at_zero && mass_below_one && decay; }
};

inline KernelConditions check_kernel_conditions(const MemoryGrid& g)
{
  // μ' = −δμ, so μ' <= −δμ holds with equality for decay rate δ
  return {g.mu(0.0) > 0.0, g.mu_tilde() < 1.0, g.delta > 0.0, g.mu_tilde(), g.delta};
}

/// Source exponent and the 1D embedding constants derived from it (see NonlinearSpec).
struct SourceSpec
{
  double mu_src = 2.0;

  NonlinearSpec nonlinearity(std::size_t n, double dx) const { return NonlinearSpec::power_source(mu_src, n, dx); }
  double embedding_constant() const { return std::pow(2.0, -0.5 * mu_src) / std::numbers::pi; }
  double growth(double r) const { return embedding_constant() * std::pow(r, mu_src); }
  double lipschitz(double r) const { return (mu_src + 1.0) * embedding_constant() * std::pow(r, mu_src); }
};

/// A wave-type DelaySystem together with the data needed for its energy.
struct WaveModel
{
  WaveKind kind = WaveKind::Frictional;
  WaveMesh mesh;
  DelaySystem system;
  double a_coeff = 0.0;
  std::optional<MemoryGrid> memory;
  std::optional<SourceSpec> source;
  std::optional<KSplit> split;

  std::size_t n() const { return mesh.n(); }
  Vector u(const Vector& state) const { return state.head(static_cast<Eigen::Index>(n())); }
  Vector v(const Vector& state) const
  {
    return state.segment(static_cast<Eigen::Index>(n()), static_cast<Eigen::Index>(n()));
  }
  /// η at node k (1..m) for the memory model.
  Vector w(const Vector& state, std::size_t k) const
  {
    const auto n = static_cast<Eigen::Index>(this->n());
    return state.segment(2 * n + static_cast<Eigen::Index>(k - 1) * n, n);
  }
};

namespace wave_detail {

inline void check_initial(const WaveMesh& mesh, const WaveInitial& init)
{
  if (static_cast<std::size_t>(init.u0.size()) != mesh.n())
    throw DimensionError("initial displacement", mesh.n(), static_cast<std::size_t>(init.u0.size()));
  if (static_cast<std::size_t>(init.u1.size()) != mesh.n())
    throw DimensionError("initial velocity", mesh.n(), static_cast<std::size_t>(init.u1.size()));
}

/// Channel history B U(s) from a past velocity on the delay region; zero if none is given.
inline History velocity_history(const WaveMesh& mesh, std::size_t dim, const DelayFunction& tau,
                                const std::optional<History>& velocity_past)
{
  const double t_min = -tau.tau_bar();
  if (!velocity_past)
    return History::zero(dim, t_min);
  if (velocity_past->dim() != mesh.n())
    throw DimensionError("velocity history", mesh.n(), velocity_past->dim());
  if (velocity_past->t_min() > t_min + 1e-12)
    throw RangeError("velocity history must cover [-tau_bar, 0]", t_min, velocity_past->t_min(), 0.0);
  const Vector chi = mesh.indicator(mesh.delay());
  const auto n = static_cast<Eigen::Index>(mesh.n());
  auto past = *velocity_past;
  return History::function(
    [past, chi, n, dim](double s) {
      Vector out = Vector::Zero(static_cast<Eigen::Index>(dim));
      out.segment(n, n) = chi.cwiseProduct(past.eval(s));
      return out;
    },
    dim, t_min);
}

/// B(u, v, …) = (0, χ v, 0…)
inline OperatorSpec velocity_mask(const WaveMesh& mesh, std::size_t dim)
{
  std::vector<bool> keep(dim, false);
  const auto chi = mesh.mask(mesh.delay());
  for (std::size_t j = 0; j < mesh.n(); ++j)
    keep[mesh.n() + j] = chi[j];
  return OperatorSpec::mask(std::move(keep));
}

/// Factor R with ‖RU‖² = uᵀKu + Δx vᵀv.
inline Matrix energy_factor(const WaveMesh& mesh)
{
  const auto n = static_cast<Eigen::Index>(mesh.n());
  Eigen::LLT<Matrix> llt(mesh.stiffness());
  Matrix r = Matrix::Zero(2 * n, 2 * n);
  r.topLeftCorner(n, n) = llt.matrixU();
  r.bottomRightCorner(n, n) = std::sqrt(mesh.dx()) * Matrix::Identity(n, n);
  return r;
}

/// A = [[0, I], [Δ_h, −a χ_O]]
inline Matrix damped_generator(const WaveMesh& mesh, double a_coeff)
{
  const auto n = static_cast<Eigen::Index>(mesh.n());
  Matrix a = Matrix::Zero(2 * n, 2 * n);
  a.topRightCorner(n, n) = Matrix::Identity(n, n);
  a.bottomLeftCorner(n, n) = mesh.laplacian();
  a.bottomRightCorner(n, n) = -a_coeff * mesh.indicator(mesh.damping()).asDiagonal().toDenseMatrix();
  return a;
}

/// Horizon for the envelope fit: long enough that the slowest mode dominates the tail.
inline double envelope_horizon(const DelaySystem& sys)
{
  const auto lambda = rightmost_eigenvalue(sys.generator.to_dense());
  const double abscissa = lambda.real();
  if (!(abscissa < 0.0))
    throw StabilityError(lambda);
  return std::clamp(8.0 / -abscissa, 10.0, 400.0);
}

} // namespace wave_detail

/**
 * \brief u_tt = Δ_h u − a χ_O u_t + k(t) χ_Õ u_t(t − τ(t)) as a first-order system in (u, v).
 *
 * velocity_past is u_t on [−τ̄, 0]; only its values on Õ enter. The state norm is
 * the discrete H¹₀ × L² norm and the envelope is estimated from the generator.
 */
inline WaveModel build_wave_frictional(const WaveMesh& mesh, double a_coeff, const Coefficient& k,
                                       const DelayFunction& tau, const WaveInitial& init,
                                       const std::optional<History>& velocity_past = std::nullopt,
                                       int envelope_samples = 200)
{
  if (!(a_coeff > 0.0))
    throw ParameterError("frictional model needs a > 0");
  wave_detail::check_initial(mesh, init);
  const std::size_t dim = 2 * mesh.n();
  WaveModel model;
  model.kind = WaveKind::Frictional;
  model.mesh = mesh;
  model.a_coeff = a_coeff;
  auto& sys = model.system;
  sys.generator = OperatorSpec::dense(wave_detail::damped_generator(mesh, a_coeff));
  sys.norm = StateNorm::factor(wave_detail::energy_factor(mesh));
  sys.initial = Vector(static_cast<Eigen::Index>(dim));
  sys.initial << init.u0, init.u1;
  sys.channels.push_back(
    {wave_detail::velocity_mask(mesh, dim), k, tau, wave_detail::velocity_history(mesh, dim, tau, velocity_past)});
  sys.estimate_envelope(wave_detail::envelope_horizon(sys), envelope_samples);
  return model;
}

} // namespace devo
