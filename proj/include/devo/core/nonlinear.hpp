#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>

#include "devo/core/error.hpp"
#include "devo/core/linalg.hpp"

namespace devo {

/**
 * \brief Power-type source F(U) = (0, |u|^μ u) on a (u, v) state.
 *
 * u occupies entries [0, block) and v entries [block, 2·block) of U; the
 * remaining entries (if any) are untouched. The source is the gradient of
 * Ψ(u) = mass · Σ |u_j|^{μ+2}/(μ+2) in the L² inner product with weight `mass`.
 *
 * The constants come from the 1D embeddings on (0, 1) with Dirichlet data,
 * ‖u‖_∞ <= 2^{-1/2}‖u'‖ and ‖u‖ <= ‖u'‖/π:
 *   h(r) = 2^{-μ/2} r^μ / π
 *   L(r) = (μ+1) · 2^{-μ/2} r^μ / π
 * L follows from the mean-value bound ||a|^μ a − |b|^μ b| <= (μ+1) max(|a|,|b|)^μ |a−b|.
 */
struct NonlinearSpec
{
  enum class Kind { None, PowerSource };

  Kind kind = Kind::None;
  double mu_src = 0.0;
  std::size_t block = 0;
  double mass = 1.0;

  static NonlinearSpec none() { return {}; }

  static NonlinearSpec power_source(double mu, std::size_t block, double mass)
  {
    if (!(mu > 0.0))
      throw ParameterError("source exponent must be > 0");
    return {Kind::PowerSource, mu, block, mass};
  }

  bool active() const { return kind != Kind::None; }

  Vector apply(const Vector& state) const
  {
    Vector out = Vector::Zero(state.size());
    if (!active())
      return out;
    check(state);
    const auto n = static_cast<Eigen::Index>(block);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double u = state(j);
      out(n + j) = std::pow(std::abs(u), mu_src) * u;
    }
    return out;
  }

  Vector operator()(const Vector& state) const { return apply(state); }

  /// Ψ(u)
  double potential(const Vector& state) const
  {
    if (!active())
      return 0.0;
    check(state);
    double s = 0.0;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(block); ++j)
      s += std::pow(std::abs(state(j)), mu_src + 2.0);
    return mass * s / (mu_src + 2.0);
  }

  /// ∇Ψ(u) as an L² vector of length `block`.
  Vector gradient(const Vector& u) const
  {
    Vector g(u.size());
    for (Eigen::Index j = 0; j < u.size(); ++j)
      g(j) = std::pow(std::abs(u(j)), mu_src) * u(j);
    return g;
  }

  double embedding_constant() const { return std::pow(2.0, -0.5 * mu_src) / std::numbers::pi; }

  /// Local Lipschitz constant of F on the ball of radius r.
  double lipschitz(double r) const
  {
    if (!active())
      return 0.0;
    return (mu_src + 1.0) * embedding_constant() * std::pow(r, mu_src);
  }

  /// Growth function h with ‖∇Ψ(u)‖ <= h(‖u'‖) ‖u'‖.
  double growth(double r) const
  {
    if (!active())
      return 0.0;
    return embedding_constant() * std::pow(r, mu_src);
  }

private:
  void check(const Vector& state) const
  {
    if (static_cast<std::size_t>(state.size()) < 2 * block)
      throw DimensionError("nonlinearity", 2 * block, static_cast<std::size_t>(state.size()));
  }
};

} // namespace devo
