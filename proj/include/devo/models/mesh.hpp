#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "devo/core/error.hpp"
#include "devo/core/linalg.hpp"

namespace devo {

/// Open interval (lo, hi) of Ω = (0, 1).
struct Region
{
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return lo < x && x < hi; }
};

/**
 * \brief Uniform grid of n interior points on (0, 1) with Dirichlet ends.
 *
 * x_j = j Δx for j = 1..n, Δx = 1/(n+1). The L² norm is Δx Σ v_j² (trapezoid
 * with zero boundary values) and the H¹₀ norm is uᵀKu with
 * K = tridiag(−1, 2, −1)/Δx, i.e. Σ (u_{j+1} − u_j)²/Δx over forward differences.
 * The discrete Laplacian is −K/Δx.
 */
class WaveMesh
{
public:
  WaveMesh() = default;

  WaveMesh(std::size_t n, Region damping, Region delay)
    : n_(n)
    , damping_(damping)
    , delay_(delay)
  {
    if (n < 2)
      throw ParameterError("mesh needs at least 2 interior points");
    for (const Region* r : {&damping_, &delay_})
      if (!(r->lo < r->hi) || r->lo < 0.0 || r->hi > 1.0)
        throw ParameterError("mesh region must satisfy 0 <= lo < hi <= 1");
  }

  std::size_t n() const { return n_; }
  double dx() const { return 1.0 / static_cast<double>(n_ + 1); }
  double x(std::size_t j) const { return static_cast<double>(j + 1) * dx(); }

  const Region& damping() const { return damping_; }
  const Region& delay() const { return delay_; }

  std::vector<bool> mask(const Region& r) const
  {
    std::vector<bool> m(n_);
    for (std::size_t j = 0; j < n_; ++j)
      m[j] = r.contains(x(j));
    return m;
  }

  Vector indicator(const Region& r) const
  {
    Vector chi(static_cast<Eigen::Index>(n_));
    for (std::size_t j = 0; j < n_; ++j)
      chi(static_cast<Eigen::Index>(j)) = r.contains(x(j)) ? 1.0 : 0.0;
    return chi;
  }

  /// Every grid point of the delay region also lies in the damping region.
  bool delay_inside_damping() const
  {
    for (std::size_t j = 0; j < n_; ++j)
      if (delay_.contains(x(j)) && !damping_.contains(x(j)))
        return false;
    return true;
  }

  Matrix stiffness() const
  {
    const auto n = static_cast<Eigen::Index>(n_);
    Matrix k = Matrix::Zero(n, n);
    const double s = 1.0 / dx();
    for (Eigen::Index j = 0; j < n; ++j) {
      k(j, j) = 2.0 * s;
      if (j > 0)
        k(j, j - 1) = k(j - 1, j) = -s;
    }
    return k;
  }

  Matrix laplacian() const { return -stiffness() / dx(); }

  double l2_norm2(const Vector& v) const { return dx() * v.squaredNorm(); }

  /// ‖D v‖² restricted to a region, D the mask onto it.
  double l2_norm2(const Vector& v, const Region& r) const
  {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j)
      if (r.contains(x(j)))
        s += v(static_cast<Eigen::Index>(j)) * v(static_cast<Eigen::Index>(j));
    return dx() * s;
  }

  double h1_norm2(const Vector& u) const
  {
    double s = 0.0, prev = 0.0;
    for (Eigen::Index j = 0; j < u.size(); ++j) {
      s += (u(j) - prev) * (u(j) - prev);
      prev = u(j);
    }
    s += prev * prev;
    return s / dx();
  }

  /// sin(πx) on the grid, scaled to unit H¹₀ norm.
  Vector first_eigenvector() const
  {
    Vector e(static_cast<Eigen::Index>(n_));
    for (std::size_t j = 0; j < n_; ++j)
      e(static_cast<Eigen::Index>(j)) = std::sin(std::numbers::pi * x(j));
    return e / std::sqrt(h1_norm2(e));
  }

  /// Smallest eigenvalue of −Δ_h, (4/Δx²) sin²(πΔx/2).
  double first_eigenvalue() const
  {
    const double s = std::sin(0.5 * std::numbers::pi * dx());
    return 4.0 * s * s / (dx() * dx());
  }

private:
  std::size_t n_ = 0;
  Region damping_;
  Region delay_;
};

} // namespace devo
