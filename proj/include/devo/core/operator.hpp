#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <variant>
#include <vector>

#include "devo/core/error.hpp"
#include "devo/core/linalg.hpp"

namespace devo {

class OperatorSpec;

namespace op_detail {

struct Dense
{
  Matrix matrix;
};

struct Diagonal
{
  Vector entries;
};

/// Entrywise indicator: keeps the entries where mask is true.
struct Mask
{
  std::vector<bool> keep;
};

/// factors applied right to left, like a matrix product.
struct Composition
{
  std::vector<OperatorSpec> factors;
};

} // namespace op_detail

/**
 * \brief Finite-dimensional linear operator on R^dim.
 *
 * Immutable value type. The representation is a dense matrix, a diagonal, an
 * indicator mask, or a composition of those; diagonal and mask application is
 * exact.
 */
class OperatorSpec
{
public:
  using Representation = std::variant<op_detail::Dense, op_detail::Diagonal, op_detail::Mask, op_detail::Composition>;

  /// Empty placeholder of dimension 0; assign before use.
  OperatorSpec()
    : rep_(op_detail::Diagonal{})
    , dim_(0)
  {}

  static OperatorSpec identity(std::size_t n) { return diagonal(Vector::Ones(static_cast<Eigen::Index>(n))); }

  static OperatorSpec zero(std::size_t n) { return diagonal(Vector::Zero(static_cast<Eigen::Index>(n))); }

  static OperatorSpec dense(Matrix m)
  {
    if (m.rows() != m.cols())
      throw DimensionError("dense operator must be square", static_cast<std::size_t>(m.rows()),
                           static_cast<std::size_t>(m.cols()));
    const auto n = static_cast<std::size_t>(m.rows());
    return OperatorSpec(op_detail::Dense{std::move(m)}, n);
  }

  static OperatorSpec diagonal(Vector d)
  {
    const auto n = static_cast<std::size_t>(d.size());
    return OperatorSpec(op_detail::Diagonal{std::move(d)}, n);
  }

  static OperatorSpec mask(std::vector<bool> keep)
  {
    const auto n = keep.size();
    return OperatorSpec(op_detail::Mask{std::move(keep)}, n);
  }

  /// Mask of dimension n keeping the listed indices.
  static OperatorSpec mask(std::size_t n, const std::vector<std::size_t>& indices)
  {
    std::vector<bool> keep(n, false);
    for (auto i : indices) {
      if (i >= n)
        throw DimensionError("mask index out of range", n, i);
      keep[i] = true;
    }
    return mask(std::move(keep));
  }

  /// outer ∘ inner
  static OperatorSpec compose(const OperatorSpec& outer, const OperatorSpec& inner)
  {
    if (outer.dim() != inner.dim())
      throw DimensionError("composition", outer.dim(), inner.dim());
    return OperatorSpec(op_detail::Composition{{outer, inner}}, outer.dim());
  }

  std::size_t dim() const { return dim_; }

  const Representation& representation() const { return rep_; }

  Vector apply(const Vector& v) const
  {
    check_dim(v);
    return std::visit([&](const auto& r) { return apply_impl(r, v, false); }, rep_);
  }

  Vector apply_transpose(const Vector& v) const
  {
    check_dim(v);
    return std::visit([&](const auto& r) { return apply_impl(r, v, true); }, rep_);
  }

  Vector operator()(const Vector& v) const { return apply(v); }

  Matrix to_dense() const
  {
    const auto n = static_cast<Eigen::Index>(dim_);
    Matrix out(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      out.col(j) = apply(Vector::Unit(n, j));
    return out;
  }

  bool is_zero() const
  {
    if (auto d = std::get_if<op_detail::Diagonal>(&rep_))
      return d->entries.isZero(0.0);
    if (auto m = std::get_if<op_detail::Mask>(&rep_))
      return std::none_of(m->keep.begin(), m->keep.end(), [](bool b) { return b; });
    if (auto m = std::get_if<op_detail::Dense>(&rep_))
      return m->matrix.isZero(0.0);
    return false;
  }

private:
  OperatorSpec(Representation rep, std::size_t dim)
    : rep_(std::move(rep))
    , dim_(dim)
  {
    if (dim_ == 0)
      throw ParameterError("operator dimension must be positive");
  }

  void check_dim(const Vector& v) const
  {
    if (static_cast<std::size_t>(v.size()) != dim_)
      throw DimensionError("operator application", dim_, static_cast<std::size_t>(v.size()));
  }

  static Vector apply_impl(const op_detail::Dense& d, const Vector& v, bool transpose)
  {
    return transpose ? Vector(d.matrix.transpose() * v) : Vector(d.matrix * v);
  }

  static Vector apply_impl(const op_detail::Diagonal& d, const Vector& v, bool)
  {
    return d.entries.cwiseProduct(v);
  }

  static Vector apply_impl(const op_detail::Mask& m, const Vector& v, bool)
  {
    Vector out = Vector::Zero(v.size());
    for (std::size_t i = 0; i < m.keep.size(); ++i)
      if (m.keep[i])
        out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(i));
    return out;
  }

  static Vector apply_impl(const op_detail::Composition& c, const Vector& v, bool transpose)
  {
    Vector out = v;
    if (transpose) {
      for (const auto& f : c.factors)
        out = f.apply_transpose(out);
    } else {
      for (auto it = c.factors.rbegin(); it != c.factors.rend(); ++it)
        out = it->apply(out);
    }
    return out;
  }

  Representation rep_;
  std::size_t dim_;
};

/**
 * \brief Spectral norm by power iteration on op^T op.
 *
 * Deterministic start drawn from probe_seed(). Converged when the eigen-residual
 * of op^T op falls below 1e-11 relative; throws ConvergenceError after
 * `max_iterations`.
 */
inline double operator_norm(const OperatorSpec& op, int max_iterations = 20000)
{
  const auto n = static_cast<Eigen::Index>(op.dim());
  std::mt19937_64 rng(probe_seed());
  std::normal_distribution<double> normal;
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i)
    x(i) = normal(rng);
  x.normalize();

  double lambda = 0.0;
  double resid = 0.0;
  int flat = 0;
  for (int it = 0; it < max_iterations; ++it) {
    Vector y = op.apply_transpose(op.apply(x));
    const double prev = lambda;
    lambda = x.dot(y);
    const double ny = y.norm();
    if (ny == 0.0)
      return 0.0;
    resid = (y - lambda * x).norm();
    if (resid <= 1e-11 * lambda)
      return std::sqrt(lambda);
    // clustered top singular values: the Rayleigh quotient settles long before the vector
    flat = (std::abs(lambda - prev) <= 1e-15 * lambda && resid <= 1e-5 * lambda) ? flat + 1 : 0;
    if (flat >= 5)
      return std::sqrt(lambda);
    x = y / ny;
  }
  throw ConvergenceError("operator_norm: power iteration did not converge", x, resid / std::max(lambda, 1e-300));
}

} // namespace devo
