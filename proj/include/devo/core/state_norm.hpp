#pragma once

#include <cmath>
#include <memory>

#include "devo/core/error.hpp"
#include "devo/core/linalg.hpp"
#include "devo/core/operator.hpp"

namespace devo {

/**
 * \brief Hilbert norm on the coordinate space, ‖U‖ = ‖R U‖₂.
 *
 * R is the identity, a positive diagonal (square roots of diagonal weights), or
 * an invertible dense factor such as the transposed Cholesky factor of a Gram
 * matrix. Operator norms and semigroup envelopes are taken in this norm.
 */
class StateNorm
{
public:
  StateNorm() = default;

  /// ‖U‖² = Σ w_i U_i²
  static StateNorm weights(const Vector& w)
  {
    if ((w.array() <= 0.0).any())
      throw ParameterError("norm weights must be positive");
    StateNorm n;
    n.factor_ = std::make_shared<const Matrix>(Matrix(w.cwiseSqrt().asDiagonal()));
    n.inverse_ = std::make_shared<const Matrix>(Matrix(w.cwiseSqrt().cwiseInverse().asDiagonal()));
    return n;
  }

  /// ‖U‖² = Uᵀ G U for symmetric positive definite G.
  static StateNorm gram(const Matrix& g)
  {
    Eigen::LLT<Matrix> llt(g);
    if (llt.info() != Eigen::Success)
      throw ParameterError("Gram matrix is not positive definite");
    Matrix r = llt.matrixU();
    return factor(std::move(r));
  }

  static StateNorm factor(Matrix r)
  {
    if (r.rows() != r.cols())
      throw DimensionError("norm factor must be square", static_cast<std::size_t>(r.rows()),
                           static_cast<std::size_t>(r.cols()));
    Eigen::PartialPivLU<Matrix> lu(r);
    Matrix inv = lu.inverse();
    if (!inv.allFinite())
      throw ParameterError("norm factor is singular");
    StateNorm n;
    n.factor_ = std::make_shared<const Matrix>(std::move(r));
    n.inverse_ = std::make_shared<const Matrix>(std::move(inv));
    return n;
  }

  bool is_identity() const { return !factor_; }

  double norm(const Vector& u) const { return factor_ ? ((*factor_) * u).norm() : u.norm(); }

  double squared(const Vector& u) const
  {
    const double n = norm(u);
    return n * n;
  }

  /// R A R⁻¹, the operator seen in Euclidean coordinates.
  Matrix similarity(const Matrix& a) const
  {
    if (!factor_)
      return a;
    check(a.rows());
    return (*factor_) * a * (*inverse_);
  }

  /// Operator norm of `op` in this norm.
  double operator_norm_of(const OperatorSpec& op) const
  {
    if (!factor_)
      return operator_norm(op);
    check(static_cast<Eigen::Index>(op.dim()));
    auto weighted = OperatorSpec::compose(OperatorSpec::dense(*factor_),
                                          OperatorSpec::compose(op, OperatorSpec::dense(*inverse_)));
    return operator_norm(weighted);
  }

  const Matrix* factor() const { return factor_.get(); }

private:
  void check(Eigen::Index n) const
  {
    if (factor_ && factor_->rows() != n)
      throw DimensionError("state norm", static_cast<std::size_t>(factor_->rows()), static_cast<std::size_t>(n));
  }

  std::shared_ptr<const Matrix> factor_;
  std::shared_ptr<const Matrix> inverse_;
};

} // namespace devo
