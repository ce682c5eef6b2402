#pragma once

#include <cstdint>
#include <cstdlib>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace devo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Seed for every stochastic probe (power-iteration starts). Overridden by DEVO_SEED.
inline std::uint64_t probe_seed()
{
  if (const char* env = std::getenv("DEVO_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
    }
  }
  return 20190220ULL;
}

/// exp(A) by scaling and squaring with a Pade approximant.
inline Matrix expm(const Matrix& a)
{
  return a.exp();
}

/// Spectral norm of a dense matrix. Small matrices use an SVD; large ones
/// fall back to power iteration on M^T M seeded from `warm` when given.
inline double two_norm(const Matrix& m, Vector* warm = nullptr)
{
  if (m.rows() == 0 || m.cols() == 0)
    return 0.0;
  if (m.cols() <= 200) {
    Eigen::BDCSVD<Matrix> svd(m);
    return svd.singularValues()(0);
  }
  Vector x = (warm && warm->size() == m.cols()) ? *warm : Vector::Ones(m.cols());
  x.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 5000; ++it) {
    Vector y = m.transpose() * (m * x);
    const double next = x.dot(y);
    const double ny = y.norm();
    if (ny == 0.0)
      return 0.0;
    const double resid = (y - next * x).norm();
    x = y / ny;
    lambda = next;
    if (resid <= 1e-12 * next)
      break;
  }
  if (warm)
    *warm = x;
  return std::sqrt(lambda);
}

} // namespace devo
