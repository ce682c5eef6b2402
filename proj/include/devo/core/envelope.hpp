#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "devo/core/error.hpp"
#include "devo/core/linalg.hpp"
#include "devo/core/operator.hpp"
#include "devo/core/state_norm.hpp"

namespace devo {

/// ‖exp(tA)‖ <= M e^{-ωt}
struct SemigroupEnvelope
{
  double M = 1.0;
  double omega = 1.0;

  double bound(double t) const { return M * std::exp(-omega * t); }
};

/// Eigenvalue of A with the largest real part.
inline std::complex<double> rightmost_eigenvalue(const Matrix& a)
{
  Eigen::EigenSolver<Matrix> es(a, false);
  if (es.info() != Eigen::Success)
    throw Error("eigenvalue computation failed");
  const auto& ev = es.eigenvalues();
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < ev.size(); ++i)
    if (ev(i).real() > ev(best).real())
      best = i;
  return ev(best);
}

inline double spectral_abscissa(const Matrix& a)
{
  return rightmost_eigenvalue(a).real();
}

namespace envelope_detail {

struct Sampler
{
  const Matrix& a;
  double norm_at(double t) const { return two_norm(expm(t * a)); }
};

/// Golden-section maximisation of f on [lo, hi].
template <class F>
double golden_max(F&& f, double lo, double hi, int iterations = 60)
{
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  double best = std::max({f(lo), f(hi), f1, f2});
  for (int i = 0; i < iterations && hi - lo > 1e-12; ++i) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = f(x1);
    }
    best = std::max({best, f1, f2});
  }
  return best;
}

} // namespace envelope_detail

/**
 * \brief Fits (M, ω) with ‖exp(tA)‖ <= M e^{-ωt} on [0, t_max].
 *
 * The norm is the Euclidean one; for a weighted StateNorm pass R A R⁻¹.
 * ω is the smaller of 0.95·(−spectral abscissa) and the least-squares slope of
 * −log ‖exp(tA)‖ over the second half of the horizon. M is the largest sampled
 * ‖exp(tA)‖e^{ωt}, refined by golden-section search around the largest local
 * maxima so that values between samples are covered, and clamped to M >= 1.
 */
inline SemigroupEnvelope estimate_semigroup_envelope(const Matrix& a, double t_max, int n_samples = 200)
{
  if (a.rows() != a.cols())
    throw DimensionError("generator must be square", static_cast<std::size_t>(a.rows()),
                         static_cast<std::size_t>(a.cols()));
  if (!(t_max > 0.0))
    throw ParameterError("estimate_semigroup_envelope: t_max must be > 0");
  if (n_samples < 10)
    throw ParameterError("estimate_semigroup_envelope: n_samples must be >= 10");

  const auto lead = rightmost_eigenvalue(a);
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (lead.real() >= -1e-10 * scale)
    throw StabilityError(lead);

  const double h = t_max / (n_samples - 1);
  const Matrix step = expm(h * a);
  std::vector<double> times(static_cast<std::size_t>(n_samples)), g(times.size());
  Matrix power = Matrix::Identity(a.rows(), a.cols());
  Vector warm;
  for (int j = 0; j < n_samples; ++j) {
    const double t = j * h;
    if (j > 0) {
      // reset drift of repeated products every 32 samples
      power = (j % 32 == 0) ? expm(t * a) : Matrix(power * step);
    }
    times[static_cast<std::size_t>(j)] = t;
    g[static_cast<std::size_t>(j)] = two_norm(power, &warm);
  }

  double omega = -0.95 * lead.real();
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t j = 0; j < times.size(); ++j) {
      if (times[j] < 0.5 * t_max || !(g[j] > 0.0))
        continue;
      const double y = -std::log(g[j]);
      sx += times[j];
      sy += y;
      sxx += times[j] * times[j];
      sxy += times[j] * y;
      ++cnt;
    }
    const double denom = cnt * sxx - sx * sx;
    if (cnt >= 2 && denom > 0.0) {
      const double slope = (cnt * sxy - sx * sy) / denom;
      if (std::isfinite(slope) && slope > 0.0)
        omega = std::min(omega, slope);
    }
  }

  std::vector<double> weighted(g.size());
  for (std::size_t j = 0; j < g.size(); ++j)
    weighted[j] = g[j] * std::exp(omega * times[j]);
  double M = *std::max_element(weighted.begin(), weighted.end());

  // local maxima of the sampled sequence, largest first
  std::vector<std::size_t> peaks;
  for (std::size_t j = 0; j < weighted.size(); ++j) {
    const bool left_ok = j == 0 || weighted[j] >= weighted[j - 1];
    const bool right_ok = j + 1 == weighted.size() || weighted[j] >= weighted[j + 1];
    if (left_ok && right_ok)
      peaks.push_back(j);
  }
  std::sort(peaks.begin(), peaks.end(), [&](auto x, auto y) { return weighted[x] > weighted[y]; });
  if (peaks.size() > 6)
    peaks.resize(6);
  const envelope_detail::Sampler sampler{a};
  for (auto j : peaks) {
    const double lo = j == 0 ? 0.0 : times[j - 1];
    const double hi = j + 1 == times.size() ? times[j] : times[j + 1];
    if (hi <= lo)
      continue;
    M = std::max(M, envelope_detail::golden_max(
                      [&](double t) { return sampler.norm_at(t) * std::exp(omega * t); }, lo, hi, 40));
  }
  return {std::max(M, 1.0), omega};
}

inline SemigroupEnvelope estimate_semigroup_envelope(const OperatorSpec& a, double t_max, int n_samples = 200)
{
  return estimate_semigroup_envelope(a.to_dense(), t_max, n_samples);
}

/// Envelope of A in a weighted norm.
inline SemigroupEnvelope estimate_semigroup_envelope(const Matrix& a, const StateNorm& norm, double t_max,
                                                     int n_samples = 200)
{
  return estimate_semigroup_envelope(norm.similarity(a), t_max, n_samples);
}

} // namespace devo
