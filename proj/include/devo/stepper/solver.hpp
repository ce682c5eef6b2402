#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "devo/core/error.hpp"
#include "devo/core/linalg.hpp"
#include "devo/core/system.hpp"
#include "devo/stepper/config.hpp"
#include "devo/stepper/duhamel.hpp"
#include "devo/stepper/history_buffer.hpp"
#include "devo/stepper/trajectory.hpp"

namespace devo {

/// Energy evaluated at recorded times; the buffer holds U on the recent past.
using EnergyFn = std::function<double(const HistoryBuffer&, double t)>;

/// Called at every recorded time after the state has been pushed.
using Observer = std::function<void(double t, const Vector& u, const HistoryBuffer&)>;

namespace solver_detail {

inline bool active(const DelayChannel& ch) { return !ch.coeff.is_zero(); }

inline double active_tau_min(const DelaySystem& sys)
{
  double t = std::numeric_limits<double>::infinity();
  for (const auto& ch : sys.channels)
    if (active(ch))
      t = std::min(t, ch.delay.tau_lower());
  return t;
}

/// Sorted step-grid breakpoints in [0, t_end], including both ends.
inline std::vector<double> breakpoints(const DelaySystem& sys, double t_end, const SolverConfig& cfg)
{
  std::vector<double> pts{0.0, t_end};
  const double tau_min = active_tau_min(sys);
  if (cfg.align_windows && std::isfinite(tau_min)) {
    for (double j = 1.0; j * tau_min < t_end; j += 1.0)
      pts.push_back(j * tau_min);
  }
  if (cfg.snap_switches) {
    for (const auto& ch : sys.channels)
      if (active(ch))
        for (double s : ch.coeff.switch_times(0.0, t_end))
          pts.push_back(s);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  for (double p : pts)
    if (out.empty() || p - out.back() > 1e-10 * std::max(1.0, std::abs(p)))
      out.push_back(p);
  out.back() = t_end;
  return out;
}

/// exp(hA) (or the implicit Euler resolvent) per distinct step size.
class PropagatorCache
{
public:
  PropagatorCache(Matrix a, Scheme scheme)
    : a_(std::move(a))
    , scheme_(scheme)
  {}

  const Matrix& exponential(double h)
  {
    for (auto& [key, m] : exp_)
      if (std::abs(key - h) <= 1e-13 * h)
        return m;
    exp_.emplace_back(h, expm(h * a_));
    return exp_.back().second;
  }

  const Eigen::PartialPivLU<Matrix>& resolvent(double h)
  {
    for (auto& [key, lu] : lu_)
      if (std::abs(key - h) <= 1e-13 * h)
        return lu;
    const auto n = a_.rows();
    lu_.emplace_back(h, Eigen::PartialPivLU<Matrix>(Matrix(Matrix::Identity(n, n) - h * a_)));
    return lu_.back().second;
  }

  Scheme scheme() const { return scheme_; }

private:
  Matrix a_;
  Scheme scheme_;
  std::vector<std::pair<double, Matrix>> exp_;
  std::vector<std::pair<double, Eigen::PartialPivLU<Matrix>>> lu_;
};

/// Σ k_i(t) B_i U(t − τ_i(t)); `left` takes k_i(t⁻) at switch times.
inline Vector delay_forcing(const DelaySystem& sys, const HistoryBuffer& buffer, double t, bool left)
{
  Vector g = Vector::Zero(static_cast<Eigen::Index>(sys.dim()));
  for (const auto& ch : sys.channels) {
    const double k = left ? ch.coeff.value_left(t) : ch.coeff.value(t);
    if (k == 0.0)
      continue;
    const double sigma = t - ch.delay.value(t);
    if (sigma < 0.0)
      g += k * ch.history.eval(sigma);
    else
      g += k * ch.op.apply(buffer.eval(sigma));
  }
  return g;
}

} // namespace solver_detail

/**
 * \brief Method-of-steps solver with exact semigroup propagation.
 *
 * Windows of length τ_min = min_i inf τ_i are split into equal steps h <= dt.
 * Each step is U_{n+1} = E(U_n + h/2·G_n) + h/2·G_{n+1} with E = exp(hA) and G
 * the delayed forcing plus F(U). The forcing at t_{n+1} only reads the
 * solution at times <= t_n because h <= τ_min. For a nonlinear F the step is
 * taken twice: first with F(U_n) at both ends, then with F at the predicted
 * endpoint. Intermittent switch times are step endpoints, with k(t⁺) at the
 * left and k(t⁻) at the right end of a step.
 *
 * The buffer is returned through `buffer_out` when given.
 */
inline Trajectory solve(const DelaySystem& sys, double t_end, const SolverConfig& cfg, const EnergyFn& energy = {},
                        const Observer& observer = {}, HistoryBuffer* buffer_out = nullptr)
{
  sys.validate();
  if (!(t_end >= 0.0))
    throw ParameterError("solve: t_end must be >= 0");
  if (!(cfg.dt > 0.0))
    throw ParameterError("solve: dt must be > 0");
  const double tau_min = solver_detail::active_tau_min(sys);
  if (!(tau_min > 0.0))
    throw ParameterError("solve: a delay with tau_lower = 0 cannot be stepped directly; "
                         "use epsilon_convergence_study");
  if (!cfg.align_windows && cfg.dt > tau_min * (1 + 1e-12))
    throw ParameterError("solve: dt must not exceed the smallest delay when windows are not aligned");

  double tau_keep = 0.0;
  for (const auto& ch : sys.channels)
    tau_keep = std::max(tau_keep, ch.delay.tau_bar());

  const auto bps = solver_detail::breakpoints(sys, t_end, cfg);
  solver_detail::PropagatorCache cache(sys.generator.to_dense(), cfg.scheme);
  const std::size_t stride = std::max<std::size_t>(1, cfg.snapshot_stride);

  Trajectory traj;
  HistoryBuffer buffer(cfg.interpolation);
  Vector u = sys.initial;

  auto record = [&](double t) {
    traj.times.push_back(t);
    traj.norms.push_back(sys.norm.norm(u));
    if (cfg.keep_states)
      traj.states.push_back(u);
    if (energy)
      traj.energies.push_back(energy(buffer, t));
    if (observer)
      observer(t, u, buffer);
  };

  buffer.start_segment(0.0, u);
  record(0.0);
  std::size_t step = 0;

  for (std::size_t s = 0; s + 1 < bps.size(); ++s) {
    const double a = bps[s], b = bps[s + 1];
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / cfg.dt - 1e-9)));
    const double h = (b - a) / static_cast<double>(n);
    if (s > 0) {
      buffer.start_segment(a, u);
      if (cfg.trim_history && tau_keep > 0.0)
        buffer.discard_before(a - tau_keep - 2.0 * h);
    }

    Vector g_left = solver_detail::delay_forcing(sys, buffer, a, false);
    for (std::size_t j = 1; j <= n; ++j) {
      const double t1 = j == n ? b : a + static_cast<double>(j) * h;
      const Vector g_right = solver_detail::delay_forcing(sys, buffer, t1, true);

      Vector next;
      if (cfg.scheme == Scheme::ImplicitEuler) {
        Vector rhs = u + h * g_right;
        if (sys.nonlinearity.active())
          rhs += h * sys.nonlinearity.apply(u);
        next = cache.resolvent(h).solve(rhs);
      } else {
        const Matrix& e = cache.exponential(h);
        if (sys.nonlinearity.active()) {
          const Vector f0 = sys.nonlinearity.apply(u);
          const Vector base = e * (u + 0.5 * h * (g_left + f0));
          const Vector predicted = base + 0.5 * h * (g_right + f0);
          next = base + 0.5 * h * (g_right + sys.nonlinearity.apply(predicted));
        } else {
          next = duhamel_step(e, u, g_left, g_right, h);
        }
      }

      const double nn = sys.norm.norm(next);
      if (!std::isfinite(nn) || !next.allFinite() || nn > cfg.nan_guard)
        throw BlowUpError(t1, nn, std::make_shared<const Trajectory>(traj));

      u = std::move(next);
      buffer.push(t1, u);
      ++step;
      if (step % stride == 0 || (s + 2 == bps.size() && j == n))
        record(t1);
      // k and the delayed argument are continuous inside a snapped segment
      g_left = cfg.snap_switches ? g_right : solver_detail::delay_forcing(sys, buffer, t1, false);
    }
  }
  if (buffer_out)
    *buffer_out = std::move(buffer);
  return traj;
}

} // namespace devo
