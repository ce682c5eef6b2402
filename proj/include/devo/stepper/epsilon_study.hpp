#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "devo/core/error.hpp"
#include "devo/core/system.hpp"
#include "devo/stepper/config.hpp"
#include "devo/stepper/solver.hpp"

namespace devo {

struct EpsilonDeviation
{
  double epsilon;
  /// sup over the common time grid of ‖U_ε(t) − U_ref(t)‖
  double deviation;
};

/// All delays shifted by ε; histories continued constantly down to −τ* − extend_by.
inline DelaySystem shift_delays(const DelaySystem& sys, double eps, double extend_by)
{
  DelaySystem out = sys;
  const double floor = -sys.tau_star() - extend_by;
  for (auto& ch : out.channels) {
    ch.delay = ch.delay.shifted(eps);
    ch.history = ch.history.extended(floor);
  }
  return out;
}

/**
 * \brief Solves with τ_i + ε for each ε and measures the distance to a reference run.
 *
 * The reference is `reference_eps` when given, otherwise the smallest ε of the
 * list. Every run uses the same step grid (windows are not aligned to the
 * shifted delays), so the deviation is taken node by node. The step is capped
 * at the smallest shifted delay, which allows delays with tau_lower = 0.
 */
inline std::vector<EpsilonDeviation> epsilon_convergence_study(const DelaySystem& sys, double t_end,
                                                               const std::vector<double>& epsilons,
                                                               SolverConfig cfg,
                                                               std::optional<double> reference_eps = std::nullopt)
{
  if (epsilons.empty())
    throw ParameterError("epsilon study needs at least one epsilon");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0))
      throw ParameterError("epsilon values must be > 0");
    if (i > 0 && epsilons[i] > epsilons[i - 1])
      throw ParameterError("epsilon values must be sorted decreasing");
  }
  const double eps_ref = reference_eps.value_or(epsilons.back());
  if (!(eps_ref > 0.0))
    throw ParameterError("reference epsilon must be > 0");
  const double eps_max = std::max(epsilons.front(), eps_ref);
  const double eps_min = std::min(epsilons.back(), eps_ref);

  double lower = std::numeric_limits<double>::infinity();
  for (const auto& ch : sys.channels)
    if (!ch.coeff.is_zero())
      lower = std::min(lower, ch.delay.tau_lower());
  cfg.align_windows = false;
  cfg.keep_states = true;
  cfg.snapshot_stride = 1;
  if (std::isfinite(lower))
    cfg.dt = std::min(cfg.dt, lower + eps_min);

  auto run = [&](double eps) { return solve(shift_delays(sys, eps, eps_max), t_end, cfg); };
  const Trajectory ref = run(eps_ref);

  std::vector<EpsilonDeviation> out;
  for (double eps : epsilons) {
    const Trajectory tr = eps == eps_ref ? ref : run(eps);
    if (tr.size() != ref.size())
      throw Error("epsilon study: runs produced different time grids");
    double dev = 0.0;
    for (std::size_t j = 0; j < tr.size(); ++j)
      dev = std::max(dev, sys.norm.norm(tr.states[j] - ref.states[j]));
    out.push_back({eps, dev});
  }
  return out;
}

} // namespace devo
