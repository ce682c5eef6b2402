#pragma once

#include <cmath>
#include <string>

#include "devo/core/error.hpp"
#include "devo/stepper/trajectory.hpp"

namespace devo {

/// Least-squares slope of −log‖U(t)‖ over t >= t_start.
inline double fit_decay_rate(const Trajectory& traj, double t_start)
{
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t cnt = 0;
  for (std::size_t j = 0; j < traj.size(); ++j) {
    const double t = traj.times[j];
    if (t < t_start)
      continue;
    if (!(traj.norms[j] > 0.0))
      throw ParameterError("fit_decay_rate: nonpositive norm at t=" + std::to_string(t));
    const double y = -std::log(traj.norms[j]);
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
    ++cnt;
  }
  if (cnt < 10)
    throw ParameterError("fit_decay_rate: fewer than 10 samples after t_start");
  const double n = static_cast<double>(cnt);
  const double den = n * sxx - sx * sx;
  if (!(den > 0.0))
    throw ParameterError("fit_decay_rate: degenerate time window");
  return (n * sxy - sx * sy) / den;
}

} // namespace devo
