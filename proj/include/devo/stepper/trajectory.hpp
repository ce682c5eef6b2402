#pragma once

#include <algorithm>
#include <vector>

#include "devo/core/linalg.hpp"

namespace devo {

/// Recorded solution. `energies` and `bounds` are empty unless filled.
struct Trajectory
{
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<double> norms;
  std::vector<double> energies;
  std::vector<double> bounds;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }

  double sup_norm() const { return norms.empty() ? 0.0 : *std::max_element(norms.begin(), norms.end()); }

  const Vector& final_state() const { return states.back(); }
};

} // namespace devo
