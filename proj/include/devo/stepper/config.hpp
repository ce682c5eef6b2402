#pragma once

#include <cstddef>

#include "devo/stepper/history_buffer.hpp"

namespace devo {

enum class Scheme {
  /// exp(hA) propagation with trapezoid Duhamel quadrature, order 2
  ExactTrapezoid,
  /// (I − hA)⁻¹ with right-endpoint forcing, order 1; for large generators only
  ImplicitEuler,
};

struct SolverConfig
{
  /// Requested step; the actual step divides each window exactly and never exceeds dt.
  double dt = 1e-3;
  Scheme scheme = Scheme::ExactTrapezoid;
  Interpolation interpolation = Interpolation::Cubic;
  /// Norms above this (or non-finite) abort the run.
  double nan_guard = 1e12;
  /// Step endpoints land on the switch times of intermittent coefficients.
  bool snap_switches = true;
  /// Breakpoints at multiples of τ_min. When false the grid depends only on dt and the switch times.
  bool align_windows = true;
  /// Every stride-th step is recorded (t = 0 and t_end always are).
  std::size_t snapshot_stride = 1;
  bool keep_states = true;
  /// Drop buffered segments older than the longest delay.
  bool trim_history = true;
};

} // namespace devo
