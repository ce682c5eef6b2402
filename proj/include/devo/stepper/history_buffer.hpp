#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "devo/core/error.hpp"
#include "devo/core/history.hpp"
#include "devo/core/linalg.hpp"

namespace devo {

enum class Interpolation { Linear, Cubic };

/**
 * \brief Computed solution on [0, t_head], optionally preceded by a state-valued past.
 *
 * Nodes are grouped in segments (one per window or switch interval) and
 * interpolation never reaches across a segment boundary, so kinks of the
 * solution at breakpoints are not smeared. A boundary node is stored in both
 * adjacent segments. Interpolation reproduces stored states exactly at nodes.
 */
class HistoryBuffer
{
public:
  HistoryBuffer() = default;

  explicit HistoryBuffer(Interpolation order, std::optional<History> past = std::nullopt)
    : order_(order)
    , past_(std::move(past))
  {}

  Interpolation order() const { return order_; }

  double t_min() const
  {
    if (past_)
      return past_->t_min();
    return segments_.empty() ? 0.0 : segments_.front().times.front();
  }

  double t_head() const { return segments_.empty() ? t_min() : segments_.back().times.back(); }

  bool empty() const { return segments_.empty(); }

  /// Opens a new segment starting at (t, u).
  void start_segment(double t, const Vector& u)
  {
    if (!segments_.empty() && t < t_head())
      throw ParameterError("HistoryBuffer: segments must be appended in time order");
    segments_.push_back({{t}, {u}});
  }

  /// Appends a node to the current segment.
  void push(double t, const Vector& u)
  {
    if (segments_.empty()) {
      start_segment(t, u);
      return;
    }
    auto& seg = segments_.back();
    if (!(t > seg.times.back()))
      throw ParameterError("HistoryBuffer: node times must increase");
    seg.times.push_back(t);
    seg.states.push_back(u);
  }

  /// Drops whole segments that end before t.
  void discard_before(double t)
  {
    std::size_t drop = 0;
    while (drop + 1 < segments_.size() && segments_[drop].times.back() < t)
      ++drop;
    if (drop > 0) {
      segments_.erase(segments_.begin(), segments_.begin() + static_cast<std::ptrdiff_t>(drop));
      trimmed_ = true;
    }
  }

  Vector eval(double t) const
  {
    const double tol = 1e-12 * std::max(1.0, std::abs(t));
    const double seg_lo = segments_.empty() ? 0.0 : segments_.front().times.front();
    if (segments_.empty() || t < seg_lo - tol) {
      if (past_ && !trimmed_ && t <= tol && t >= past_->t_min() - tol)
        return past_->eval(std::min(t, 0.0));
      throw RangeError("history_eval", t, t_min(), t_head());
    }
    const double head = t_head();
    if (t > head + tol)
      throw RangeError("history_eval", t, t_min(), head);
    t = std::clamp(t, seg_lo, head);

    // last segment whose start is <= t
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double x, const Segment& s) { return x < s.times.front(); });
    return interpolate(*std::prev(it), t);
  }

  Vector operator()(double t) const { return eval(t); }

  std::size_t node_count() const
  {
    std::size_t n = 0;
    for (const auto& s : segments_)
      n += s.times.size();
    return n;
  }

private:
  struct Segment
  {
    std::vector<double> times;
    std::vector<Vector> states;
  };

  Vector interpolate(const Segment& seg, double t) const
  {
    const auto& ts = seg.times;
    const std::size_t n = ts.size();
    if (n == 1)
      return seg.states.front();
    auto hi_it = std::lower_bound(ts.begin(), ts.end(), t);
    std::size_t hi = static_cast<std::size_t>(hi_it - ts.begin());
    if (hi < n && ts[hi] == t)
      return seg.states[hi];
    hi = std::clamp<std::size_t>(hi, 1, n - 1);
    const std::size_t lo = hi - 1;

    if (order_ == Interpolation::Linear || n < 3) {
      const double w = (t - ts[lo]) / (ts[hi] - ts[lo]);
      return (1.0 - w) * seg.states[lo] + w * seg.states[hi];
    }
    // Lagrange through up to four nodes around t, clamped inside the segment
    const std::size_t m = std::min<std::size_t>(4, n);
    std::size_t first = lo >= 1 ? lo - 1 : 0;
    first = std::min(first, n - m);
    Vector out = Vector::Zero(seg.states.front().size());
    for (std::size_t i = first; i < first + m; ++i) {
      double w = 1.0;
      for (std::size_t j = first; j < first + m; ++j)
        if (j != i)
          w *= (t - ts[j]) / (ts[i] - ts[j]);
      out += w * seg.states[i];
    }
    return out;
  }

  Interpolation order_ = Interpolation::Cubic;
  std::optional<History> past_;
  std::vector<Segment> segments_;
  bool trimmed_ = false;
};

} // namespace devo
