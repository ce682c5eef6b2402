#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "devo/core/error.hpp"
#include "devo/core/linalg.hpp"

namespace devo {

/**
 * \brief Prescribed past f(t) = B U(t) of one delay channel on [t_min, 0].
 *
 * Closed form (constant or a function) or gridded samples with linear
 * interpolation. Queries below t_min fail unless the history was extended,
 * in which case the value at the old left end is continued constantly.
 */
class History
{
public:
  using Function = std::function<Vector(double)>;

  struct Gridded
  {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<Vector> samples;
  };

  static History constant(Vector value, double t_min)
  {
    History h;
    h.rep_ = std::move(value);
    h.t_min_ = t_min;
    h.dim_ = static_cast<std::size_t>(std::get<Vector>(h.rep_).size());
    return h;
  }

  static History zero(std::size_t dim, double t_min)
  {
    return constant(Vector::Zero(static_cast<Eigen::Index>(dim)), t_min);
  }

  static History function(Function f, std::size_t dim, double t_min)
  {
    History h;
    h.rep_ = std::move(f);
    h.t_min_ = t_min;
    h.dim_ = dim;
    return h;
  }

  /// Samples at t0, t0+dt, ..., ending at (or after) 0.
  static History gridded(double t0, double dt, std::vector<Vector> samples)
  {
    if (samples.size() < 2 || !(dt > 0.0))
      throw ParameterError("gridded history needs >= 2 samples and dt > 0");
    if (t0 + dt * static_cast<double>(samples.size() - 1) < -1e-12)
      throw ParameterError("gridded history must reach t = 0");
    History h;
    h.dim_ = static_cast<std::size_t>(samples.front().size());
    h.t_min_ = t0;
    h.rep_ = Gridded{t0, dt, std::move(samples)};
    return h;
  }

  std::size_t dim() const { return dim_; }
  double t_min() const { return t_min_; }

  bool is_constant() const { return std::holds_alternative<Vector>(rep_); }

  /// Constant continuation to the left down to new_t_min.
  History extended(double new_t_min) const
  {
    History h = *this;
    if (new_t_min < t_min_) {
      h.anchor_ = t_min_;
      h.t_min_ = new_t_min;
    }
    return h;
  }

  Vector eval(double t) const
  {
    const double tol = 1e-9 * std::max(1.0, std::abs(t));
    if (t < t_min_ - tol || t > tol)
      throw RangeError("history evaluation", t, t_min_, 0.0);
    if (anchor_ && t < *anchor_)
      t = *anchor_;
    t = std::min(t, 0.0);
    if (auto v = std::get_if<Vector>(&rep_))
      return *v;
    if (auto f = std::get_if<Function>(&rep_))
      return (*f)(t);
    const auto& g = std::get<Gridded>(rep_);
    const double x = (t - g.t0) / g.dt;
    const auto last = static_cast<double>(g.samples.size() - 1);
    const double xc = std::clamp(x, 0.0, last);
    const auto i = static_cast<std::size_t>(std::min(std::floor(xc), last - 1.0));
    const double w = xc - static_cast<double>(i);
    return (1.0 - w) * g.samples[i] + w * g.samples[i + 1];
  }

  Vector operator()(double t) const { return eval(t); }

private:
  std::variant<Vector, Function, Gridded> rep_;
  double t_min_ = 0.0;
  std::optional<double> anchor_;
  std::size_t dim_ = 0;
};

} // namespace devo
