#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "devo/core/error.hpp"
#include "devo/core/quadrature.hpp"

namespace devo {

/**
 * \brief Time-dependent feedback gain k(t), t >= 0.
 *
 * A closed algebra of named forms so that ∫₀ᵗ|k| and sup|k| have exact
 * expressions:
 *   constant      c
 *   exponential   c·e^{-λt}, λ >= 0
 *   sinusoid      c·(1 + sin νt)/2
 *   intermittent  c on [0, θT), 0 on [θT, T), repeated with period T
 *   sum           finite sum of the above
 */
class Coefficient
{
public:
  struct Constant
  {
    double c;
  };
  struct Exponential
  {
    double c, lambda;
  };
  struct Sinusoid
  {
    double c, nu;
  };
  struct Intermittent
  {
    double c, period, duty;
  };
  struct Sum
  {
    std::vector<Coefficient> terms;
  };
  using Form = std::variant<Constant, Exponential, Sinusoid, Intermittent, Sum>;

  Coefficient()
    : form_(Constant{0.0})
  {}

  static Coefficient constant(double c) { return Coefficient(Constant{c}); }

  static Coefficient exponential(double c, double lambda)
  {
    if (!(lambda >= 0.0))
      throw ParameterError("exponential coefficient needs rate >= 0");
    return Coefficient(Exponential{c, lambda});
  }

  static Coefficient sinusoid(double c, double nu) { return Coefficient(Sinusoid{c, nu}); }

  static Coefficient intermittent(double c, double period, double duty)
  {
    if (!(period > 0.0))
      throw ParameterError("intermittent coefficient needs period > 0");
    if (!(duty > 0.0 && duty <= 1.0))
      throw ParameterError("intermittent coefficient needs duty in (0, 1]");
    return Coefficient(Intermittent{c, period, duty});
  }

  static Coefficient sum(std::vector<Coefficient> terms) { return Coefficient(Sum{std::move(terms)}); }

  const Form& form() const { return form_; }

  /// Right-continuous value.
  double value(double t) const
  {
    return std::visit([&](const auto& f) { return eval(f, t, false); }, form_);
  }

  /// Limit from the left; differs from value() only at intermittent switch times.
  double value_left(double t) const
  {
    return std::visit([&](const auto& f) { return eval(f, t, true); }, form_);
  }

  double operator()(double t) const { return value(t); }

  bool is_zero() const
  {
    return std::visit(
      [](const auto& f) -> bool {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Sum>)
          return std::all_of(f.terms.begin(), f.terms.end(), [](const Coefficient& k) { return k.is_zero(); });
        else
          return f.c == 0.0;
      },
      form_);
  }

  /// Sign-definite: every term is >= 0 everywhere or every term is <= 0 everywhere.
  bool sign_definite() const
  {
    int pos = 0, neg = 0;
    collect_signs(pos, neg);
    return pos == 0 || neg == 0;
  }

  /// ∫₀ᵗ |k(s)| ds.
  double abs_integral(double t) const
  {
    if (t <= 0.0)
      return 0.0;
    if (auto s = std::get_if<Sum>(&form_)) {
      if (sign_definite()) {
        double total = 0.0;
        for (const auto& term : s->terms)
          total += term.abs_integral(t);
        return total;
      }
      return integrate([this](double x) { return std::abs(value(x)); }, 0.0, t, switch_times(0.0, t), 1e-13,
                       1e-15 * sup_abs() * t);
    }
    return std::visit([&](const auto& f) { return abs_int(f, t); }, form_);
  }

  /// ∫ₐᵇ |k(s)| ds
  double abs_integral(double a, double b) const { return abs_integral(b) - abs_integral(a); }

  /// sup over t >= 0 of |k(t)|; for mixed sums the triangle bound.
  double sup_abs() const
  {
    return std::visit(
      [](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Sum>) {
          double s = 0.0;
          for (const auto& k : f.terms)
            s += k.sup_abs();
          return s;
        } else {
          return std::abs(f.c);
        }
      },
      form_);
  }

  /// Bound on ∫ₛ^∞ |k|; infinity when k is not integrable on [0, ∞).
  double tail_abs_bound(double s) const
  {
    return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Sum>) {
          double total = 0.0;
          for (const auto& k : f.terms)
            total += k.tail_abs_bound(s);
          return total;
        } else if constexpr (std::is_same_v<T, Exponential>) {
          if (f.c == 0.0)
            return 0.0;
          if (f.lambda == 0.0)
            return std::numeric_limits<double>::infinity();
          return std::abs(f.c) * std::exp(-f.lambda * std::max(s, 0.0)) / f.lambda;
        } else {
          return f.c == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        }
      },
      form_);
  }

  bool integrable() const { return std::isfinite(tail_abs_bound(0.0)); }

  /// Discontinuity times of intermittent terms in the open interval (a, b), sorted.
  std::vector<double> switch_times(double a, double b) const
  {
    std::vector<double> out;
    collect_switches(a, b, out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  bool has_switches() const
  {
    return std::visit(
      [](const auto& f) -> bool {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Sum>)
          return std::any_of(f.terms.begin(), f.terms.end(), [](const Coefficient& k) { return k.has_switches(); });
        else if constexpr (std::is_same_v<T, Intermittent>)
          return f.duty < 1.0 && f.c != 0.0;
        else
          return false;
      },
      form_);
  }

  friend Coefficient operator+(const Coefficient& a, const Coefficient& b)
  {
    std::vector<Coefficient> terms;
    for (const auto* k : {&a, &b}) {
      if (auto s = std::get_if<Sum>(&k->form_))
        terms.insert(terms.end(), s->terms.begin(), s->terms.end());
      else
        terms.push_back(*k);
    }
    return sum(std::move(terms));
  }

private:
  explicit Coefficient(Form f)
    : form_(std::move(f))
  {}

  static double eval(const Constant& f, double, bool) { return f.c; }
  static double eval(const Exponential& f, double t, bool) { return f.c * std::exp(-f.lambda * t); }
  static double eval(const Sinusoid& f, double t, bool) { return f.c * 0.5 * (1.0 + std::sin(f.nu * t)); }
  static double eval(const Intermittent& f, double t, bool left)
  {
    const double on = f.duty * f.period;
    const double eps = 1e-14 * std::max(1.0, std::abs(t));
    const double cycles = std::round(t / f.period);
    if (std::abs(t - cycles * f.period) <= eps)
      return (left && f.duty < 1.0) ? 0.0 : f.c;
    const double phase = t - std::floor(t / f.period) * f.period;
    if (std::abs(phase - on) <= eps)
      return (left || f.duty >= 1.0) ? f.c : 0.0;
    return phase < on ? f.c : 0.0;
  }
  double eval(const Sum& f, double t, bool left) const
  {
    double s = 0.0;
    for (const auto& k : f.terms)
      s += left ? k.value_left(t) : k.value(t);
    return s;
  }

  static double abs_int(const Constant& f, double t) { return std::abs(f.c) * t; }
  static double abs_int(const Exponential& f, double t)
  {
    if (f.lambda == 0.0)
      return std::abs(f.c) * t;
    return std::abs(f.c) * (-std::expm1(-f.lambda * t)) / f.lambda;
  }
  static double abs_int(const Sinusoid& f, double t)
  {
    if (f.nu == 0.0)
      return std::abs(f.c) * 0.5 * t;
    return std::abs(f.c) * 0.5 * (t + (1.0 - std::cos(f.nu * t)) / f.nu);
  }
  static double abs_int(const Intermittent& f, double t)
  {
    const double on = f.duty * f.period;
    const double periods = std::floor(t / f.period);
    const double rem = t - periods * f.period;
    return std::abs(f.c) * (periods * on + std::min(rem, on));
  }
  static double abs_int(const Sum&, double) { return 0.0; }

  void collect_signs(int& pos, int& neg) const
  {
    std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Sum>) {
          for (const auto& k : f.terms)
            k.collect_signs(pos, neg);
        } else {
          if (f.c > 0.0)
            ++pos;
          else if (f.c < 0.0)
            ++neg;
        }
      },
      form_);
  }

  void collect_switches(double a, double b, std::vector<double>& out) const
  {
    std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Sum>) {
          for (const auto& k : f.terms)
            k.collect_switches(a, b, out);
        } else if constexpr (std::is_same_v<T, Intermittent>) {
          if (f.duty >= 1.0 || f.c == 0.0)
            return;
          const double on = f.duty * f.period;
          for (double j = std::floor(std::max(a, 0.0) / f.period); j * f.period < b; j += 1.0) {
            const double base = j * f.period;
            for (double s : {base, base + on})
              if (s > a && s < b)
                out.push_back(s);
          }
        }
      },
      form_);
  }

  Form form_;
};

} // namespace devo
