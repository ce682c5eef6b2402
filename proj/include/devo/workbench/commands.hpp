#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "devo/certificates.hpp"
#include "devo/workbench/build.hpp"
#include "devo/workbench/config.hpp"

namespace devo {

enum ExitCode : int { ExitOk = 0, ExitConfig = 1, ExitCertificate = 2, ExitBlowUp = 3 };

inline constexpr const char* kCsvHeader = "t,norm,energy,gronwall_bound,cert_lhs,bound_ratio";

namespace wb_detail {

inline json number_or_null(double x)
{
  return std::isfinite(x) ? json(x) : json(nullptr);
}

inline json certificate_json(const Certificate& c, const SemigroupEnvelope& env)
{
  return {{"M", env.M},
          {"omega", c.omega},
          {"omega_prime", c.omega_prime},
          {"gamma", number_or_null(c.gamma)},
          {"holds", c.holds},
          {"holds_asymptotic", c.holds_asymptotic},
          {"predicted_rate", c.predicted_rate},
          {"tail_slope", c.tail_slope},
          {"horizon", c.horizon}};
}

inline std::string format(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ConfigError("", "cannot write '" + path.string() + "'");
  out << text;
  if (!out)
    throw ConfigError("", "write failed for '" + path.string() + "'");
}

} // namespace wb_detail

/// Default certificate horizon: long enough for the tail slope to settle over many delays.
inline double certificate_horizon(const RunConfig& cfg, const DelaySystem& sys)
{
  if (cfg.certificate.horizon)
    return *cfg.certificate.horizon;
  double reach = 0.0;
  for (const auto& ch : sys.channels)
    reach = std::max(reach, ch.delay.tau_bar());
  return std::max(100.0, 20.0 * reach);
}

/**
 * \brief Largest predicted rate ω − ω′ over a geometric grid of ω′ in [0.01ω, 0.99ω].
 *
 * The verdict is monotone in ω′, so the first passing grid point is refined by
 * bisection against its failing neighbour. If no point passes, the result is
 * the failing certificate at 0.99ω.
 */
inline Certificate sweep_omega_prime(const CertificateProfile& profile, std::size_t points = 200)
{
  const double lo = 0.01 * profile.omega, hi = 0.99 * profile.omega;
  std::vector<double> grid(points);
  for (std::size_t j = 0; j < points; ++j)
    grid[j] = lo * std::pow(hi / lo, static_cast<double>(j) / static_cast<double>(points - 1));
  std::size_t first = points;
  for (std::size_t j = 0; j < points; ++j)
    if (profile.evaluate(grid[j]).holds_asymptotic) {
      first = j;
      break;
    }
  if (first == points)
    return profile.evaluate(hi);
  if (first == 0)
    return profile.evaluate(lo);
  double fail = grid[first - 1], pass = grid[first];
  for (int it = 0; it < 100 && pass - fail > 1e-15 * pass; ++it) {
    const double mid = 0.5 * (fail + pass);
    (profile.evaluate(mid).holds_asymptotic ? pass : fail) = mid;
  }
  return profile.evaluate(pass);
}

struct CertifyResult
{
  Certificate certificate;
  SemigroupEnvelope envelope;
  bool sweep = false;

  json to_json() const
  {
    auto j = wb_detail::certificate_json(certificate, envelope);
    j["mode"] = sweep ? "sweep" : "fixed";
    return j;
  }
};

/// Evaluates the decay certificate at a given ω′, or sweeps when none is given.
inline CertifyResult certify(const RunConfig& cfg, const DelaySystem& sys, std::optional<double> omega_prime)
{
  const auto& env = sys.require_envelope();
  const auto profile = certificate_profile(sys, certificate_horizon(cfg, sys), cfg.certificate.grid);
  CertifyResult r;
  r.envelope = env;
  r.sweep = !omega_prime;
  r.certificate = omega_prime ? profile.evaluate(*omega_prime) : sweep_omega_prime(profile);
  return r;
}

inline CertifyResult certify(const RunConfig& cfg, std::optional<double> omega_prime)
{
  const auto model = build_model(cfg);
  return certify(cfg, model.system(), omega_prime);
}

/// A simulated trajectory with the bound columns of the CSV and the report document.
struct Simulation
{
  Trajectory trajectory;
  std::vector<double> energy;
  std::vector<double> gronwall;
  std::vector<double> lhs;
  std::vector<double> ratio;
  json report;
  bool blew_up = false;

  int exit_code() const { return blew_up ? ExitBlowUp : ExitOk; }

  std::string csv() const
  {
    std::string out = std::string(kCsvHeader) + "\n";
    for (std::size_t j = 0; j < trajectory.size(); ++j) {
      out += wb_detail::format(trajectory.times[j]) + "," + wb_detail::format(trajectory.norms[j]) + ","
             + wb_detail::format(energy[j]) + "," + wb_detail::format(gronwall[j]) + "," + wb_detail::format(lhs[j])
             + "," + wb_detail::format(ratio[j]) + "\n";
    }
    return out;
  }
};

/**
 * \brief Solves the configured system and evaluates the bounds at every output time.
 *
 * Energy is the model energy for wave models and ½‖U‖² otherwise. The Gronwall
 * column uses `lipschitz_nl` when configured; for the source model it defaults
 * to L(sup ‖U‖) over the computed trajectory. Bound columns are NaN without an envelope.
 */
inline Simulation simulate(const RunConfig& cfg)
{
  const auto model = build_model(cfg);
  const auto& sys = model.system();

  Simulation sim;
  SolverConfig solver = cfg.solver;
  solver.keep_states = false;
  EnergyFn efn;
  if (model.wave)
    efn = energy_fn(*model.wave, solver.dt);
  std::optional<double> blow_time, blow_norm;
  try {
    sim.trajectory = solve(sys, cfg.t_end, solver, efn);
  } catch (const BlowUpError& e) {
    sim.trajectory = *e.partial();
    sim.blew_up = true;
    blow_time = e.time();
    blow_norm = e.norm();
  }
  auto& tr = sim.trajectory;
  if (model.wave) {
    sim.energy = tr.energies;
  } else {
    for (double n : tr.norms)
      sim.energy.push_back(0.5 * n * n);
  }

  std::optional<double> l_nl = cfg.lipschitz_nl;
  if (!l_nl && sys.nonlinearity.active())
    l_nl = sys.nonlinearity.lipschitz(tr.sup_norm());

  const double nan = std::numeric_limits<double>::quiet_NaN();
  json cert = nullptr;
  if (sys.has_envelope()) {
    sim.gronwall = gronwall_series(sys, tr.times, l_nl);
    sim.lhs = cert_lhs_series(sys, tr.times);
    const auto c = certify(cfg, sys, cfg.certificate.omega_prime);
    cert = c.to_json();
  } else {
    sim.gronwall.assign(tr.size(), nan);
    sim.lhs.assign(tr.size(), nan);
  }
  double max_ratio = 0.0;
  for (std::size_t j = 0; j < tr.size(); ++j) {
    const double n = tr.norms[j], b = sim.gronwall[j];
    const double r = n == 0.0 ? 0.0 : n / b;
    sim.ratio.push_back(r);
    max_ratio = std::max(max_ratio, r);
  }
  if (!sys.has_envelope())
    max_ratio = nan;

  double fitted = nan;
  if (!sim.blew_up && cfg.t_end > 0.0) {
    try {
      fitted = fit_decay_rate(tr, 0.5 * cfg.t_end);
    } catch (const ParameterError&) {
    }
  }

  json energy = nullptr;
  if (!sim.energy.empty()) {
    const auto [mn, mx] = std::minmax_element(sim.energy.begin(), sim.energy.end());
    energy = {{"min", *mn}, {"max", *mx}, {"initial", sim.energy.front()}, {"final", sim.energy.back()}};
  }

  auto& r = sim.report;
  r["model"] = cfg.model_name;
  r["status"] = sim.blew_up ? "blow_up" : "ok";
  r["blow_up"] = sim.blew_up ? json{{"time", *blow_time}, {"norm", wb_detail::number_or_null(*blow_norm)}} : json(nullptr);
  r["samples"] = tr.size();
  r["final_time"] = tr.times.empty() ? 0.0 : tr.times.back();
  r["final_norm"] = tr.norms.empty() ? 0.0 : tr.norms.back();
  r["envelope"] = sys.has_envelope() ? json{{"M", sys.envelope->M}, {"omega", sys.envelope->omega}} : json(nullptr);
  r["certificate"] = cert;
  r["lipschitz_nl"] = l_nl ? json(*l_nl) : json(nullptr);
  r["fitted_decay_rate"] = wb_detail::number_or_null(fitted);
  r["max_bound_ratio"] = wb_detail::number_or_null(max_ratio);
  r["gronwall_dominated"] = std::isfinite(max_ratio) ? json(max_ratio <= 1.0 + 1e-6) : json(nullptr);
  r["energy"] = energy;
  r["config"] = cfg.source;
  return sim;
}

/// trajectory.csv and report.json (deterministic) plus timing.json (wall clock) in `dir`.
inline void write_outputs(const Simulation& sim, const std::string& dir, double wall_seconds)
{
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw ConfigError("", "cannot create output directory '" + dir + "': " + ec.message());
  wb_detail::write_text(fs::path(dir) / "trajectory.csv", sim.csv());
  wb_detail::write_text(fs::path(dir) / "report.json", sim.report.dump(2) + "\n");
  wb_detail::write_text(fs::path(dir) / "timing.json", json{{"wall_clock_seconds", wall_seconds}}.dump(2) + "\n");
}

struct ConvergenceReport
{
  std::vector<double> dts;
  std::vector<double> errors;
  /// observed order per consecutive pair (oracle) or per triple (Richardson)
  std::vector<double> orders;
  std::string reference;
  bool exact_regime = false;

  double min_order() const
  {
    double m = std::numeric_limits<double>::infinity();
    for (double p : orders)
      m = std::min(m, p);
    return orders.empty() ? std::numeric_limits<double>::quiet_NaN() : m;
  }

  json to_json() const
  {
    json ord = json::array();
    for (double p : orders)
      ord.push_back(wb_detail::number_or_null(p));
    return {{"dts", dts},
            {"errors", errors},
            {"orders", ord},
            {"min_order", wb_detail::number_or_null(exact_regime ? std::numeric_limits<double>::quiet_NaN() : min_order())},
            {"reference", reference},
            {"exact_regime", exact_regime}};
  }
};

namespace wb_detail {

inline bool has_scalar_oracle(const RunConfig& cfg)
{
  return cfg.model == ModelKind::Scalar && std::holds_alternative<Coefficient::Constant>(cfg.k.form())
         && cfg.tau.is_constant() && cfg.tau.mean() > 0.0;
}

} // namespace wb_detail

/**
 * \brief Terminal errors at t_end for a sequence of halving steps.
 *
 * Scalar problems with constant k and τ are compared with the closed-form
 * solution; otherwise the errors are distances to the finest run and the
 * orders come from Richardson ratios of successive differences. Errors below
 * 1e−12 relative to the solution scale mark the exact regime, where orders are
 * not reported.
 */
inline ConvergenceReport convergence(const RunConfig& cfg, const std::vector<double>& dts)
{
  if (dts.size() < 3)
    throw ConfigError("dts", "convergence needs at least 3 step sizes");
  for (std::size_t i = 0; i < dts.size(); ++i) {
    if (!(dts[i] > 0.0))
      throw ConfigError("dts", "step sizes must be > 0");
    if (i > 0 && std::abs(dts[i - 1] / dts[i] - 2.0) > 1e-9)
      throw ConfigError("dts", "each step size must halve the previous one");
  }
  if (!(cfg.t_end > 0.0))
    throw ConfigError("t_end", "convergence needs t_end > 0");
  const auto model = build_model(cfg);
  const auto& sys = model.system();

  std::vector<std::future<Vector>> runs;
  for (double dt : dts)
    runs.push_back(std::async(std::launch::async, [&sys, &cfg, dt] {
      SolverConfig s = cfg.solver;
      s.dt = dt;
      s.keep_states = true;
      s.snapshot_stride = std::numeric_limits<std::size_t>::max();
      return solve(sys, cfg.t_end, s).final_state();
    }));
  std::vector<Vector> finals;
  for (auto& f : runs)
    finals.push_back(f.get());

  ConvergenceReport rep;
  rep.dts = dts;
  double scale = std::max(sys.norm.norm(sys.initial), sys.norm.norm(finals.back()));
  if (wb_detail::has_scalar_oracle(cfg)) {
    rep.reference = "closed_form";
    const ScalarStepsSolution oracle(cfg.a, std::get<Coefficient::Constant>(cfg.k.form()).c, cfg.tau.mean(),
                                     cfg.history_value, cfg.u0, cfg.t_end);
    const double exact = oracle(cfg.t_end);
    scale = std::max(scale, std::abs(exact));
    for (const auto& u : finals)
      rep.errors.push_back(std::abs(u(0) - exact));
    for (std::size_t i = 0; i + 1 < finals.size(); ++i)
      rep.orders.push_back(std::log2(rep.errors[i] / rep.errors[i + 1]));
  } else {
    rep.reference = "finest_run";
    for (const auto& u : finals)
      rep.errors.push_back(sys.norm.norm(u - finals.back()));
    for (std::size_t i = 0; i + 2 < finals.size(); ++i)
      rep.orders.push_back(
        std::log2(sys.norm.norm(finals[i] - finals[i + 1]) / sys.norm.norm(finals[i + 1] - finals[i + 2])));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < finals.size(); ++i)
    worst = std::max(worst, sys.norm.norm(finals[i] - finals.back()));
  for (double e : rep.errors)
    worst = std::max(worst, e);
  rep.exact_regime = worst <= 1e-12 * std::max(scale, 1e-300);
  if (rep.exact_regime)
    for (auto& p : rep.orders)
      p = std::numeric_limits<double>::quiet_NaN();
  return rep;
}

/// ε-regularization study; the reference defaults to the smallest ε.
inline json epsilon_study(const RunConfig& cfg, const std::vector<double>& eps, std::optional<double> reference)
{
  if (eps.empty())
    throw ConfigError("eps", "needs at least one epsilon");
  const auto model = build_model(cfg);
  const auto devs = epsilon_convergence_study(model.system(), cfg.t_end, eps, cfg.solver, reference);
  json out;
  std::vector<double> e, d;
  bool decreasing = true;
  for (std::size_t i = 0; i < devs.size(); ++i) {
    e.push_back(devs[i].epsilon);
    d.push_back(devs[i].deviation);
    if (i > 0 && !(devs[i].deviation < devs[i - 1].deviation))
      decreasing = false;
  }
  out["epsilons"] = e;
  out["deviations"] = d;
  out["reference_epsilon"] = reference.value_or(eps.back());
  out["strictly_decreasing"] = decreasing;
  return out;
}

} // namespace devo
