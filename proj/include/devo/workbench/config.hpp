#pragma once

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "devo/core.hpp"
#include "devo/models.hpp"
#include "devo/stepper.hpp"

namespace devo {

using json = nlohmann::json;

enum class ModelKind { Scalar, Linear, Frictional, Memory, Source };

/// One delay channel of a linear model.
struct LinearChannelConfig
{
  Matrix b;
  Coefficient k;
  DelayFunction tau = DelayFunction::constant(0.0);
  Vector history;
};

/// Displacement profile u₀ = amplitude·e_j, u₁ = velocity·e_j with e_j = sin(jπx)/‖·‖_{H¹}.
struct WaveInitialConfig
{
  std::size_t mode = 1;
  double amplitude = 0.0;
  double velocity = 0.0;
};

struct CertificateConfig
{
  /// empty means sweep
  std::optional<double> omega_prime;
  std::optional<double> horizon;
  std::size_t grid = 2000;
};

/**
 * \brief A validated run description.
 *
 * Only the fields of the selected model are meaningful. `source` is the parsed
 * document, echoed into reports.
 */
struct RunConfig
{
  ModelKind model = ModelKind::Scalar;
  std::string model_name;
  json source;

  double t_end = 0.0;
  SolverConfig solver;
  CertificateConfig certificate;
  std::optional<SemigroupEnvelope> envelope;
  int envelope_samples = 200;
  std::optional<double> lipschitz_nl;
  std::optional<std::string> output_dir;

  // scalar
  double a = 1.0;
  Coefficient k;
  DelayFunction tau = DelayFunction::constant(0.0);
  double history_value = 0.0;
  double u0 = 0.0;

  // linear
  Matrix generator;
  Vector initial;
  std::vector<LinearChannelConfig> channels;

  // wave models
  std::size_t n = 0;
  Region damping;
  Region delay_region;
  WaveInitialConfig wave_initial;
  std::optional<double> velocity_history;
  std::optional<MemoryGrid> memory;
  bool estimate_envelope = true;
  double mu_src = 2.0;
  std::optional<KSplit> split;
};

namespace config_detail {

inline std::string join(const std::string& path, const std::string& key)
{
  return path.empty() ? key : path + "." + key;
}

inline void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed)
{
  if (!j.is_object())
    throw ConfigError(path, "expected an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key))
      throw ConfigError(join(path, key), "unknown key");
}

inline const json& require(const json& j, const std::string& path, const std::string& key)
{
  if (!j.contains(key))
    throw ConfigError(join(path, key), "missing required key");
  return j.at(key);
}

inline double number(const json& v, const std::string& path)
{
  if (!v.is_number())
    throw ConfigError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x))
    throw ConfigError(path, "expected a finite number");
  return x;
}

inline double number(const json& j, const std::string& path, const std::string& key)
{
  return number(require(j, path, key), join(path, key));
}

inline double number_or(const json& j, const std::string& path, const std::string& key, double fallback)
{
  return j.contains(key) ? number(j.at(key), join(path, key)) : fallback;
}

inline std::size_t count(const json& v, const std::string& path, std::size_t min)
{
  if (!v.is_number_integer() && !v.is_number_unsigned())
    throw ConfigError(path, "expected an integer");
  const auto x = v.get<long long>();
  if (x < static_cast<long long>(min))
    throw ConfigError(path, "must be >= " + std::to_string(min));
  return static_cast<std::size_t>(x);
}

inline bool boolean(const json& v, const std::string& path)
{
  if (!v.is_boolean())
    throw ConfigError(path, "expected true or false");
  return v.get<bool>();
}

inline std::string string(const json& v, const std::string& path)
{
  if (!v.is_string())
    throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

inline double positive(const json& j, const std::string& path, const std::string& key)
{
  const double x = number(j, path, key);
  if (!(x > 0.0))
    throw ConfigError(join(path, key), "must be > 0");
  return x;
}

inline Vector vector(const json& v, const std::string& path)
{
  if (!v.is_array() || v.empty())
    throw ConfigError(path, "expected a nonempty array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = number(v[i], path + "[" + std::to_string(i) + "]");
  return out;
}

inline Matrix matrix(const json& v, const std::string& path)
{
  if (!v.is_array() || v.empty())
    throw ConfigError(path, "expected a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  Matrix out;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vector row = vector(v[static_cast<std::size_t>(i)], path + "[" + std::to_string(i) + "]");
    if (i == 0)
      out.resize(rows, row.size());
    if (row.size() != out.cols())
      throw ConfigError(path, "rows have different lengths");
    out.row(i) = row.transpose();
  }
  if (out.rows() != out.cols())
    throw ConfigError(path, "matrix must be square");
  return out;
}

inline Region region(const json& v, const std::string& path)
{
  if (!v.is_array() || v.size() != 2)
    throw ConfigError(path, "expected [lo, hi]");
  Region r{number(v[0], path + "[0]"), number(v[1], path + "[1]")};
  if (!(r.lo < r.hi) || r.lo < 0.0 || r.hi > 1.0)
    throw ConfigError(path, "region must satisfy 0 <= lo < hi <= 1");
  return r;
}

/// Wraps library parameter checks so that the message carries the key path.
template <class F>
auto at_path(const std::string& path, F&& f) -> decltype(f())
{
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

inline Coefficient coefficient(const json& j, const std::string& path)
{
  const auto type = string(require(j, path, "type"), join(path, "type"));
  return at_path(path, [&] {
    if (type == "constant") {
      check_keys(j, path, {"type", "value"});
      return Coefficient::constant(number(j, path, "value"));
    }
    if (type == "exponential") {
      check_keys(j, path, {"type", "value", "rate"});
      return Coefficient::exponential(number(j, path, "value"), number(j, path, "rate"));
    }
    if (type == "sinusoid") {
      check_keys(j, path, {"type", "value", "nu"});
      return Coefficient::sinusoid(number(j, path, "value"), number(j, path, "nu"));
    }
    if (type == "intermittent") {
      check_keys(j, path, {"type", "value", "period", "duty"});
      return Coefficient::intermittent(number(j, path, "value"), number(j, path, "period"), number(j, path, "duty"));
    }
    if (type == "sum") {
      check_keys(j, path, {"type", "terms"});
      const auto& terms = require(j, path, "terms");
      if (!terms.is_array() || terms.empty())
        throw ConfigError(join(path, "terms"), "expected a nonempty array");
      std::vector<Coefficient> out;
      for (std::size_t i = 0; i < terms.size(); ++i)
        out.push_back(coefficient(terms[i], join(path, "terms") + "[" + std::to_string(i) + "]"));
      return Coefficient::sum(std::move(out));
    }
    throw ConfigError(join(path, "type"), "unknown coefficient type '" + type + "'");
  });
}

inline DelayFunction delay(const json& j, const std::string& path)
{
  const auto type = string(require(j, path, "type"), join(path, "type"));
  std::optional<double> c;
  if (j.contains("c"))
    c = number(j.at("c"), join(path, "c"));
  if (c && !(*c < 1.0))
    throw ConfigError(join(path, "c"), "delay slope bound must satisfy c < 1 (got c=" + std::to_string(*c) + ")");
  return at_path(path, [&] {
    if (type == "constant") {
      check_keys(j, path, {"type", "value", "c"});
      return DelayFunction::constant(number(j, path, "value"), c);
    }
    if (type == "sinusoid") {
      check_keys(j, path, {"type", "mean", "amplitude", "nu", "c"});
      return DelayFunction::sinusoid(number(j, path, "mean"), number(j, path, "amplitude"), number(j, path, "nu"), c);
    }
    throw ConfigError(join(path, "type"), "unknown delay type '" + type + "'");
  });
}

/// {type: "constant", value}; `value` is a number or, for vector histories, an array.
inline json constant_history(const json& j, const std::string& path)
{
  check_keys(j, path, {"type", "value"});
  const auto type = string(require(j, path, "type"), join(path, "type"));
  if (type != "constant")
    throw ConfigError(join(path, "type"), "only constant histories are supported");
  return require(j, path, "value");
}

inline WaveInitialConfig wave_initial(const json& j, const std::string& path)
{
  check_keys(j, path, {"type", "mode", "amplitude", "velocity"});
  const auto type = string(require(j, path, "type"), join(path, "type"));
  WaveInitialConfig w;
  if (type == "zero")
    return w;
  if (type != "eigenmode")
    throw ConfigError(join(path, "type"), "unknown initial type '" + type + "' (expected eigenmode or zero)");
  if (j.contains("mode"))
    w.mode = count(j.at("mode"), join(path, "mode"), 1);
  w.amplitude = number_or(j, path, "amplitude", 0.0);
  w.velocity = number_or(j, path, "velocity", 0.0);
  return w;
}

inline const std::set<std::string>& common_keys()
{
  static const std::set<std::string> keys{"model", "t_end", "dt", "snapshot_stride", "scheme", "interpolation",
                                          "nan_guard", "snap_switches", "certificate", "envelope",
                                          "envelope_samples", "lipschitz_nl", "output"};
  return keys;
}

inline std::set<std::string> with_common(std::initializer_list<std::string> extra)
{
  auto keys = common_keys();
  keys.insert(extra);
  return keys;
}

inline void parse_common(const json& j, RunConfig& cfg)
{
  cfg.t_end = number(j, "", "t_end");
  if (!(cfg.t_end >= 0.0))
    throw ConfigError("t_end", "must be >= 0");
  cfg.solver.dt = positive(j, "", "dt");
  if (j.contains("snapshot_stride"))
    cfg.solver.snapshot_stride = count(j.at("snapshot_stride"), "snapshot_stride", 1);
  if (j.contains("scheme")) {
    const auto s = string(j.at("scheme"), "scheme");
    if (s == "exact")
      cfg.solver.scheme = Scheme::ExactTrapezoid;
    else if (s == "implicit_euler")
      cfg.solver.scheme = Scheme::ImplicitEuler;
    else
      throw ConfigError("scheme", "expected 'exact' or 'implicit_euler'");
  }
  if (j.contains("interpolation")) {
    const auto s = string(j.at("interpolation"), "interpolation");
    if (s == "cubic")
      cfg.solver.interpolation = Interpolation::Cubic;
    else if (s == "linear")
      cfg.solver.interpolation = Interpolation::Linear;
    else
      throw ConfigError("interpolation", "expected 'cubic' or 'linear'");
  }
  if (j.contains("nan_guard"))
    cfg.solver.nan_guard = positive(j, "", "nan_guard");
  if (j.contains("snap_switches"))
    cfg.solver.snap_switches = boolean(j.at("snap_switches"), "snap_switches");

  if (j.contains("certificate")) {
    const auto& c = j.at("certificate");
    check_keys(c, "certificate", {"omega_prime", "horizon", "grid"});
    if (c.contains("omega_prime")) {
      const auto& op = c.at("omega_prime");
      if (op.is_string()) {
        if (op.get<std::string>() != "sweep")
          throw ConfigError("certificate.omega_prime", "expected a number or \"sweep\"");
      } else {
        cfg.certificate.omega_prime = positive(c, "certificate", "omega_prime");
      }
    }
    if (c.contains("horizon"))
      cfg.certificate.horizon = positive(c, "certificate", "horizon");
    if (c.contains("grid"))
      cfg.certificate.grid = count(c.at("grid"), "certificate.grid", 10);
  }
  if (j.contains("envelope")) {
    const auto& e = j.at("envelope");
    check_keys(e, "envelope", {"M", "omega"});
    const double m = number(e, "envelope", "M");
    if (!(m >= 1.0))
      throw ConfigError("envelope.M", "must be >= 1");
    cfg.envelope = SemigroupEnvelope{m, positive(e, "envelope", "omega")};
  }
  if (j.contains("envelope_samples"))
    cfg.envelope_samples = static_cast<int>(count(j.at("envelope_samples"), "envelope_samples", 10));
  if (j.contains("lipschitz_nl")) {
    const double l = number(j.at("lipschitz_nl"), "lipschitz_nl");
    if (!(l >= 0.0))
      throw ConfigError("lipschitz_nl", "must be >= 0");
    cfg.lipschitz_nl = l;
  }
  if (j.contains("output"))
    cfg.output_dir = string(j.at("output"), "output");
}

inline void parse_scalar(const json& j, RunConfig& cfg)
{
  check_keys(j, "", with_common({"a", "k", "tau", "history", "u0"}));
  cfg.a = positive(j, "", "a");
  cfg.k = coefficient(require(j, "", "k"), "k");
  cfg.tau = delay(require(j, "", "tau"), "tau");
  cfg.history_value = number(constant_history(require(j, "", "history"), "history"), "history.value");
  cfg.u0 = number_or(j, "", "u0", cfg.history_value);
}

inline Vector history_vector(const json& value, const std::string& path, Eigen::Index dim)
{
  if (value.is_number())
    return Vector::Constant(dim, number(value, path));
  Vector v = vector(value, path);
  if (v.size() != dim)
    throw ConfigError(path, "expected " + std::to_string(dim) + " entries, got " + std::to_string(v.size()));
  return v;
}

inline void parse_linear(const json& j, RunConfig& cfg)
{
  check_keys(j, "", with_common({"A", "initial", "channels"}));
  cfg.generator = matrix(require(j, "", "A"), "A");
  const auto dim = cfg.generator.rows();
  cfg.initial = history_vector(require(j, "", "initial"), "initial", dim);
  const auto& chans = require(j, "", "channels");
  if (!chans.is_array())
    throw ConfigError("channels", "expected an array");
  for (std::size_t i = 0; i < chans.size(); ++i) {
    const std::string path = "channels[" + std::to_string(i) + "]";
    const auto& c = chans[i];
    check_keys(c, path, {"B", "k", "tau", "history"});
    LinearChannelConfig ch;
    ch.b = matrix(require(c, path, "B"), join(path, "B"));
    if (ch.b.rows() != dim)
      throw ConfigError(join(path, "B"), "dimension differs from A");
    ch.k = coefficient(require(c, path, "k"), join(path, "k"));
    ch.tau = delay(require(c, path, "tau"), join(path, "tau"));
    ch.history = history_vector(constant_history(require(c, path, "history"), join(path, "history")),
                                join(path, "history.value"), dim);
    cfg.channels.push_back(std::move(ch));
  }
}

inline void parse_wave(const json& j, RunConfig& cfg)
{
  switch (cfg.model) {
  case ModelKind::Frictional:
    check_keys(j, "", with_common({"n", "a", "damping", "delay_region", "k", "tau", "initial", "velocity_history"}));
    break;
  case ModelKind::Memory:
    check_keys(j, "", with_common({"n", "delay_region", "k", "tau", "initial", "velocity_history", "memory",
                                   "estimate_envelope"}));
    break;
  default:
    check_keys(j, "", with_common({"n", "a", "damping", "delay_region", "k", "k1", "k2", "tau", "initial",
                                   "velocity_history", "mu_src"}));
  }
  cfg.n = count(require(j, "", "n"), "n", 2);
  cfg.delay_region = region(require(j, "", "delay_region"), "delay_region");
  if (cfg.model == ModelKind::Memory) {
    // the memory generator has no frictional term; the mesh still wants a damping region
    cfg.damping = cfg.delay_region;
  } else {
    cfg.a = positive(j, "", "a");
    cfg.damping = region(require(j, "", "damping"), "damping");
  }
  cfg.tau = delay(require(j, "", "tau"), "tau");
  cfg.wave_initial = wave_initial(require(j, "", "initial"), "initial");
  if (j.contains("velocity_history"))
    cfg.velocity_history = number(constant_history(j.at("velocity_history"), "velocity_history"),
                                  "velocity_history.value");

  if (cfg.model == ModelKind::Source) {
    const bool has_k = j.contains("k"), has_split = j.contains("k1") || j.contains("k2");
    if (has_k == has_split)
      throw ConfigError("k", "give either k or the split k1/k2");
    if (has_k) {
      cfg.k = coefficient(j.at("k"), "k");
    } else {
      KSplit s;
      if (j.contains("k1"))
        s.k1 = coefficient(j.at("k1"), "k1");
      if (j.contains("k2"))
        s.k2 = coefficient(j.at("k2"), "k2");
      if (!s.k1.integrable())
        throw ConfigError("k1", "k1 must be integrable on [0, inf)");
      cfg.split = s;
      cfg.k = s.total();
    }
    cfg.mu_src = number_or(j, "", "mu_src", 2.0);
    if (!(cfg.mu_src > 0.0))
      throw ConfigError("mu_src", "must be > 0");
  } else {
    cfg.k = coefficient(require(j, "", "k"), "k");
  }

  if (cfg.model == ModelKind::Memory) {
    const auto& m = require(j, "", "memory");
    check_keys(m, "memory", {"mu0", "delta", "m", "s_max"});
    std::optional<double> s_max;
    if (m.contains("s_max"))
      s_max = number(m.at("s_max"), "memory.s_max");
    cfg.memory = at_path("memory", [&] {
      return MemoryGrid::make(number(m, "memory", "mu0"), number(m, "memory", "delta"),
                              count(require(m, "memory", "m"), "memory.m", 2), s_max);
    });
    if (j.contains("estimate_envelope"))
      cfg.estimate_envelope = boolean(j.at("estimate_envelope"), "estimate_envelope");
  }

  at_path("", [&] { return WaveMesh(cfg.n, cfg.damping, cfg.delay_region); });
  if (cfg.model == ModelKind::Source) {
    const WaveMesh mesh(cfg.n, cfg.damping, cfg.delay_region);
    if (!mesh.delay_inside_damping())
      throw ConfigError("delay_region", "source model needs the delay region inside the damping region");
  }
}

} // namespace config_detail

/// Validates a parsed document. Throws ConfigError with the offending key path.
inline RunConfig parse_config(const json& j)
{
  using namespace config_detail;
  if (!j.is_object())
    throw ConfigError("", "config must be a JSON object");
  RunConfig cfg;
  cfg.source = j;
  cfg.model_name = string(require(j, "", "model"), "model");
  if (cfg.model_name == "scalar")
    cfg.model = ModelKind::Scalar;
  else if (cfg.model_name == "linear")
    cfg.model = ModelKind::Linear;
  else if (cfg.model_name == "frictional")
    cfg.model = ModelKind::Frictional;
  else if (cfg.model_name == "memory")
    cfg.model = ModelKind::Memory;
  else if (cfg.model_name == "source")
    cfg.model = ModelKind::Source;
  else
    throw ConfigError("model", "unknown model '" + cfg.model_name
                                 + "' (expected scalar, linear, frictional, memory or source)");

  switch (cfg.model) {
  case ModelKind::Scalar: parse_scalar(j, cfg); break;
  case ModelKind::Linear: parse_linear(j, cfg); break;
  default: parse_wave(j, cfg);
  }
  parse_common(j, cfg);
  return cfg;
}

inline RunConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("", "cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "cannot parse '" + path + "': " + e.what());
  }
  return parse_config(j);
}

} // namespace devo
