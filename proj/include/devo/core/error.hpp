#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace devo {

/// Base of every error thrown by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error
{
public:
  DimensionError(const std::string& what, std::size_t expected, std::size_t actual)
    : Error(what + ": expected dimension " + std::to_string(expected) + ", got " + std::to_string(actual))
    , expected_(expected)
    , actual_(actual)
  {}

  std::size_t expected() const { return expected_; }
  std::size_t actual() const { return actual_; }

private:
  std::size_t expected_;
  std::size_t actual_;
};

/// Iterative method hit its cap. Carries the last iterate and its residual.
class ConvergenceError : public Error
{
public:
  ConvergenceError(const std::string& what, Eigen::VectorXd last_iterate, double residual)
    : Error(what + " (residual " + std::to_string(residual) + ")")
    , last_iterate_(std::move(last_iterate))
    , residual_(residual)
  {}

  const Eigen::VectorXd& last_iterate() const { return last_iterate_; }
  double residual() const { return residual_; }

private:
  Eigen::VectorXd last_iterate_;
  double residual_;
};

/// Generator has spectral abscissa >= 0.
class StabilityError : public Error
{
public:
  explicit StabilityError(std::complex<double> eigenvalue)
    : Error("not exponentially stable: eigenvalue " + std::to_string(eigenvalue.real()) + (eigenvalue.imag() < 0 ? "" : "+")
            + std::to_string(eigenvalue.imag()) + "i has nonnegative real part")
    , eigenvalue_(eigenvalue)
  {}

  std::complex<double> eigenvalue() const { return eigenvalue_; }

private:
  std::complex<double> eigenvalue_;
};

class RangeError : public Error
{
public:
  RangeError(const std::string& what, double t, double lo, double hi)
    : Error(what + ": t=" + std::to_string(t) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]")
    , t_(t)
    , lo_(lo)
    , hi_(hi)
  {}

  double t() const { return t_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

private:
  double t_, lo_, hi_;
};

/// Invalid argument or violated model hypothesis.
class ParameterError : public Error
{
public:
  using Error::Error;
};

/// Configuration document failed validation. `path` is the offending key path.
class ConfigError : public Error
{
public:
  ConfigError(const std::string& path, const std::string& what)
    : Error(path.empty() ? what : path + ": " + what)
    , path_(path)
  {}

  const std::string& path() const { return path_; }

private:
  std::string path_;
};

struct Trajectory;

/// Solution left the finite regime. Carries the trajectory computed so far.
class BlowUpError : public Error
{
public:
  BlowUpError(double time, double norm, std::shared_ptr<const Trajectory> partial)
    : Error("numerical blow-up at t=" + std::to_string(time) + " (norm " + std::to_string(norm) + ")")
    , time_(time)
    , norm_(norm)
    , partial_(std::move(partial))
  {}

  double time() const { return time_; }
  double norm() const { return norm_; }
  const std::shared_ptr<const Trajectory>& partial() const { return partial_; }

private:
  double time_;
  double norm_;
  std::shared_ptr<const Trajectory> partial_;
};

} // namespace devo
