#pragma once

#include <stdexcept>
#include <string>

namespace lightcone {

/// Base for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: dimension mismatch, non-finite value, out-of-domain argument.
class InputError : public Error
{
public:
  using Error::Error;
};

/// An iterative procedure did not reach its target.
class ConvergenceError : public Error
{
public:
  ConvergenceError(const std::string& what, double residual)
    : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual)
  {
  }

  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// Non-finite state encountered while integrating at parameter value `s`.
class IntegrationError : public Error
{
public:
  IntegrationError(const std::string& what, double s)
    : Error(what + " at s = " + std::to_string(s)), s_(s)
  {
  }

  double s() const noexcept { return s_; }

private:
  double s_;
};

/// Malformed scenario configuration; `line` is 1-based, 0 when not line-specific.
class ConfigError : public Error
{
public:
  ConfigError(const std::string& what, int line = 0)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line)
  {
  }

  int line() const noexcept { return line_; }

private:
  int line_;
};

} // namespace lightcone
