#pragma once

// Cone curvature functions kappa_1..kappa_n(s), tau_1..tau_{n-1}(s).

#include "lightcone/error.hpp"
#include "lightcone/interpolation.hpp"

#include <cmath>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace lightcone {

enum class FunctionKind { Constant, Polynomial, Sinusoid, PowerLaw, Sampled };

inline const char* to_string(FunctionKind k)
{
  switch (k) {
  case FunctionKind::Constant: return "constant";
  case FunctionKind::Polynomial: return "polynomial";
  case FunctionKind::Sinusoid: return "sinusoid";
  case FunctionKind::PowerLaw: return "power_law";
  case FunctionKind::Sampled: return "sampled";
  }
  return "?";
}

struct Interval
{
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double s) const { return s >= lo && s <= hi; }
  bool contains(const Interval& other) const { return other.lo >= lo && other.hi <= hi; }
  double length() const { return hi - lo; }
};

namespace shape {

struct Constant
{
  double value;
  double operator()(double) const { return value; }
};

/// sum_k coeffs[k] s^k
struct Polynomial
{
  std::vector<double> coeffs;
  double operator()(double s) const
  {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
      acc = acc * s + *it;
    return acc;
  }
};

/// offset + amplitude * sin(frequency * s + phase)
struct Sinusoid
{
  double amplitude, frequency, phase, offset;
  double operator()(double s) const { return offset + amplitude * std::sin(frequency * s + phase); }
};

/// scale * s^exponent
struct PowerLaw
{
  double scale, exponent;
  double operator()(double s) const { return scale * std::pow(s, exponent); }
};

struct Sampled
{
  CubicSpline spline;
  double operator()(double s) const { return spline(s); }
};

} // namespace shape

/// One scalar function of arclength.
class ScalarFunction
{
public:
  using Shape = std::variant<shape::Constant, shape::Polynomial, shape::Sinusoid, shape::PowerLaw, shape::Sampled>;

  template <class S>
    requires std::is_constructible_v<Shape, S>
  ScalarFunction(S s) : shape_(std::move(s))
  {
  }

  double operator()(double s) const
  {
    return std::visit([s](const auto& f) { return f(s); }, shape_);
  }

  FunctionKind kind() const { return static_cast<FunctionKind>(shape_.index()); }
  const Shape& shape() const noexcept { return shape_; }

private:
  Shape shape_;
};

/// Parameters of one function as they appear in a scenario file.
///
/// params by kind: Constant {c}; Polynomial {c0, c1, ...};
/// Sinusoid {amplitude, frequency, phase[, offset]}; PowerLaw {scale, exponent};
/// Sampled uses grid/values instead.
struct FunctionSpec
{
  FunctionKind kind = FunctionKind::Constant;
  std::vector<double> params;
  std::vector<double> grid;
  std::vector<double> values;
};

struct ProfileSpec
{
  int n = 0;
  Interval domain;
  std::vector<FunctionSpec> kappa; ///< n entries
  std::vector<FunctionSpec> tau;   ///< n-1 entries
};

/// Curvature values at one arclength, tau padded so that tau[0] = tau_0 = 0
/// and tau[n] = tau_n = 0.
struct ProfileValues
{
  std::vector<double> kappa; ///< kappa[i-1] = kappa_i
  std::vector<double> tau;   ///< tau[j] = tau_j for j = 0..n

  double k(int i) const { return kappa[static_cast<std::size_t>(i - 1)]; }
  double t(int j) const { return tau[static_cast<std::size_t>(j)]; }
};

class CurvatureProfile
{
public:
  CurvatureProfile(int n, Interval domain, std::vector<ScalarFunction> kappa, std::vector<ScalarFunction> tau)
    : n_(n), domain_(domain), kappa_(std::move(kappa)), tau_(std::move(tau))
  {
    if (n_ < 1)
      throw InputError("profile: n must be >= 1");
    if (!(domain_.hi > domain_.lo) || !std::isfinite(domain_.lo) || !std::isfinite(domain_.hi))
      throw InputError("profile: empty or non-finite domain");
    if (static_cast<int>(kappa_.size()) != n_ || static_cast<int>(tau_.size()) != n_ - 1)
      throw InputError("profile: need n kappa functions and n-1 tau functions");
  }

  int n() const noexcept { return n_; }
  const Interval& domain() const noexcept { return domain_; }
  const std::vector<ScalarFunction>& kappa_functions() const noexcept { return kappa_; }
  const std::vector<ScalarFunction>& tau_functions() const noexcept { return tau_; }

  /// Kind of kappa_1. Functions may mix kinds; see kappa_functions() for each.
  FunctionKind kind() const { return kappa_.front().kind(); }

  ProfileValues operator()(double s) const
  {
    if (!domain_.contains(s))
      throw InputError("profile evaluated at s = " + std::to_string(s) + " outside its domain [" +
                       std::to_string(domain_.lo) + ", " + std::to_string(domain_.hi) + "]");
    ProfileValues v;
    v.kappa.resize(static_cast<std::size_t>(n_));
    v.tau.assign(static_cast<std::size_t>(n_ + 1), 0.0);
    for (int i = 0; i < n_; ++i)
      v.kappa[static_cast<std::size_t>(i)] = kappa_[static_cast<std::size_t>(i)](s);
    for (int j = 1; j < n_; ++j)
      v.tau[static_cast<std::size_t>(j)] = tau_[static_cast<std::size_t>(j - 1)](s);
    return v;
  }

private:
  int n_;
  Interval domain_;
  std::vector<ScalarFunction> kappa_;
  std::vector<ScalarFunction> tau_;
};

/// eval_profile: (kappas, taus) at s, throwing outside the domain.
struct ProfileEvaluation
{
  std::vector<double> kappas; ///< n values
  std::vector<double> taus;   ///< n-1 values
};

inline ProfileEvaluation eval_profile(const CurvatureProfile& p, double s)
{
  ProfileValues v = p(s);
  ProfileEvaluation out;
  out.kappas = std::move(v.kappa);
  out.taus.assign(v.tau.begin() + 1, v.tau.end() - 1);
  return out;
}

namespace detail {

inline ScalarFunction build_function(const FunctionSpec& spec, const Interval& domain, const std::string& label)
{
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (spec.params.size() < lo || spec.params.size() > hi)
      throw InputError(label + ": wrong number of parameters for kind " + to_string(spec.kind));
  };
  switch (spec.kind) {
  case FunctionKind::Constant:
    need(1, 1);
    return shape::Constant{spec.params[0]};
  case FunctionKind::Polynomial:
    need(1, 64);
    return shape::Polynomial{spec.params};
  case FunctionKind::Sinusoid:
    need(3, 4);
    return shape::Sinusoid{spec.params[0], spec.params[1], spec.params[2], spec.params.size() == 4 ? spec.params[3] : 0.0};
  case FunctionKind::PowerLaw: {
    need(2, 2);
    const double p = spec.params[1];
    if (p < 0.0 && domain.contains(0.0))
      throw InputError(label + ": power law with negative exponent blows up at s = 0 inside the domain");
    if (p != std::floor(p) && domain.lo < 0.0)
      throw InputError(label + ": power law with non-integer exponent undefined for s < 0");
    return shape::PowerLaw{spec.params[0], p};
  }
  case FunctionKind::Sampled: {
    CubicSpline spline(spec.grid, spec.values);
    if (spline.front() > domain.lo || spline.back() < domain.hi)
      throw InputError(label + ": sample grid does not cover the profile domain");
    return shape::Sampled{std::move(spline)};
  }
  }
  throw InputError(label + ": unknown function kind");
}

} // namespace detail

/// Builds a profile and checks every function evaluates finitely over the
/// domain (endpoints plus a 1025-point probe grid).
inline CurvatureProfile make_profile(const ProfileSpec& spec)
{
  if (spec.n < 1)
    throw InputError("profile: n must be >= 1");
  if (!(spec.domain.hi > spec.domain.lo))
    throw InputError("profile: empty domain");
  if (static_cast<int>(spec.kappa.size()) != spec.n || static_cast<int>(spec.tau.size()) != spec.n - 1)
    throw InputError("profile: need n kappa and n-1 tau specifications");

  std::vector<ScalarFunction> kappa, tau;
  for (std::size_t i = 0; i < spec.kappa.size(); ++i)
    kappa.push_back(detail::build_function(spec.kappa[i], spec.domain, "kappa_" + std::to_string(i + 1)));
  for (std::size_t j = 0; j < spec.tau.size(); ++j)
    tau.push_back(detail::build_function(spec.tau[j], spec.domain, "tau_" + std::to_string(j + 1)));

  CurvatureProfile profile(spec.n, spec.domain, std::move(kappa), std::move(tau));
  constexpr int probes = 1024;
  for (int k = 0; k <= probes; ++k) {
    const double s = k == probes ? spec.domain.hi : spec.domain.lo + spec.domain.length() * k / probes;
    const ProfileValues v = profile(s);
    for (double x : v.kappa)
      if (!std::isfinite(x))
        throw InputError("profile: non-finite kappa at s = " + std::to_string(s));
    for (double x : v.tau)
      if (!std::isfinite(x))
        throw InputError("profile: non-finite tau at s = " + std::to_string(s));
  }
  return profile;
}

/// Every function constant over the domain.
inline CurvatureProfile constant_profile(Interval domain, const std::vector<double>& kappa, const std::vector<double>& tau)
{
  ProfileSpec spec;
  spec.n = static_cast<int>(kappa.size());
  spec.domain = domain;
  for (double k : kappa)
    spec.kappa.push_back({FunctionKind::Constant, {k}, {}, {}});
  for (double t : tau)
    spec.tau.push_back({FunctionKind::Constant, {t}, {}, {}});
  return make_profile(spec);
}

} // namespace lightcone
