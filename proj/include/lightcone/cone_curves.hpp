#pragma once

// Externally given cone curves: analytic presets, arclength reparametrization,
// on-cone validation, frame recovery for curves in Q^2 (n = 1), CSV ingestion.

#include "lightcone/error.hpp"
#include "lightcone/frenet.hpp"
#include "lightcone/interpolation.hpp"
#include "lightcone/lorentz.hpp"
#include "lightcone/profile.hpp"

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace lightcone {

/// Ordered points x_k = x(t_k) of a curve in E_1^{dim}.
struct CurveSamples
{
  int dim = 0;
  std::vector<double> t;
  std::vector<Eigen::VectorXd> points;
  bool arclength = false;
  double spacing = 0.0; ///< grid step when arclength-parametrized

  std::size_t size() const { return t.size(); }

  /// Throws on broken invariants; `chord_tol` bounds |<dx/ds,dx/ds> - 1| for arclength curves.
  void validate(double chord_tol = 1e-4) const
  {
    if (dim < 3)
      throw InputError("curve: dimension must be >= 3");
    if (t.size() != points.size())
      throw InputError("curve: parameter and point counts differ");
    if (t.size() < 2)
      throw InputError("curve: need at least 2 samples");
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (points[k].size() != dim)
        throw InputError("curve: point " + std::to_string(k) + " has wrong dimension");
      if (!points[k].allFinite() || !std::isfinite(t[k]))
        throw InputError("curve: non-finite sample " + std::to_string(k));
      if (k > 0 && !(t[k] > t[k - 1]))
        throw InputError("curve: parameter not strictly increasing at sample " + std::to_string(k));
    }
    if (arclength) {
      if (!(spacing > 0.0))
        throw InputError("curve: arclength grid needs a positive spacing");
      for (std::size_t k = 1; k < t.size(); ++k) {
        const double ds = t[k] - t[k - 1];
        if (std::abs(ds - spacing) > 1e-9 * std::max(1.0, spacing))
          throw InputError("curve: arclength grid not uniform at sample " + std::to_string(k));
        const Eigen::VectorXd d = (points[k] - points[k - 1]) / ds;
        const double speed2 = detail::inner(d, d);
        if (std::abs(speed2 - 1.0) > chord_tol)
          throw InputError("curve: not unit speed between samples " + std::to_string(k - 1) + " and " +
                           std::to_string(k) + " (<dx,dx>/ds^2 = " + std::to_string(speed2) + ")");
      }
    }
  }
};

/// max_k |<x_k, x_k>|
inline double on_cone_residual(const CurveSamples& c)
{
  double worst = 0.0;
  for (const auto& p : c.points)
    worst = std::max(worst, std::abs(detail::inner(p, p)));
  return worst;
}

// ---------------------------------------------------------------------------
// Analytic presets. Both curves lie on Q^2 in E_1^3 and are unit speed.

namespace presets {

/// x(s) = (r cos(s/r), r sin(s/r), r), kappa = -1/(2 r^2).
inline Eigen::Vector3d circle_point(double r, double s)
{
  return {r * std::cos(s / r), r * std::sin(s / r), r};
}

inline double circle_kappa(double r) { return -1.0 / (2.0 * r * r); }

inline AsymptoticFrame circle_frame(double r, double s)
{
  const double c = std::cos(s / r), sn = std::sin(s / r);
  Eigen::Matrix3d m;
  m.col(0) = circle_point(r, s);
  m.col(1) = Eigen::Vector3d(-sn, c, 0.0);
  m.col(2) = Eigen::Vector3d(c, sn, -1.0) / (2.0 * r);
  return AsymptoticFrame(Eigen::MatrixXd(m));
}

/// x(s) = s (cos ln s, sin ln s, 1), kappa(s) = -1/s^2.
inline Eigen::Vector3d log_spiral_point(double s)
{
  const double th = std::log(s);
  return {s * std::cos(th), s * std::sin(th), s};
}

inline double log_spiral_kappa(double s) { return -1.0 / (s * s); }

inline AsymptoticFrame log_spiral_frame(double s)
{
  const double th = std::log(s), c = std::cos(th), sn = std::sin(th);
  Eigen::Matrix3d m;
  m.col(0) = log_spiral_point(s);
  m.col(1) = Eigen::Vector3d(c - sn, sn + c, 1.0);
  m.col(2) = Eigen::Vector3d(sn, -c, -1.0) / s;
  return AsymptoticFrame(Eigen::MatrixXd(m));
}

} // namespace presets

enum class PresetName { Circle, LogSpiral };

inline const char* to_string(PresetName p) { return p == PresetName::Circle ? "circle" : "log_spiral"; }

inline PresetName parse_preset(std::string_view name)
{
  if (name == "circle")
    return PresetName::Circle;
  if (name == "log_spiral" || name == "log-spiral")
    return PresetName::LogSpiral;
  throw InputError("unknown preset '" + std::string(name) + "'");
}

struct PresetParams
{
  double radius = 1.0; ///< circle only
};

/// A preset sampled on a uniform arclength grid together with its analytic
/// frames, curvature and the profile that generates it.
struct PresetCurve
{
  CurveSamples samples;
  Trajectory trajectory;
  std::vector<double> kappa;
  CurvatureProfile profile;
};

inline AsymptoticFrame preset_frame(PresetName name, const PresetParams& params, double s)
{
  return name == PresetName::Circle ? presets::circle_frame(params.radius, s) : presets::log_spiral_frame(s);
}

inline PresetCurve preset_curve(PresetName name, const PresetParams& params, Interval span, double h)
{
  if (name == PresetName::Circle && !(params.radius > 0.0))
    throw InputError("circle preset: radius must be positive");
  if (name == PresetName::LogSpiral && !(span.lo > 0.0))
    throw InputError("log_spiral preset: span must lie in (0, inf)");
  const std::size_t steps = detail::step_count(span, h);

  CurveSamples c;
  c.dim = 3;
  c.arclength = true;
  c.spacing = h;
  std::vector<AsymptoticFrame> frames;
  std::vector<double> kappa;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double s = k == steps ? span.hi : span.lo + static_cast<double>(k) * h;
    AsymptoticFrame f = preset_frame(name, params, s);
    c.t.push_back(s);
    c.points.emplace_back(f.matrix().col(0));
    frames.push_back(std::move(f));
    kappa.push_back(name == PresetName::Circle ? presets::circle_kappa(params.radius) : presets::log_spiral_kappa(s));
  }

  ProfileSpec spec;
  spec.n = 1;
  spec.domain = span;
  if (name == PresetName::Circle)
    spec.kappa.push_back({FunctionKind::Constant, {presets::circle_kappa(params.radius)}, {}, {}});
  else
    spec.kappa.push_back({FunctionKind::PowerLaw, {-1.0, -2.0}, {}, {}});

  std::vector<double> grid = c.t;
  return PresetCurve{std::move(c), Trajectory(std::move(grid), std::move(frames), h, Provenance::Preset),
                     std::move(kappa), make_profile(spec)};
}

// ---------------------------------------------------------------------------
// Arclength.

namespace detail {

inline std::vector<CubicSpline> component_splines(const std::vector<double>& grid,
                                                  const std::vector<Eigen::VectorXd>& points, int dim)
{
  std::vector<CubicSpline> out;
  for (int d = 0; d < dim; ++d) {
    std::vector<double> v(points.size());
    for (std::size_t k = 0; k < points.size(); ++k)
      v[k] = points[k][d];
    out.emplace_back(grid, std::move(v));
  }
  return out;
}

} // namespace detail

/// Arclength at every sample (0 at the first), integrating sqrt<x'(t),x'(t)>
/// with Simpson's rule per interval on the not-a-knot spline of the points.
inline std::vector<double> cumulative_arclength(const CurveSamples& c)
{
  c.validate();
  if (c.size() < 4)
    throw InputError("arclength: need at least 4 samples");
  const auto splines = detail::component_splines(c.t, c.points, c.dim);
  Eigen::VectorXd d(c.dim);
  auto speed2 = [&](double t) {
    for (int i = 0; i < c.dim; ++i)
      d[i] = splines[static_cast<std::size_t>(i)].derivative(t);
    return detail::inner(d, d);
  };

  // Reference scale for the regularity test.
  double typical = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k)
    typical = std::max(typical, std::abs(speed2(c.t[k])));
  const double floor = 1e-12 * std::max(typical, 1e-300);

  auto speed = [&](double t) {
    const double q = speed2(t);
    if (!(q > floor))
      throw InputError("arclength: curve not regular (<x',x'> = " + std::to_string(q) + ") at t = " + std::to_string(t));
    return std::sqrt(q);
  };

  std::vector<double> s(c.size(), 0.0);
  double left = speed(c.t[0]);
  for (std::size_t k = 0; k + 1 < c.size(); ++k) {
    const double a = c.t[k], b = c.t[k + 1];
    const double right = speed(b);
    s[k + 1] = s[k] + (b - a) / 6.0 * (left + 4.0 * speed(0.5 * (a + b)) + right);
    left = right;
  }
  return s;
}

/// Resamples the curve on a uniform arclength grid with the same number of
/// samples, starting at arclength value `s_start`.
inline CurveSamples arclength_reparametrize(const CurveSamples& c, double s_start = 0.0)
{
  const std::vector<double> s = cumulative_arclength(c);
  std::vector<double> shifted(s.size());
  for (std::size_t k = 0; k < s.size(); ++k)
    shifted[k] = s_start + s[k];
  const auto splines = detail::component_splines(shifted, c.points, c.dim);

  CurveSamples out;
  out.dim = c.dim;
  out.arclength = true;
  const std::size_t N = c.size();
  out.spacing = s.back() / static_cast<double>(N - 1);
  for (std::size_t k = 0; k < N; ++k) {
    const double sk = k + 1 == N ? shifted.back() : s_start + static_cast<double>(k) * out.spacing;
    Eigen::VectorXd p(c.dim);
    for (int d = 0; d < c.dim; ++d)
      p[d] = splines[static_cast<std::size_t>(d)](sk);
    out.t.push_back(sk);
    out.points.push_back(std::move(p));
  }
  out.validate();
  return out;
}

// ---------------------------------------------------------------------------
// Frame recovery in Q^2.

struct RecoveredCurve
{
  Trajectory trajectory;
  std::vector<double> kappa;
  double max_raw_gram_residual = 0.0; ///< before reprojection
};

/// For n = 1 the Frenet rows give kappa = -<x'',x''>/2 and y = kappa x - x''.
/// Derivatives use 4th-order central differences; two samples are dropped at each end.
inline RecoveredCurve recover_frame_n1(const CurveSamples& c, double on_cone_tol = 1e-6)
{
  if (c.dim != 3)
    throw InputError("recover_frame_n1: curve must lie in E_1^3 (n = 1)");
  if (!c.arclength)
    throw InputError("recover_frame_n1: curve must be arclength-parametrized");
  if (c.size() < 7)
    throw InputError("recover_frame_n1: need at least 7 samples");
  c.validate();
  const double off = on_cone_residual(c);
  if (!(off < on_cone_tol))
    throw InputError("recover_frame_n1: curve is off the cone (max |<x,x>| = " + std::to_string(off) + ")");

  const double h = c.spacing;
  std::vector<double> s, kappa;
  std::vector<AsymptoticFrame> frames;
  double raw = 0.0;
  for (std::size_t k = fd::kMargin; k + fd::kMargin < c.size(); ++k) {
    const Eigen::VectorXd v1 = fd::first(c.points, k, h);
    const Eigen::VectorXd acc = fd::second(c.points, k, h);
    const double kap = -0.5 * detail::inner(acc, acc);
    Eigen::Matrix3d m;
    m.col(0) = c.points[k];
    m.col(1) = v1;
    m.col(2) = kap * c.points[k] - acc;
    AsymptoticFrame f{Eigen::MatrixXd(m)};
    raw = std::max(raw, gram_residual(f).max_abs);
    frames.push_back(reproject_frame(f));
    s.push_back(c.t[k]);
    kappa.push_back(kap);
  }
  return RecoveredCurve{Trajectory(std::move(s), std::move(frames), h, Provenance::Ingested), std::move(kappa), raw};
}

// ---------------------------------------------------------------------------
// CSV ingestion: header "t,x_1,...,x_{n+2}" (or "s,..." for arclength data),
// then one row per sample.

namespace detail {

inline std::string_view trim(std::string_view v)
{
  while (!v.empty() && (v.front() == ' ' || v.front() == '\t' || v.front() == '\r'))
    v.remove_prefix(1);
  while (!v.empty() && (v.back() == ' ' || v.back() == '\t' || v.back() == '\r'))
    v.remove_suffix(1);
  return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view v)
{
  v = trim(v);
  if (!v.empty() && v.front() == '+')
    v.remove_prefix(1);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
    return std::nullopt;
  return out;
}

} // namespace detail

inline CurveSamples read_curve_csv(std::istream& in)
{
  std::string line;
  int line_no = 0;
  CurveSamples c;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view v = detail::trim(line);
    if (v.empty() || v.front() == '#')
      continue;
    const auto cells = detail::split(v, ',');
    if (!header) {
      if (cells.front() != "t" && cells.front() != "s")
        throw InputError("curve CSV line " + std::to_string(line_no) + ": first header column must be 't' or 's'");
      c.dim = static_cast<int>(cells.size()) - 1;
      if (c.dim < 3)
        throw InputError("curve CSV line " + std::to_string(line_no) + ": need at least 3 coordinate columns");
      c.arclength = cells.front() == "s";
      header = true;
      continue;
    }
    if (static_cast<int>(cells.size()) != c.dim + 1)
      throw InputError("curve CSV line " + std::to_string(line_no) + ": expected " + std::to_string(c.dim + 1) +
                       " columns");
    Eigen::VectorXd p(c.dim);
    double t = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto x = detail::parse_double(cells[i]);
      if (!x)
        throw InputError("curve CSV line " + std::to_string(line_no) + ": bad number '" + std::string(cells[i]) + "'");
      if (i == 0)
        t = *x;
      else
        p[static_cast<Eigen::Index>(i - 1)] = *x;
    }
    c.t.push_back(t);
    c.points.push_back(std::move(p));
  }
  if (!header)
    throw InputError("curve CSV: missing header");
  if (c.arclength && c.size() >= 2)
    c.spacing = (c.t.back() - c.t.front()) / static_cast<double>(c.size() - 1);
  c.validate();
  return c;
}

inline CurveSamples read_curve_csv_string(const std::string& text)
{
  std::istringstream in(text);
  return read_curve_csv(in);
}

} // namespace lightcone
