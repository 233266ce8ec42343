#pragma once

// Synthesis of cone curves from curvature profiles and Frenet residual checks.
//
// Frenet system of the asymptotic frame, with tau_0 = tau_n = 0:
//   x'   = V_1
//   V_1' = kappa_1 x - y + tau_1 V_2
//   V_i' = kappa_i x - tau_{i-1} V_{i-1} + tau_i V_{i+1}      (2 <= i <= n)
//   y'   = -sum_i kappa_i V_i

#include "lightcone/error.hpp"
#include "lightcone/interpolation.hpp"
#include "lightcone/lorentz.hpp"
#include "lightcone/profile.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace lightcone {

enum class Provenance { Synthesized, Preset, Ingested };

inline const char* to_string(Provenance p)
{
  switch (p) {
  case Provenance::Synthesized: return "synthesized";
  case Provenance::Preset: return "preset";
  case Provenance::Ingested: return "ingested";
  }
  return "?";
}

struct TrajectoryTolerances
{
  double gram = 1e-8;
  double on_cone = 1e-8;
  double spacing = 1e-12; ///< relative
};

/// Uniformly spaced samples (s_k, frame_k) along a cone curve.
class Trajectory
{
public:
  Trajectory(std::vector<double> s, std::vector<AsymptoticFrame> frames, double h, Provenance provenance,
             const TrajectoryTolerances& tol = {})
    : s_(std::move(s)), frames_(std::move(frames)), h_(h), provenance_(provenance)
  {
    validate(tol);
  }

  int n() const { return frames_.front().n(); }
  int dim() const { return frames_.front().dim(); }
  std::size_t size() const noexcept { return s_.size(); }
  double h() const noexcept { return h_; }
  Provenance provenance() const noexcept { return provenance_; }
  Interval span() const { return {s_.front(), s_.back()}; }

  const std::vector<double>& s() const noexcept { return s_; }
  double s(std::size_t k) const { return s_[k]; }
  const AsymptoticFrame& frame(std::size_t k) const { return frames_[k]; }
  const std::vector<AsymptoticFrame>& frames() const noexcept { return frames_; }

  /// Column `col` of every frame, e.g. col 0 gives the curve points.
  std::vector<Eigen::VectorXd> column(int col) const
  {
    std::vector<Eigen::VectorXd> out;
    out.reserve(frames_.size());
    for (const auto& f : frames_)
      out.emplace_back(f.matrix().col(col));
    return out;
  }

private:
  void validate(const TrajectoryTolerances& tol) const
  {
    if (s_.size() != frames_.size())
      throw InputError("trajectory: sample and frame counts differ");
    if (s_.size() < 2)
      throw InputError("trajectory: need at least 2 samples");
    if (!(h_ > 0.0))
      throw InputError("trajectory: step must be positive");
    const int dim0 = frames_.front().dim();
    for (std::size_t k = 0; k < s_.size(); ++k) {
      if (frames_[k].dim() != dim0)
        throw InputError("trajectory: inconsistent frame dimensions");
      if (k > 0 && std::abs((s_[k] - s_[k - 1]) - h_) > tol.spacing * std::max(1.0, std::abs(s_[k])) + 1e-12 * h_)
        throw InputError("trajectory: non-uniform spacing at sample " + std::to_string(k));
      const double g = gram_max_abs(frames_[k].matrix());
      if (!(g < tol.gram))
        throw InputError("trajectory: frame " + std::to_string(k) + " violates Gram conditions (" + std::to_string(g) +
                         ")");
      const double q = std::abs(detail::inner(frames_[k].matrix().col(0), frames_[k].matrix().col(0)));
      if (!(q < tol.on_cone))
        throw InputError("trajectory: point " + std::to_string(k) + " is off the cone (" + std::to_string(q) + ")");
    }
  }

  std::vector<double> s_;
  std::vector<AsymptoticFrame> frames_;
  double h_;
  Provenance provenance_;
};

/// Right-hand side of the Frenet system for the frame matrix [x, V_1..V_n, y].
inline Eigen::MatrixXd frenet_rhs(const Eigen::MatrixXd& f, const ProfileValues& c)
{
  const int m = static_cast<int>(f.cols());
  const int n = m - 2;
  Eigen::MatrixXd d(f.rows(), m);
  d.col(0) = f.col(1);
  for (int i = 1; i <= n; ++i) {
    Eigen::VectorXd col = c.k(i) * f.col(0);
    if (i == 1)
      col -= f.col(m - 1);
    else
      col -= c.t(i - 1) * f.col(i - 1);
    if (i < n)
      col += c.t(i) * f.col(i + 1);
    d.col(i) = col;
  }
  Eigen::VectorXd dy = Eigen::VectorXd::Zero(f.rows());
  for (int i = 1; i <= n; ++i)
    dy -= c.k(i) * f.col(i);
  d.col(m - 1) = dy;
  return d;
}

struct SynthesisOptions
{
  bool reproject = true;
};

struct SynthesisResult
{
  Trajectory trajectory;
  double max_step_drift = 0.0;      ///< Gram residual after each RK4 step, before projection
  double max_final_residual = 0.0;  ///< Gram residual of the stored frames
};

namespace detail {

inline std::size_t step_count(const Interval& span, double h)
{
  if (!(h > 0.0) || !std::isfinite(h))
    throw InputError("synthesize: step must be positive");
  if (!(span.hi > span.lo))
    throw InputError("synthesize: empty span");
  const double steps = span.length() / h;
  const double rounded = std::round(steps);
  if (rounded < 1.0 || std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps))
    throw InputError("synthesize: span length " + std::to_string(span.length()) + " is not a multiple of h = " +
                     std::to_string(h));
  return static_cast<std::size_t>(rounded);
}

inline ProfileValues checked_values(const CurvatureProfile& p, double s)
{
  ProfileValues v = p(s);
  for (double x : v.kappa)
    if (!std::isfinite(x))
      throw IntegrationError("non-finite kappa", s);
  for (double x : v.tau)
    if (!std::isfinite(x))
      throw IntegrationError("non-finite tau", s);
  return v;
}

} // namespace detail

/// RK4 integration of the Frenet system with Newton reprojection after every step.
inline SynthesisResult synthesize_with_stats(const CurvatureProfile& p, const AsymptoticFrame& f0, Interval span, double h,
                                             const SynthesisOptions& opts = {})
{
  if (p.n() != f0.n())
    throw InputError("synthesize: profile n = " + std::to_string(p.n()) + " but frame n = " + std::to_string(f0.n()));
  if (!p.domain().contains(span))
    throw InputError("synthesize: span not inside the profile domain");
  const double g0 = gram_residual(f0).max_abs;
  if (!(g0 < 1e-10))
    throw InputError("synthesize: initial frame violates Gram conditions (" + std::to_string(g0) + ")");

  const std::size_t steps = detail::step_count(span, h);
  std::vector<double> s(steps + 1);
  std::vector<AsymptoticFrame> frames;
  frames.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k)
    s[k] = k == steps ? span.hi : span.lo + static_cast<double>(k) * h;

  double drift = 0.0, final_residual = g0;
  Eigen::MatrixXd f = f0.matrix();
  frames.push_back(f0);
  for (std::size_t k = 0; k < steps; ++k) {
    const double s0 = s[k], dt = s[k + 1] - s[k];
    const ProfileValues c0 = detail::checked_values(p, s0);
    const ProfileValues cm = detail::checked_values(p, s0 + 0.5 * dt);
    const ProfileValues c1 = detail::checked_values(p, s[k + 1]);
    const Eigen::MatrixXd k1 = frenet_rhs(f, c0);
    const Eigen::MatrixXd k2 = frenet_rhs(f + 0.5 * dt * k1, cm);
    const Eigen::MatrixXd k3 = frenet_rhs(f + 0.5 * dt * k2, cm);
    const Eigen::MatrixXd k4 = frenet_rhs(f + dt * k3, c1);
    Eigen::MatrixXd next = f + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.allFinite())
      throw IntegrationError("synthesize: non-finite state", s[k + 1]);
    drift = std::max(drift, gram_max_abs(next));
    if (opts.reproject) {
      try {
        next = reproject_frame(AsymptoticFrame(next)).matrix();
      } catch (const ConvergenceError& e) {
        throw IntegrationError(std::string("synthesize: ") + e.what(), s[k + 1]);
      }
    }
    final_residual = std::max(final_residual, gram_max_abs(next));
    f = next;
    frames.emplace_back(next);
  }

  TrajectoryTolerances tol;
  if (!opts.reproject)
    tol.gram = tol.on_cone = 1.0;
  return SynthesisResult{Trajectory(std::move(s), std::move(frames), h, Provenance::Synthesized, tol), drift,
                         final_residual};
}

inline Trajectory synthesize(const CurvatureProfile& p, const AsymptoticFrame& f0, Interval span, double h)
{
  return synthesize_with_stats(p, f0, span, h).trajectory;
}

/// Per-row deviation of finite-difference derivatives from the Frenet right-hand side.
///
/// Rows: 0 = x-row, i = V_i-row (1..n), n+1 = y-row. Only interior samples
/// (two dropped at each end) are reported.
struct FrenetResidual
{
  std::vector<double> s;
  Eigen::MatrixXd pointwise; ///< interior samples x rows, max-abs over components
  std::vector<double> max_abs;
};

inline FrenetResidual frenet_residual(const Trajectory& t, const CurvatureProfile& p)
{
  if (t.size() < 7)
    throw InputError("frenet_residual: need at least 7 samples");
  if (p.n() != t.n())
    throw InputError("frenet_residual: profile and trajectory n differ");
  if (!p.domain().contains(t.span()))
    throw InputError("frenet_residual: trajectory span not inside profile domain");

  const std::size_t N = t.size(), m = static_cast<std::size_t>(t.n() + 2);
  std::vector<Eigen::MatrixXd> f(N);
  for (std::size_t k = 0; k < N; ++k)
    f[k] = t.frame(k).matrix();

  FrenetResidual r;
  r.pointwise.resize(static_cast<Eigen::Index>(N - 2 * fd::kMargin), static_cast<Eigen::Index>(m));
  r.max_abs.assign(m, 0.0);
  for (std::size_t k = fd::kMargin; k + fd::kMargin < N; ++k) {
    const Eigen::MatrixXd deriv = fd::first(f, k, t.h());
    const Eigen::MatrixXd dev = deriv - frenet_rhs(f[k], p(t.s(k)));
    const auto row = static_cast<Eigen::Index>(k - fd::kMargin);
    r.s.push_back(t.s(k));
    for (std::size_t c = 0; c < m; ++c) {
      const double v = dev.col(static_cast<Eigen::Index>(c)).cwiseAbs().maxCoeff();
      r.pointwise(row, static_cast<Eigen::Index>(c)) = v;
      r.max_abs[c] = std::max(r.max_abs[c], v);
    }
  }
  return r;
}

/// |<x', x'> - 1| with x' from 4th-order central differences, interior samples.
inline double unit_speed_residual(const Trajectory& t)
{
  if (t.size() < 5)
    throw InputError("unit_speed_residual: need at least 5 samples");
  const auto x = t.column(0);
  double worst = 0.0;
  for (std::size_t k = fd::kMargin; k + fd::kMargin < t.size(); ++k) {
    const Eigen::VectorXd d = fd::first(x, k, t.h());
    worst = std::max(worst, std::abs(detail::inner(d, d) - 1.0));
  }
  return worst;
}

/// max_k |<x_k, x_k>|
inline double on_cone_residual(const Trajectory& t)
{
  double worst = 0.0;
  for (const auto& f : t.frames())
    worst = std::max(worst, std::abs(detail::inner(f.matrix().col(0), f.matrix().col(0))));
  return worst;
}

inline double max_gram_residual(const Trajectory& t)
{
  double worst = 0.0;
  for (const auto& f : t.frames())
    worst = std::max(worst, gram_max_abs(f.matrix()));
  return worst;
}

/// Frame at arbitrary s: 4-point cubic Lagrange interpolation of every frame
/// vector, then reprojection. Grid points return the stored frame unchanged.
inline AsymptoticFrame sample_at(const Trajectory& t, double s)
{
  if (!t.span().contains(s))
    throw InputError("sample_at: s = " + std::to_string(s) + " outside the trajectory span");
  const auto& grid = t.s();
  auto it = std::lower_bound(grid.begin(), grid.end(), s);
  if (it != grid.end() && *it == s)
    return t.frame(static_cast<std::size_t>(it - grid.begin()));
  if (t.size() < 4)
    throw InputError("sample_at: need at least 4 samples");

  const double pos = (s - grid.front()) / t.h();
  const auto last_start = static_cast<long>(t.size()) - 4;
  const long start = std::clamp(static_cast<long>(std::floor(pos)) - 1, 0L, last_start);
  const auto w = cubic_lagrange_weights(pos - static_cast<double>(start));
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(t.dim(), t.dim());
  for (int j = 0; j < 4; ++j)
    f += w[static_cast<std::size_t>(j)] * t.frame(static_cast<std::size_t>(start + j)).matrix();
  return reproject_frame(AsymptoticFrame(std::move(f)));
}

} // namespace lightcone
