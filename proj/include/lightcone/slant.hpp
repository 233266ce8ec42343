#pragma once

// V_n-slant helices: frame coefficients of a fixed axis, harmonic curvature
// functions, axis detection and reconstruction, G-functions, and residuals of
// the identities relating them.
//
// Index conventions (1-based, as in the formulas):
//   eta_1 = <W,y>, eta_{i+1} = <W,V_i> (1 <= i <= n), eta_{n+2} = <W,x>
//   H_1 = eta_{n+2}/eta_2, H_i = eta_i/eta_2 (2 <= i <= n+1), H_{n+2} = eta_1/eta_2
// Series are stored as matrices with one row per sample and column j holding
// the quantity with index j+1.

#include "lightcone/error.hpp"
#include "lightcone/frenet.hpp"
#include "lightcone/interpolation.hpp"
#include "lightcone/lorentz.hpp"
#include "lightcone/profile.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace lightcone {

/// Uniform-grid table of indexed series (eta, H or G).
struct IndexedSeries
{
  std::vector<double> s;
  Eigen::MatrixXd values; ///< rows = samples, column j = index j+1
  double h = 0.0;

  int count() const { return static_cast<int>(values.cols()); }
  int n() const { return count() - 2; }
  std::size_t size() const { return s.size(); }
  /// Value with 1-based index i at sample k.
  double at(int i, std::size_t k) const { return values(static_cast<Eigen::Index>(k), i - 1); }
  std::vector<double> column(int i) const
  {
    std::vector<double> out(size());
    for (std::size_t k = 0; k < size(); ++k)
      out[k] = at(i, k);
    return out;
  }
};

struct EtaSeries : IndexedSeries
{
  Eigen::VectorXd axis;
  double axis_norm = 0.0; ///< <W,W>
};

struct HarmonicSeries : IndexedSeries
{
  std::vector<double> eta2; ///< <V_1,W> per sample; empty when ODE-integrated
};

struct GSeries : IndexedSeries
{
};

enum class EtaVariant {
  Derived,      ///< expanded row by row from the Frenet system
  PaperLiteral, ///< middle block eta_{i+1}' = k_i eta_{n+2} - t_{i-1} eta_i + t_i (eta_{i+2} + eta_1)
};

enum class HarmonicVariant {
  Theorem,      ///< H_{i+1}' = k_i H_1 - t_{i-1} H_i + t_i H_{i+2}
  ProofLiteral, ///< H_{i+1}' = k_i H_1 - t_{i-1} H_{i+1} + t_i H_{i+2}
};

inline const char* to_string(EtaVariant v) { return v == EtaVariant::Derived ? "derived" : "paper-literal"; }
inline const char* to_string(HarmonicVariant v) { return v == HarmonicVariant::Theorem ? "theorem" : "proof-literal"; }

// ---------------------------------------------------------------------------
// eta coefficients

inline EtaSeries eta_from_axis(const Trajectory& t, const LorentzVector& w)
{
  if (w.dim() != t.dim())
    throw InputError("eta_from_axis: axis dimension " + std::to_string(w.dim()) + " vs trajectory " +
                     std::to_string(t.dim()));
  const int m = t.dim();
  EtaSeries e;
  e.s = t.s();
  e.h = t.h();
  e.axis = w.components();
  e.axis_norm = lorentz_inner(w, w);
  e.values.resize(static_cast<Eigen::Index>(t.size()), m);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const Eigen::MatrixXd& f = t.frame(k).matrix();
    const auto row = static_cast<Eigen::Index>(k);
    e.values(row, 0) = detail::inner(e.axis, f.col(m - 1));
    for (int i = 1; i <= m - 2; ++i)
      e.values(row, i) = detail::inner(e.axis, f.col(i));
    e.values(row, m - 1) = detail::inner(e.axis, f.col(0));
  }
  return e;
}

/// max_k || W - (eta_1 x + eta_{n+2} y + sum eta_{i+1} V_i) ||_inf
inline double eta_reconstruction_residual(const Trajectory& t, const EtaSeries& e)
{
  const int m = t.dim();
  double worst = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const Eigen::MatrixXd& f = t.frame(k).matrix();
    Eigen::VectorXd w = e.at(1, k) * f.col(0) + e.at(m, k) * f.col(m - 1);
    for (int i = 1; i <= m - 2; ++i)
      w += e.at(i + 1, k) * f.col(i);
    worst = std::max(worst, (w - e.axis).cwiseAbs().maxCoeff());
  }
  return worst;
}

/// d/ds of (eta_1..eta_{n+2}) for a constant axis under the chosen variant.
inline Eigen::VectorXd eta_rhs(const Eigen::Ref<const Eigen::VectorXd>& eta, const ProfileValues& c, EtaVariant variant)
{
  const int m = static_cast<int>(eta.size());
  const int n = m - 2;
  auto E = [&](int i) { return eta[i - 1]; };
  Eigen::VectorXd d(m);
  double sum = 0.0;
  for (int i = 1; i <= n; ++i)
    sum += c.k(i) * E(i + 1);
  d[0] = -sum;
  for (int i = 1; i <= n; ++i) {
    double v = c.k(i) * E(n + 2) - c.t(i - 1) * E(i);
    if (variant == EtaVariant::Derived) {
      if (i == 1)
        v -= E(1);
      if (i < n)
        v += c.t(i) * E(i + 2);
    } else {
      v += c.t(i) * (E(i + 2) + E(1));
    }
    d[i] = v;
  }
  d[m - 1] = E(2);
  return d;
}

/// Residuals of eta_j' = rhs_j with derivatives by 4th-order central
/// differences. Column j is the equation for eta_{j+1}; interior samples only.
struct EtaOdeResidual
{
  EtaVariant variant = EtaVariant::Derived;
  std::vector<double> s;
  Eigen::MatrixXd pointwise; ///< absolute residuals
  std::vector<double> max_abs;

  /// Largest residual over the middle block (eta_2..eta_{n+1}).
  double middle_max() const
  {
    double worst = 0.0;
    for (std::size_t j = 1; j + 1 < max_abs.size(); ++j)
      worst = std::max(worst, max_abs[j]);
    return worst;
  }
};

inline EtaOdeResidual eta_ode_residual(const EtaSeries& e, const CurvatureProfile& p, EtaVariant variant)
{
  if (e.size() < 7)
    throw InputError("eta_ode_residual: need at least 7 samples");
  if (p.n() != e.n())
    throw InputError("eta_ode_residual: profile and series n differ");
  const int m = e.count();
  std::vector<Eigen::VectorXd> rows(e.size());
  for (std::size_t k = 0; k < e.size(); ++k)
    rows[k] = e.values.row(static_cast<Eigen::Index>(k)).transpose();

  EtaOdeResidual r;
  r.variant = variant;
  r.pointwise.resize(static_cast<Eigen::Index>(e.size() - 2 * fd::kMargin), m);
  r.max_abs.assign(static_cast<std::size_t>(m), 0.0);
  for (std::size_t k = fd::kMargin; k + fd::kMargin < e.size(); ++k) {
    const Eigen::VectorXd dev = (fd::first(rows, k, e.h) - eta_rhs(rows[k], p(e.s[k]), variant)).cwiseAbs();
    r.pointwise.row(static_cast<Eigen::Index>(k - fd::kMargin)) = dev.transpose();
    r.s.push_back(e.s[k]);
    for (int j = 0; j < m; ++j)
      r.max_abs[static_cast<std::size_t>(j)] = std::max(r.max_abs[static_cast<std::size_t>(j)], dev[j]);
  }
  return r;
}

/// Integral form: trapezoid integration of the derived right-hand sides must
/// reproduce eta(s) - eta(s_0). Returns the max deviation per index.
inline std::vector<double> eta_integral_residual(const EtaSeries& e, const CurvatureProfile& p)
{
  const int m = e.count();
  std::vector<std::vector<double>> rhs(static_cast<std::size_t>(m), std::vector<double>(e.size()));
  for (std::size_t k = 0; k < e.size(); ++k) {
    const Eigen::VectorXd d = eta_rhs(e.values.row(static_cast<Eigen::Index>(k)).transpose(), p(e.s[k]),
                                      EtaVariant::Derived);
    for (int j = 0; j < m; ++j)
      rhs[static_cast<std::size_t>(j)][k] = d[j];
  }
  std::vector<double> worst(static_cast<std::size_t>(m), 0.0);
  for (int j = 0; j < m; ++j) {
    const auto integral = cumulative_trapezoid(rhs[static_cast<std::size_t>(j)], e.h);
    for (std::size_t k = 0; k < e.size(); ++k) {
      const double dev = std::abs(integral[k] - (e.at(j + 1, k) - e.at(j + 1, 0)));
      worst[static_cast<std::size_t>(j)] = std::max(worst[static_cast<std::size_t>(j)], dev);
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Harmonic curvature functions

inline constexpr double kDefaultRatioFloor = 1e-6;

/// Ratio form. Throws when |eta_2| drops to eps0 or below, naming the first such s.
inline HarmonicSeries harmonics_from_eta(const EtaSeries& e, double eps0 = kDefaultRatioFloor)
{
  const int m = e.count();
  HarmonicSeries H;
  H.s = e.s;
  H.h = e.h;
  H.values.resize(e.values.rows(), m);
  H.eta2.resize(e.size());
  for (std::size_t k = 0; k < e.size(); ++k) {
    const double eta2 = e.at(2, k);
    if (!(std::abs(eta2) > eps0))
      throw InputError("harmonics_from_eta: |eta_2| = |<V_1,W>| <= " + std::to_string(eps0) + " at s = " +
                       std::to_string(e.s[k]));
    const auto row = static_cast<Eigen::Index>(k);
    H.eta2[k] = eta2;
    H.values(row, 0) = e.at(m, k) / eta2;
    for (int i = 2; i <= m - 1; ++i)
      H.values(row, i - 1) = e.at(i, k) / eta2;
    H.values(row, m - 1) = e.at(1, k) / eta2;
  }
  return H;
}

inline Eigen::VectorXd harmonic_rhs(const Eigen::Ref<const Eigen::VectorXd>& h, const ProfileValues& c,
                                    HarmonicVariant variant)
{
  const int m = static_cast<int>(h.size());
  const int n = m - 2;
  auto H = [&](int i) { return h[i - 1]; };
  Eigen::VectorXd d(m);
  d[0] = H(2);
  d[1] = -H(n + 2) + c.k(1) * H(1) + c.t(1) * H(3);
  for (int i = 2; i <= n; ++i) {
    const double coupled = variant == HarmonicVariant::Theorem ? H(i) : H(i + 1);
    d[i] = c.k(i) * H(1) - c.t(i - 1) * coupled + c.t(i) * H(i + 2);
  }
  double sum = 0.0;
  for (int i = 1; i <= n; ++i)
    sum += c.k(i) * H(i + 1);
  d[m - 1] = -sum;
  return d;
}

/// RK4 integration of the harmonic ODE system from H(span.lo) = h0.
inline HarmonicSeries harmonic_ode_integrate(const CurvatureProfile& p, const std::vector<double>& h0, Interval span,
                                             double h, HarmonicVariant variant = HarmonicVariant::Theorem)
{
  const int m = p.n() + 2;
  if (static_cast<int>(h0.size()) != m)
    throw InputError("harmonic_ode_integrate: need n+2 initial values");
  if (!p.domain().contains(span))
    throw InputError("harmonic_ode_integrate: span not inside the profile domain");
  const std::size_t steps = detail::step_count(span, h);

  HarmonicSeries out;
  out.h = h;
  out.values.resize(static_cast<Eigen::Index>(steps + 1), m);
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(h0.data(), m);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double s = k == steps ? span.hi : span.lo + static_cast<double>(k) * h;
    out.s.push_back(s);
    out.values.row(static_cast<Eigen::Index>(k)) = y.transpose();
    if (k == steps)
      break;
    const double next = k + 1 == steps ? span.hi : span.lo + static_cast<double>(k + 1) * h;
    const double dt = next - s;
    const ProfileValues c0 = detail::checked_values(p, s);
    const ProfileValues cm = detail::checked_values(p, s + 0.5 * dt);
    const ProfileValues c1 = detail::checked_values(p, next);
    const Eigen::VectorXd k1 = harmonic_rhs(y, c0, variant);
    const Eigen::VectorXd k2 = harmonic_rhs(y + 0.5 * dt * k1, cm, variant);
    const Eigen::VectorXd k3 = harmonic_rhs(y + 0.5 * dt * k2, cm, variant);
    const Eigen::VectorXd k4 = harmonic_rhs(y + dt * k3, c1, variant);
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!y.allFinite())
      throw IntegrationError("harmonic_ode_integrate: non-finite state", next);
  }
  return out;
}

/// Residual of the harmonic ODE system on a given series (finite differences,
/// interior samples). Column j is the equation for H_{j+1}.
inline std::vector<double> harmonic_ode_residual(const HarmonicSeries& H, const CurvatureProfile& p,
                                                 HarmonicVariant variant)
{
  if (H.size() < 7)
    throw InputError("harmonic_ode_residual: need at least 7 samples");
  const int m = H.count();
  std::vector<Eigen::VectorXd> rows(H.size());
  for (std::size_t k = 0; k < H.size(); ++k)
    rows[k] = H.values.row(static_cast<Eigen::Index>(k)).transpose();
  std::vector<double> worst(static_cast<std::size_t>(m), 0.0);
  for (std::size_t k = fd::kMargin; k + fd::kMargin < H.size(); ++k) {
    const Eigen::VectorXd dev = (fd::first(rows, k, H.h) - harmonic_rhs(rows[k], p(H.s[k]), variant)).cwiseAbs();
    for (int j = 0; j < m; ++j)
      worst[static_cast<std::size_t>(j)] = std::max(worst[static_cast<std::size_t>(j)], dev[j]);
  }
  return worst;
}

/// tau_1 / kappa_2, the closed form quoted for n = 2. Diagnostic only; the
/// operative H_1 is the ratio eta_{n+2}/eta_2.
inline double h1_curvature_ratio(const CurvatureProfile& p, double s)
{
  if (p.n() < 2)
    throw InputError("h1_curvature_ratio: needs n >= 2");
  const ProfileValues c = p(s);
  return c.t(1) / c.k(2);
}

/// Recursion
///   H_i = (1/tau_{i-1}) { tau_i H_{i+2} + kappa_i H_1 - H_{i+1}'
///                         + H_{i+1} (H_X - tau_1 H_3 - kappa_1 H_1) }
/// for i = 3..n, with X = n+2 (corrected) and X = n-2 (as printed). The row
/// i = n+1 is excluded since tau_n = 0.
struct RecursionResidual
{
  std::vector<int> indices; ///< the i values, 3..n
  std::vector<double> s;
  Eigen::MatrixXd corrected; ///< interior samples x indices
  Eigen::MatrixXd literal;
  std::vector<double> max_corrected;
  std::vector<double> max_literal;
};

inline RecursionResidual harmonic_recursion_residual(const HarmonicSeries& H, const CurvatureProfile& p,
                                                     double tau_floor = kDefaultRatioFloor)
{
  const int n = H.n();
  if (n < 3)
    throw InputError("harmonic_recursion_residual: needs n >= 3");
  if (p.n() != n)
    throw InputError("harmonic_recursion_residual: profile and series n differ");
  if (H.size() < 7)
    throw InputError("harmonic_recursion_residual: need at least 7 samples");

  RecursionResidual r;
  for (int i = 3; i <= n; ++i)
    r.indices.push_back(i);
  const auto cols = static_cast<Eigen::Index>(r.indices.size());
  const auto rows = static_cast<Eigen::Index>(H.size() - 2 * fd::kMargin);
  r.corrected.resize(rows, cols);
  r.literal.resize(rows, cols);
  r.max_corrected.assign(r.indices.size(), 0.0);
  r.max_literal.assign(r.indices.size(), 0.0);

  std::vector<std::vector<double>> series(static_cast<std::size_t>(n + 2));
  for (int i = 1; i <= n + 2; ++i)
    series[static_cast<std::size_t>(i - 1)] = H.column(i);

  for (std::size_t k = fd::kMargin; k + fd::kMargin < H.size(); ++k) {
    const ProfileValues c = p(H.s[k]);
    auto h = [&](int i) { return H.at(i, k); };
    r.s.push_back(H.s[k]);
    for (std::size_t col = 0; col < r.indices.size(); ++col) {
      const int i = r.indices[col];
      const double tau_prev = c.t(i - 1);
      if (!(std::abs(tau_prev) > tau_floor))
        throw InputError("harmonic_recursion_residual: tau_" + std::to_string(i - 1) + " near zero at s = " +
                         std::to_string(H.s[k]));
      const double dh = fd::first(series[static_cast<std::size_t>(i)], k, H.h);
      const double common = c.t(i) * h(i + 2) + c.k(i) * h(1) - dh;
      const double tail = -c.t(1) * h(3) - c.k(1) * h(1);
      const double corrected = h(i) - (common + h(i + 1) * (h(n + 2) + tail)) / tau_prev;
      const double literal = h(i) - (common + h(i + 1) * (h(n - 2) + tail)) / tau_prev;
      const auto row = static_cast<Eigen::Index>(k - fd::kMargin);
      r.corrected(row, static_cast<Eigen::Index>(col)) = std::abs(corrected);
      r.literal(row, static_cast<Eigen::Index>(col)) = std::abs(literal);
      r.max_corrected[col] = std::max(r.max_corrected[col], std::abs(corrected));
      r.max_literal[col] = std::max(r.max_literal[col], std::abs(literal));
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Axis

/// W(s) = eta_2 (H_{n+2} x + H_1 y + sum H_{i+1} V_i) at every sample.
struct AxisReconstruction
{
  std::vector<Eigen::VectorXd> axis;
  double drift = 0.0; ///< max_s ||W(s) - W(s_0)||_inf
};

inline AxisReconstruction axis_from_harmonics(const Trajectory& t, const HarmonicSeries& H, double eta2)
{
  if (H.size() != t.size() || H.count() != t.dim())
    throw InputError("axis_from_harmonics: grid or dimension mismatch");
  const int m = t.dim();
  AxisReconstruction out;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (std::abs(H.s[k] - t.s(k)) > 1e-12 * std::max(1.0, std::abs(t.s(k))))
      throw InputError("axis_from_harmonics: grids do not align at sample " + std::to_string(k));
    const Eigen::MatrixXd& f = t.frame(k).matrix();
    Eigen::VectorXd w = H.at(m, k) * f.col(0) + H.at(1, k) * f.col(m - 1);
    for (int i = 1; i <= m - 2; ++i)
      w += H.at(i + 1, k) * f.col(i);
    w *= eta2;
    out.drift = std::max(out.drift, k == 0 ? 0.0 : (w - out.axis.front()).cwiseAbs().maxCoeff());
    out.axis.push_back(std::move(w));
  }
  return out;
}

enum class SlantVerdict {
  Slant,      ///< constant nonzero pairing <V_n, W>
  Degenerate, ///< a constant pairing exists but it is zero
  None,       ///< no constant pairing within tolerance
};

inline const char* to_string(SlantVerdict v)
{
  switch (v) {
  case SlantVerdict::Slant: return "slant";
  case SlantVerdict::Degenerate: return "degenerate: constant pairing is zero";
  case SlantVerdict::None: return "none";
  }
  return "?";
}

struct AxisCandidate
{
  Eigen::VectorXd axis;          ///< normalized W
  double eta_np1 = 0.0;          ///< <V_n, W> under that normalization
  double constancy_residual = 0.0;
  double sigma_min = 0.0;
  CausalClass causal = CausalClass::Zero;
};

struct SlantDetection
{
  SlantVerdict verdict = SlantVerdict::None;
  double sigma_min = 0.0;
  double tolerance = 0.0;
  std::optional<AxisCandidate> candidate; ///< present for Slant and Degenerate
};

struct DetectionOptions
{
  std::optional<double> tol;               ///< default 1e-8 sqrt(rows)
  double eps_c = kDefaultCausalTolerance;
};

/// |<W,W>| = 1 when non-null, else ||W||_inf = 1; first significant component positive.
inline double axis_normalization(const Eigen::VectorXd& w, double eps_c)
{
  const double inf = w.cwiseAbs().maxCoeff();
  if (!(inf > 0.0))
    throw InputError("axis_normalization: zero vector");
  const double q = detail::inner(w, w);
  double scale = std::abs(q) / (inf * inf) > eps_c ? 1.0 / std::sqrt(std::abs(q)) : 1.0 / inf;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (std::abs(w[i]) > 1e-9 * inf) {
      if (w[i] < 0.0)
        scale = -scale;
      break;
    }
  }
  return scale;
}

/// Finds W, c with <V_n(s_k), W> = c for all samples: the right singular
/// vector of the smallest singular value of the rows (V_n^T J, -1).
inline SlantDetection detect_slant_axis(const Trajectory& t, const DetectionOptions& opts = {})
{
  const int m = t.dim();
  const int n = t.n();
  if (static_cast<int>(t.size()) < n + 4)
    throw InputError("detect_slant_axis: need at least n+4 samples");

  Eigen::MatrixXd A(static_cast<Eigen::Index>(t.size()), m + 1);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    A.block(row, 0, 1, m) = detail::lower(t.frame(k).matrix().col(n)).transpose();
    A(row, m) = -1.0;
  }
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();

  SlantDetection d;
  d.tolerance = opts.tol.value_or(1e-8 * std::sqrt(static_cast<double>(A.rows())));
  d.sigma_min = sv[m];
  if (sv[m - 1] < d.tolerance)
    throw InputError("detect_slant_axis: sample matrix is rank deficient (second smallest singular value " +
                     std::to_string(sv[m - 1]) + "); use a longer span");
  if (!(d.sigma_min < d.tolerance)) {
    d.verdict = SlantVerdict::None;
    return d;
  }

  const Eigen::VectorXd v = svd.matrixV().col(m);
  Eigen::VectorXd w = v.head(m);
  double c = v[m];
  const double scale = axis_normalization(w, opts.eps_c);
  w *= scale;
  c *= scale;

  AxisCandidate cand;
  cand.axis = w;
  cand.eta_np1 = c;
  cand.sigma_min = d.sigma_min;
  cand.causal = causal_class(LorentzVector(w), opts.eps_c);
  double mean = 0.0, sq = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k)
    mean += detail::inner(t.frame(k).matrix().col(n), w);
  mean /= static_cast<double>(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double dv = detail::inner(t.frame(k).matrix().col(n), w) - mean;
    sq += dv * dv;
  }
  cand.constancy_residual = std::sqrt(sq / static_cast<double>(t.size()));
  d.verdict = std::abs(c) > opts.eps_c ? SlantVerdict::Slant : SlantVerdict::Degenerate;
  d.candidate = std::move(cand);
  return d;
}

/// |axis_norm H_{n+1}^2 / eta_{n+1}^2 - 2 H_1 H_{n+2} - sum_{i=1..n} H_{i+1}^2| per sample.
/// axis_norm = 1 is the unit-spacelike-axis statement.
inline std::vector<double> unit_axis_identity_residual(const HarmonicSeries& H, double eta_np1, double axis_norm)
{
  if (!(std::abs(eta_np1) > kDefaultCausalTolerance))
    throw InputError("unit_axis_identity_residual: eta_{n+1} must be nonzero");
  const int n = H.n();
  std::vector<double> out(H.size());
  for (std::size_t k = 0; k < H.size(); ++k) {
    double sum = 0.0;
    for (int i = 1; i <= n; ++i)
      sum += H.at(i + 1, k) * H.at(i + 1, k);
    const double hn1 = H.at(n + 1, k);
    out[k] = std::abs(axis_norm * hn1 * hn1 / (eta_np1 * eta_np1) - 2.0 * H.at(1, k) * H.at(n + 2, k) - sum);
  }
  return out;
}

// ---------------------------------------------------------------------------
// G-functions

inline GSeries g_functions(const HarmonicSeries& H, double eps0 = kDefaultRatioFloor)
{
  GSeries G;
  G.s = H.s;
  G.h = H.h;
  G.values.resize(H.values.rows(), H.values.cols());
  for (std::size_t k = 0; k < H.size(); ++k) {
    const double h2 = H.at(2, k);
    if (!(std::abs(h2) > eps0))
      throw InputError("g_functions: |H_2| <= " + std::to_string(eps0) + " at s = " + std::to_string(H.s[k]));
    G.values.row(static_cast<Eigen::Index>(k)) = H.values.row(static_cast<Eigen::Index>(k)) / h2;
  }
  return G;
}

/// Residuals of the G-function cases, interior samples (derivatives by finite differences).
///   case 1: |G_1' - 1|, with c = mean(G_1 - s) fitted for G_1 = s + c
///   case 2: |G_2 - 1|
///   case 3: |tau_1 G_3 - G_{n+2} + kappa_1 G_1|          (tau_1 := 0 when n = 1)
///   case 4: |G_{i+1}' - (kappa_i G_1 - tau_{i-1} G_i + tau_i G_{i+2})|, 2 <= i <= n
///   case 5: |G_{n+2}' + kappa_1 + sum_{i=2..n} kappa_i G_i|       (as printed)
///           |G_{n+2}' + kappa_1 + sum_{i=2..n} kappa_i G_{i+1}|   (from the H_{n+2} row)
struct GResidual
{
  double c = 0.0;
  double case1_fit = 0.0; ///< max |G_1 - (s + c)|
  std::vector<double> s;
  std::vector<double> case1, case2, case3, case5_literal, case5_derived;
  std::vector<std::vector<double>> case4; ///< one series per i = 2..n

  static double max_of(const std::vector<double>& v)
  {
    double w = 0.0;
    for (double x : v)
      w = std::max(w, x);
    return w;
  }
  double max_case4() const
  {
    double w = 0.0;
    for (const auto& v : case4)
      w = std::max(w, max_of(v));
    return w;
  }
};

inline GResidual g_consistency_residual(const GSeries& G, const CurvatureProfile& p)
{
  if (G.size() < 7)
    throw InputError("g_consistency_residual: need at least 7 samples");
  const int n = G.n();
  if (p.n() != n)
    throw InputError("g_consistency_residual: profile and series n differ");

  GResidual r;
  double acc = 0.0;
  for (std::size_t k = 0; k < G.size(); ++k)
    acc += G.at(1, k) - G.s[k];
  r.c = acc / static_cast<double>(G.size());
  for (std::size_t k = 0; k < G.size(); ++k)
    r.case1_fit = std::max(r.case1_fit, std::abs(G.at(1, k) - (G.s[k] + r.c)));

  std::vector<std::vector<double>> cols(static_cast<std::size_t>(n + 2));
  for (int i = 1; i <= n + 2; ++i)
    cols[static_cast<std::size_t>(i - 1)] = G.column(i);
  auto deriv = [&](int i, std::size_t k) { return fd::first(cols[static_cast<std::size_t>(i - 1)], k, G.h); };

  r.case4.assign(static_cast<std::size_t>(std::max(0, n - 1)), {});
  for (std::size_t k = fd::kMargin; k + fd::kMargin < G.size(); ++k) {
    const ProfileValues c = p(G.s[k]);
    auto g = [&](int i) { return G.at(i, k); };
    r.s.push_back(G.s[k]);
    r.case1.push_back(std::abs(deriv(1, k) - 1.0));
    r.case2.push_back(std::abs(g(2) - 1.0));
    r.case3.push_back(std::abs(c.t(1) * g(3) - g(n + 2) + c.k(1) * g(1)));
    for (int i = 2; i <= n; ++i)
      r.case4[static_cast<std::size_t>(i - 2)].push_back(
          std::abs(deriv(i + 1, k) - (c.k(i) * g(1) - c.t(i - 1) * g(i) + c.t(i) * g(i + 2))));
    double lit = c.k(1), der = c.k(1);
    for (int i = 2; i <= n; ++i) {
      lit += c.k(i) * g(i);
      der += c.k(i) * g(i + 1);
    }
    r.case5_literal.push_back(std::abs(deriv(n + 2, k) + lit));
    r.case5_derived.push_back(std::abs(deriv(n + 2, k) + der));
  }
  return r;
}

} // namespace lightcone
