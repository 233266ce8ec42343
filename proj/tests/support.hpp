#pragma once

// Test oracles and generators shared by the suites.

#include "lightcone/lightcone.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace lctest {

using lightcone::AsymptoticFrame;
using lightcone::CurvatureProfile;
using lightcone::Interval;
using lightcone::ProfileValues;
using lightcone::Trajectory;

inline Eigen::MatrixXd metric(int dim)
{
  Eigen::MatrixXd j = Eigen::MatrixXd::Identity(dim, dim);
  j(dim - 1, dim - 1) = -1.0;
  return j;
}

/// Random element of O(n+1,1): products of plane rotations among the
/// spacelike axes and boosts mixing a spacelike axis with the time axis.
inline Eigen::MatrixXd random_lorentz(int dim, std::mt19937& rng, double max_rapidity = 1.0)
{
  std::uniform_real_distribution<double> angle(-M_PI, M_PI), rap(-max_rapidity, max_rapidity);
  Eigen::MatrixXd L = Eigen::MatrixXd::Identity(dim, dim);
  for (int pass = 0; pass < 2; ++pass) {
    for (int i = 0; i < dim - 1; ++i) {
      for (int j = i + 1; j < dim - 1; ++j) {
        const double a = angle(rng);
        Eigen::MatrixXd R = Eigen::MatrixXd::Identity(dim, dim);
        R(i, i) = R(j, j) = std::cos(a);
        R(i, j) = -std::sin(a);
        R(j, i) = std::sin(a);
        L = R * L;
      }
      const double phi = rap(rng);
      Eigen::MatrixXd B = Eigen::MatrixXd::Identity(dim, dim);
      B(i, i) = B(dim - 1, dim - 1) = std::cosh(phi);
      B(i, dim - 1) = B(dim - 1, i) = std::sinh(phi);
      L = B * L;
    }
  }
  return L;
}

inline AsymptoticFrame random_frame(int n, std::mt19937& rng, double max_rapidity = 1.0)
{
  return AsymptoticFrame(Eigen::MatrixXd(random_lorentz(n + 2, rng, max_rapidity) *
                                         lightcone::canonical_frame(n).matrix()));
}

/// Gram matrix computed directly from the metric, independent of the library.
inline Eigen::MatrixXd gram(const Eigen::MatrixXd& f)
{
  return f.transpose() * metric(static_cast<int>(f.rows())) * f;
}

inline double gram_error(const Eigen::MatrixXd& f)
{
  const int dim = static_cast<int>(f.rows());
  Eigen::MatrixXd target = Eigen::MatrixXd::Zero(dim, dim);
  target(0, dim - 1) = target(dim - 1, 0) = 1.0;
  for (int i = 1; i < dim - 1; ++i)
    target(i, i) = 1.0;
  return (gram(f) - target).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Curves with a prescribed constant pairing, built by feedback.
//
// The axis coefficients e_k = <W, column> satisfy, for a constant W and the
// Frenet system of the frame,
//   e_y'   = -sum kappa_i e_{V_i}
//   e_{V_i}' = kappa_i e_x - tau_{i-1} e_{V_{i-1}} + tau_i e_{V_{i+1}}  (e_{V_0} := e_y)
//   e_x'   = e_{V_1}
// so one curvature function can be chosen along the way to hold a pairing
// fixed. Here the coefficients are stored in frame-column order
// (x, V_1..V_n, y), unlike the eta numbering.

using Feedback = std::function<void(const Eigen::VectorXd& coeff, ProfileValues& c)>;

inline Eigen::VectorXd coeff_rhs(const Eigen::VectorXd& e, const ProfileValues& c)
{
  const int m = static_cast<int>(e.size()), n = m - 2;
  Eigen::VectorXd d(m);
  d[0] = e[1];
  for (int i = 1; i <= n; ++i) {
    const double prev = i == 1 ? e[m - 1] : c.t(i - 1) * e[i - 1];
    const double next = i < n ? c.t(i) * e[i + 1] : 0.0;
    d[i] = c.k(i) * e[0] - prev + next;
  }
  double s = 0.0;
  for (int i = 1; i <= n; ++i)
    s += c.k(i) * e[i];
  d[m - 1] = -s;
  return d;
}

struct FeedbackCurve
{
  CurvatureProfile profile;
  Trajectory trajectory;
  Eigen::VectorXd axis;
};

/// Integrates the coefficient system with `feedback` adjusting the base
/// profile values, samples every curvature function on a grid of step h/2,
/// and synthesizes the curve from the canonical frame at span.lo.
/// `e0` are the initial coefficients in column order (x, V_1..V_n, y).
inline FeedbackCurve feedback_curve(const CurvatureProfile& base, const Eigen::VectorXd& e0, const Feedback& feedback,
                                    Interval span, double h)
{
  const int n = base.n(), m = n + 2;
  const double hf = 0.5 * h;
  const auto steps = static_cast<std::size_t>(std::llround(span.length() / hf));
  auto values = [&](const Eigen::VectorXd& e, double s) {
    ProfileValues c = base(s);
    feedback(e, c);
    return c;
  };

  std::vector<double> grid(steps + 1);
  std::vector<std::vector<double>> kap(static_cast<std::size_t>(n), std::vector<double>(steps + 1));
  std::vector<std::vector<double>> tau(static_cast<std::size_t>(std::max(0, n - 1)), std::vector<double>(steps + 1));
  Eigen::VectorXd e = e0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double s = k == steps ? span.hi : span.lo + static_cast<double>(k) * hf;
    grid[k] = s;
    const ProfileValues c = values(e, s);
    for (int i = 1; i <= n; ++i)
      kap[static_cast<std::size_t>(i - 1)][k] = c.k(i);
    for (int j = 1; j < n; ++j)
      tau[static_cast<std::size_t>(j - 1)][k] = c.t(j);
    if (k == steps)
      break;
    const double dt = (k + 1 == steps ? span.hi : span.lo + static_cast<double>(k + 1) * hf) - s;
    const Eigen::VectorXd k1 = coeff_rhs(e, values(e, s));
    const Eigen::VectorXd y2 = e + 0.5 * dt * k1;
    const Eigen::VectorXd k2 = coeff_rhs(y2, values(y2, s + 0.5 * dt));
    const Eigen::VectorXd y3 = e + 0.5 * dt * k2;
    const Eigen::VectorXd k3 = coeff_rhs(y3, values(y3, s + 0.5 * dt));
    const Eigen::VectorXd y4 = e + dt * k3;
    const Eigen::VectorXd k4 = coeff_rhs(y4, values(y4, s + dt));
    e += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  lightcone::ProfileSpec spec;
  spec.n = n;
  spec.domain = span;
  for (auto& v : kap)
    spec.kappa.push_back({lightcone::FunctionKind::Sampled, {}, grid, v});
  for (auto& v : tau)
    spec.tau.push_back({lightcone::FunctionKind::Sampled, {}, grid, v});
  CurvatureProfile profile = lightcone::make_profile(spec);

  const AsymptoticFrame f0 = lightcone::canonical_frame(n);
  // <W, x> = e_x etc. with the canonical Gram matrix: W = e_y x + e_x y + sum e_{V_i} V_i.
  Eigen::VectorXd w = e0[m - 1] * f0.matrix().col(0) + e0[0] * f0.matrix().col(m - 1);
  for (int i = 1; i <= n; ++i)
    w += e0[i] * f0.matrix().col(i);
  Trajectory t = lightcone::synthesize(profile, f0, span, h);
  return FeedbackCurve{std::move(profile), std::move(t), std::move(w)};
}

/// n = 2 curve whose V_2 pairs constantly with W: tau_1 = kappa_2 e_x / e_{V_1}.
inline FeedbackCurve slant_curve_n2(double h = 1e-3)
{
  const Interval span{0.0, 2.0};
  CurvatureProfile base = lightcone::constant_profile(span, {-0.5, 0.3}, {0.0});
  Eigen::VectorXd e0(4);
  e0 << 0.5, 1.0, 0.4, 0.2; // x, V_1, V_2, y
  return feedback_curve(
      base, e0, [](const Eigen::VectorXd& e, ProfileValues& c) { c.tau[1] = c.k(2) * e[0] / e[1]; }, span, h);
}

/// Curve with <V_1, W> held constant: kappa_1 = (e_y - tau_1 e_{V_2}) / e_x.
inline FeedbackCurve constant_eta2_curve(int n, double h = 1e-3)
{
  const Interval span{0.0, 1.5};
  std::vector<double> kappa, tau;
  for (int i = 1; i <= n; ++i)
    kappa.push_back(0.3 - 0.15 * i);
  for (int j = 1; j < n; ++j)
    tau.push_back(j % 2 ? 0.6 + 0.1 * j : -0.5);
  CurvatureProfile base = lightcone::constant_profile(span, kappa, tau);
  Eigen::VectorXd e0(n + 2);
  e0[0] = 2.0;      // x
  e0[1] = 1.5;      // V_1
  for (int i = 2; i <= n; ++i)
    e0[i] = 0.3 * i;
  e0[n + 1] = 0.25; // y
  return feedback_curve(
      base, e0,
      [](const Eigen::VectorXd& e, ProfileValues& c) {
        const double t1 = e.size() > 3 ? c.t(1) * e[2] : 0.0;
        c.kappa[0] = (e[e.size() - 1] - t1) / e[0];
      },
      span, h);
}

// ---------------------------------------------------------------------------
// Log-spiral closed forms with W = (0, 0, 1).

inline Eigen::Vector3d log_spiral_eta(double s) { return {1.0 / s, -1.0, -s}; }
inline Eigen::Vector3d log_spiral_harmonics(double s) { return {s, 1.0, -1.0 / s}; }

} // namespace lctest
