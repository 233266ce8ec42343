#pragma once

// Cubic interpolation and finite-difference stencils shared by the modules.

#include "lightcone/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

namespace lightcone {

/// Interpolating C^2 cubic spline with not-a-knot end conditions.
///
/// Three nodes give the interpolating parabola, two the chord. Evaluation
/// outside [front, back] of the grid throws.
class CubicSpline
{
public:
  CubicSpline() = default;

  CubicSpline(std::vector<double> xs, std::vector<double> ys) : x_(std::move(xs)), y_(std::move(ys))
  {
    if (x_.size() != y_.size())
      throw InputError("spline: grid and value counts differ");
    if (x_.size() < 2)
      throw InputError("spline: need at least 2 nodes");
    for (std::size_t i = 0; i + 1 < x_.size(); ++i)
      if (!(x_[i + 1] > x_[i]))
        throw InputError("spline: grid not strictly increasing at index " + std::to_string(i + 1));
    for (double v : y_)
      if (!std::isfinite(v))
        throw InputError("spline: non-finite value");
    solve_second_derivatives();
  }

  double front() const { return x_.front(); }
  double back() const { return x_.back(); }
  const std::vector<double>& nodes() const noexcept { return x_; }
  const std::vector<double>& values() const noexcept { return y_; }

  double operator()(double x) const
  {
    const std::size_t i = interval(x);
    if (x == x_[i])
      return y_[i];
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - x) / h;
    const double b = (x - x_[i]) / h;
    return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
  }

  double derivative(double x) const
  {
    const std::size_t i = interval(x);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - x) / h;
    const double b = (x - x_[i]) / h;
    return (y_[i + 1] - y_[i]) / h - (3.0 * a * a - 1.0) * h * m_[i] / 6.0 + (3.0 * b * b - 1.0) * h * m_[i + 1] / 6.0;
  }

private:
  std::size_t interval(double x) const
  {
    if (!(x >= x_.front() && x <= x_.back()))
      throw InputError("spline: evaluation point " + std::to_string(x) + " outside [" + std::to_string(x_.front()) +
                       ", " + std::to_string(x_.back()) + "]");
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
  }

  void solve_second_derivatives()
  {
    const std::size_t n = x_.size();
    m_.assign(n, 0.0);
    if (n == 2)
      return;

    std::vector<double> h(n - 1), d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      d[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    if (n == 3) {
      // Not-a-knot on three nodes is the single parabola: constant curvature.
      const double c = 2.0 * (d[1] - d[0]) / (h[0] + h[1]);
      m_.assign(3, c);
      return;
    }

    // Unknowns M_1..M_{n-2}; M_0 and M_{n-1} eliminated via continuity of the
    // third derivative across x_1 and x_{n-2}.
    const std::size_t k = n - 2;
    std::vector<double> sub(k, 0.0), diag(k, 0.0), sup(k, 0.0), rhs(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t i = j + 1;
      sub[j] = h[i - 1];
      diag[j] = 2.0 * (h[i - 1] + h[i]);
      sup[j] = h[i];
      rhs[j] = 6.0 * (d[i] - d[i - 1]);
    }
    // M_0 = ((h0+h1) M_1 - h0 M_2) / h1
    diag[0] += h[0] * (h[0] + h[1]) / h[1];
    sup[0] -= h[0] * h[0] / h[1];
    // M_{n-1} = ((h_{n-3}+h_{n-2}) M_{n-2} - h_{n-2} M_{n-3}) / h_{n-3}
    const double hl = h[n - 2], hp = h[n - 3];
    diag[k - 1] += hl * (hp + hl) / hp;
    sub[k - 1] -= hl * hl / hp;

    // Thomas algorithm.
    for (std::size_t j = 1; j < k; ++j) {
      const double w = sub[j] / diag[j - 1];
      diag[j] -= w * sup[j - 1];
      rhs[j] -= w * rhs[j - 1];
    }
    std::vector<double> inner(k);
    inner[k - 1] = rhs[k - 1] / diag[k - 1];
    for (std::size_t j = k - 1; j-- > 0;)
      inner[j] = (rhs[j] - sup[j] * inner[j + 1]) / diag[j];

    for (std::size_t j = 0; j < k; ++j)
      m_[j + 1] = inner[j];
    m_[0] = ((h[0] + h[1]) * m_[1] - h[0] * m_[2]) / h[1];
    m_[n - 1] = ((hp + hl) * m_[n - 2] - hl * m_[n - 3]) / hp;
  }

  std::vector<double> x_, y_, m_;
};

namespace fd {

/// Fourth-order central first derivative at index k of a uniformly spaced series.
template <class Series>
auto first(const Series& f, std::size_t k, double h)
{
  using T = std::decay_t<decltype(f[k])>;
  return T((f[k - 2] - 8.0 * f[k - 1] + 8.0 * f[k + 1] - f[k + 2]) / (12.0 * h));
}

/// Fourth-order central second derivative.
template <class Series>
auto second(const Series& f, std::size_t k, double h)
{
  using T = std::decay_t<decltype(f[k])>;
  return T((-f[k - 2] + 16.0 * f[k - 1] - 30.0 * f[k] + 16.0 * f[k + 1] - f[k + 2]) / (12.0 * h * h));
}

/// Number of points dropped at each end by the stencils above.
inline constexpr std::size_t kMargin = 2;

} // namespace fd

/// Lagrange weights of the 4-point stencil at fractional offset t from node 0.
inline std::array<double, 4> cubic_lagrange_weights(double t)
{
  return {-(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0, t * (t - 2.0) * (t - 3.0) / 2.0, -t * (t - 1.0) * (t - 3.0) / 2.0,
          t * (t - 1.0) * (t - 2.0) / 6.0};
}

/// Cumulative trapezoid integral of uniformly spaced samples, starting at 0.
inline std::vector<double> cumulative_trapezoid(std::span<const double> f, double h)
{
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t k = 1; k < f.size(); ++k)
    out[k] = out[k - 1] + 0.5 * h * (f[k - 1] + f[k]);
  return out;
}

} // namespace lightcone
