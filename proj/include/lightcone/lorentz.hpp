#pragma once

// Indefinite inner product on E_1^{n+2} and the asymptotic orthonormal frame.
//
// Signature convention: (+,...,+,-), the single minus sign sits on the LAST
// coordinate. Component indices are 0-based in code; component dim-1 is the
// timelike one.

#include "lightcone/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace lightcone {

namespace detail {

inline double inner(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v)
{
  const Eigen::Index last = u.size() - 1;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < last; ++i)
    sum += u[i] * v[i];
  return sum - u[last] * v[last];
}

/// Metric applied to a vector: diag(1,...,1,-1) v.
inline Eigen::VectorXd lower(const Eigen::Ref<const Eigen::VectorXd>& v)
{
  Eigen::VectorXd out = v;
  out[out.size() - 1] = -out[out.size() - 1];
  return out;
}

inline double max_abs(const Eigen::Ref<const Eigen::VectorXd>& v)
{
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

} // namespace detail

/// A point or direction in E_1^{n+2}. Always at least 3 finite components.
class LorentzVector
{
public:
  explicit LorentzVector(Eigen::VectorXd components) : c_(std::move(components)) { validate(); }
  LorentzVector(std::initializer_list<double> components)
    : c_(Eigen::Map<const Eigen::VectorXd>(components.begin(), static_cast<Eigen::Index>(components.size())))
  {
    validate();
  }

  static LorentzVector zero(int dim) { return LorentzVector(Eigen::VectorXd::Zero(dim)); }
  static LorentzVector basis(int dim, int index)
  {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    e[index] = 1.0;
    return LorentzVector(std::move(e));
  }

  int dim() const noexcept { return static_cast<int>(c_.size()); }
  double operator[](int i) const { return c_[i]; }
  const Eigen::VectorXd& components() const noexcept { return c_; }

  double max_abs() const { return detail::max_abs(c_); }

  friend LorentzVector operator+(const LorentzVector& a, const LorentzVector& b)
  {
    check_same_dim(a, b);
    return LorentzVector(Eigen::VectorXd(a.c_ + b.c_));
  }
  friend LorentzVector operator-(const LorentzVector& a, const LorentzVector& b)
  {
    check_same_dim(a, b);
    return LorentzVector(Eigen::VectorXd(a.c_ - b.c_));
  }
  friend LorentzVector operator*(double k, const LorentzVector& a) { return LorentzVector(Eigen::VectorXd(k * a.c_)); }
  friend LorentzVector operator*(const LorentzVector& a, double k) { return k * a; }

  friend bool operator==(const LorentzVector& a, const LorentzVector& b)
  {
    return a.dim() == b.dim() && a.c_ == b.c_;
  }

  friend std::ostream& operator<<(std::ostream& os, const LorentzVector& v)
  {
    os << '(';
    for (int i = 0; i < v.dim(); ++i)
      os << (i ? ", " : "") << v.c_[i];
    return os << ')';
  }

  static void check_same_dim(const LorentzVector& a, const LorentzVector& b)
  {
    if (a.dim() != b.dim())
      throw InputError("dimension mismatch: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }

private:
  void validate() const
  {
    if (c_.size() < 3)
      throw InputError("LorentzVector needs at least 3 components, got " + std::to_string(c_.size()));
    if (!c_.allFinite())
      throw InputError("LorentzVector has non-finite components");
  }

  Eigen::VectorXd c_;
};

/// <u,v> = sum_{i<dim-1} u_i v_i - u_{dim-1} v_{dim-1}.
inline double lorentz_inner(const LorentzVector& u, const LorentzVector& v)
{
  LorentzVector::check_same_dim(u, v);
  return detail::inner(u.components(), v.components());
}

enum class CausalClass { Spacelike, Timelike, Null, Zero };

inline const char* to_string(CausalClass c)
{
  switch (c) {
  case CausalClass::Spacelike: return "spacelike";
  case CausalClass::Timelike: return "timelike";
  case CausalClass::Null: return "null";
  case CausalClass::Zero: return "zero";
  }
  return "?";
}

inline constexpr double kDefaultCausalTolerance = 1e-9;
inline constexpr double kDefaultGramTolerance = 1e-9;
inline constexpr double kProjectionTarget = 1e-13;

/// Zero when every component is below eps; otherwise the sign of <v,v>
/// measured relative to the largest component squared.
inline CausalClass causal_class(const LorentzVector& v, double eps = kDefaultCausalTolerance)
{
  if (!(eps > 0.0))
    throw InputError("causal tolerance must be positive");
  const double scale = v.max_abs();
  if (scale < eps)
    return CausalClass::Zero;
  const double q = lorentz_inner(v, v) / (scale * scale);
  if (std::abs(q) < eps)
    return CausalClass::Null;
  return q > 0.0 ? CausalClass::Spacelike : CausalClass::Timelike;
}

/// The moving frame {x, V_1..V_n, y} stored column-wise in that order.
///
/// Columns: 0 = x (curve point, null), 1..n = V_1..V_n (spacelike unit),
/// n+1 = y (null transversal with <x,y> = 1).
class AsymptoticFrame
{
public:
  /// Wraps a (n+2)x(n+2) column matrix. Only shape and finiteness are checked;
  /// use gram_residual() for the metric conditions.
  explicit AsymptoticFrame(Eigen::MatrixXd columns) : m_(std::move(columns))
  {
    if (m_.rows() < 3 || m_.rows() != m_.cols())
      throw InputError("frame matrix must be square with at least 3 columns");
    if (!m_.allFinite())
      throw InputError("frame has non-finite components");
  }

  AsymptoticFrame(const LorentzVector& x, const std::vector<LorentzVector>& v, const LorentzVector& y)
    : m_(assemble(x, v, y))
  {
  }

  int n() const noexcept { return static_cast<int>(m_.cols()) - 2; }
  int dim() const noexcept { return static_cast<int>(m_.rows()); }

  LorentzVector x() const { return LorentzVector(Eigen::VectorXd(m_.col(0))); }
  /// V_i with the 1-based index used throughout the Frenet system.
  LorentzVector v(int i) const
  {
    if (i < 1 || i > n())
      throw InputError("frame vector index V_" + std::to_string(i) + " out of range");
    return LorentzVector(Eigen::VectorXd(m_.col(i)));
  }
  LorentzVector y() const { return LorentzVector(Eigen::VectorXd(m_.col(n() + 1))); }

  const Eigen::MatrixXd& matrix() const noexcept { return m_; }

private:
  static Eigen::MatrixXd assemble(const LorentzVector& x, const std::vector<LorentzVector>& v, const LorentzVector& y)
  {
    const int dim = x.dim();
    if (static_cast<int>(v.size()) + 2 != dim)
      throw InputError("frame needs exactly dim-2 spacelike vectors");
    Eigen::MatrixXd m(dim, dim);
    m.col(0) = x.components();
    for (int i = 0; i < static_cast<int>(v.size()); ++i) {
      LorentzVector::check_same_dim(x, v[i]);
      m.col(i + 1) = v[i].components();
    }
    LorentzVector::check_same_dim(x, y);
    m.col(dim - 1) = y.components();
    return m;
  }

  Eigen::MatrixXd m_;
};

/// x = e_1 + e_{n+2}, y = (e_1 - e_{n+2})/2, V_i = e_{i+1}.
inline AsymptoticFrame canonical_frame(int n)
{
  if (n < 1)
    throw InputError("canonical_frame requires n >= 1");
  const int dim = n + 2;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  m(0, 0) = 1.0;
  m(dim - 1, 0) = 1.0;
  for (int i = 1; i <= n; ++i)
    m(i, i) = 1.0;
  m(0, dim - 1) = 0.5;
  m(dim - 1, dim - 1) = -0.5;
  return AsymptoticFrame(std::move(m));
}

/// Target Gram matrix in (x, V_1..V_n, y) order.
inline Eigen::MatrixXd gram_target(int dim)
{
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 1; i < dim - 1; ++i)
    t(i, i) = 1.0;
  t(0, dim - 1) = 1.0;
  t(dim - 1, 0) = 1.0;
  return t;
}

inline Eigen::MatrixXd gram_matrix(const Eigen::Ref<const Eigen::MatrixXd>& frame)
{
  const Eigen::Index m = frame.cols();
  Eigen::MatrixXd g(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = a; b < m; ++b)
      g(a, b) = g(b, a) = detail::inner(frame.col(a), frame.col(b));
  return g;
}

struct GramResidual
{
  Eigen::MatrixXd deviation; ///< G_actual - G_target
  double max_abs = 0.0;
};

inline GramResidual gram_residual(const AsymptoticFrame& f)
{
  GramResidual r;
  r.deviation = gram_matrix(f.matrix()) - gram_target(f.dim());
  r.max_abs = r.deviation.cwiseAbs().maxCoeff();
  return r;
}

inline double gram_max_abs(const Eigen::Ref<const Eigen::MatrixXd>& frame)
{
  return (gram_matrix(frame) - gram_target(static_cast<int>(frame.cols()))).cwiseAbs().maxCoeff();
}

namespace detail {

// Constraint rows are the upper triangle (a <= b) of G - T; unknowns are the
// frame entries in column-major order.
inline void gram_system(const Eigen::MatrixXd& f, Eigen::MatrixXd& jac, Eigen::VectorXd& res)
{
  const Eigen::Index m = f.cols();
  const Eigen::Index d = f.rows();
  const Eigen::MatrixXd target = gram_target(static_cast<int>(m));
  Eigen::MatrixXd lowered = f;
  lowered.row(d - 1) *= -1.0;

  const Eigen::Index rows = m * (m + 1) / 2;
  jac.setZero(rows, d * m);
  res.resize(rows);
  Eigen::Index r = 0;
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = a; b < m; ++b, ++r) {
      res[r] = inner(f.col(a), f.col(b)) - target(a, b);
      jac.block(r, a * d, 1, d) += lowered.col(b).transpose();
      jac.block(r, b * d, 1, d) += lowered.col(a).transpose();
    }
  }
}

} // namespace detail

/// Newton projection onto the Gram constraint manifold.
///
/// Each step solves J delta = -F for the minimum-norm correction of all frame
/// vectors jointly. Requires the input to be within 0.1 of the manifold and
/// reaches kProjectionTarget in at most 20 iterations, else ConvergenceError.
inline AsymptoticFrame reproject_frame(const AsymptoticFrame& frame)
{
  Eigen::MatrixXd f = frame.matrix();
  const double initial = gram_max_abs(f);
  if (!(initial < 0.1))
    throw ConvergenceError("reproject_frame: frame too far from the constraint manifold", initial);

  const double scale = std::max(1.0, f.cwiseAbs().maxCoeff() * f.cwiseAbs().maxCoeff());
  const double floor = 4.0 * std::numeric_limits<double>::epsilon() * scale;

  Eigen::MatrixXd jac;
  Eigen::VectorXd res;
  double current = initial;
  for (int iter = 0; iter < 20; ++iter) {
    if (current <= floor)
      break;
    detail::gram_system(f, jac, res);
    const Eigen::VectorXd delta = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(jac).solve(-res);
    Eigen::MatrixXd candidate = f + Eigen::Map<const Eigen::MatrixXd>(delta.data(), f.rows(), f.cols());
    const double next = gram_max_abs(candidate);
    // Past the rounding floor further steps only shuffle the last bits.
    if (next >= current && current < kProjectionTarget)
      break;
    f = std::move(candidate);
    current = next;
  }
  if (!(current < kProjectionTarget))
    throw ConvergenceError("reproject_frame: no convergence in 20 iterations", current);
  return AsymptoticFrame(std::move(f));
}

} // namespace lightcone
